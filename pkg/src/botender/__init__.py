"""Botender: a collaboratively governed LLM community bot.

Community members propose, iterate on, and deploy natural-language task
definitions for an LLM-driven bot; a case-based provocation engine
generates test cases that expose ambiguous, overly narrow, or socially
consequential prompt wording.
"""

__version__ = "0.1.0"
