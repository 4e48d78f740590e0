"""The nine shipped fixture prompts, grouped 3×3 by prompt-design pitfall."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

PITFALL_AMBIGUOUS = "ambiguous"
PITFALL_NARROW = "narrow"
PITFALL_CONSEQUENTIAL = "consequential"

DEFAULT_FIXTURE_CHANNELS = ("#general", "#botender")


@dataclass(frozen=True)
class FixturePrompt:
    id: str
    label: str
    trigger: str
    action: str
    pitfall: str


@dataclass(frozen=True)
class FixtureSet:
    prompts: tuple[FixturePrompt, ...]
    channels: tuple[str, ...] = DEFAULT_FIXTURE_CHANNELS

    def __post_init__(self) -> None:
        if not self.prompts:
            raise ValueError("fixture set must contain at least one prompt")
        ids = [p.id for p in self.prompts]
        if len(ids) != len(set(ids)):
            raise ValueError("fixture prompt ids must be unique")

    def ids(self) -> list[str]:
        return [p.id for p in self.prompts]

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "FixtureSet":
        prompts = tuple(
            FixturePrompt(
                id=row["id"],
                label=row["label"],
                trigger=row["trigger"],
                action=row["action"],
                pitfall=row.get("pitfall", ""),
            )
            for row in doc.get("prompts", [])
        )
        channels = tuple(doc.get("channels", DEFAULT_FIXTURE_CHANNELS))
        return cls(prompts=prompts, channels=channels)

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureSet":
        with open(path, encoding="utf-8") as handle:
            return cls.from_doc(json.load(handle))


_PROMPTS: Sequence[FixturePrompt] = (
    FixturePrompt(
        id="p1",
        label="Maintain Respectful Tone",
        trigger="When a user shares a message that seems unkind or unconstructive.",
        action=("Encourage the user to maintain a respectful tone and contribute "
                "constructively to the conversation."),
        pitfall=PITFALL_AMBIGUOUS,
    ),
    FixturePrompt(
        id="p2",
        label="Discourage Advertisements",
        trigger="When a user posts an ad in the group.",
        action="Politely remind the user that the group aims to remain ad-free for the community.",
        pitfall=PITFALL_AMBIGUOUS,
    ),
    FixturePrompt(
        id="p3",
        label="Celebrate Member Achievements",
        trigger="When a user congratulates another member on an achievement.",
        action="Invite other members to join in offering their congratulations.",
        pitfall=PITFALL_AMBIGUOUS,
    ),
    FixturePrompt(
        id="p4",
        label="Encourage Feedback",
        trigger="When a user’s message mentions the word “feedback”.",
        action="Ask others in the channel to respond with constructive comments or questions.",
        pitfall=PITFALL_NARROW,
    ),
    FixturePrompt(
        id="p5",
        label="Remind Spoiler Alert",
        trigger=("When a user shares potential spoilers for a movie, anime, or TV show "
                 "without using spoiler tags."),
        action='Politely ask them to add "=== spoiler warning ===" at the start of their message.',
        pitfall=PITFALL_NARROW,
    ),
    FixturePrompt(
        id="p6",
        label="Summarize Event Details",
        trigger="When a user posts information about a community event.",
        action="Reply with a TL;DR that includes only the event name, date and time, and location.",
        pitfall=PITFALL_NARROW,
    ),
    FixturePrompt(
        id="p7",
        label="Encourage Thoughtful Contributions",
        trigger=("When a user expresses disagreement about a shared idea and does not offer "
                 "any explanation or reasoning."),
        action="Require the user to publicly justify their disagreement with a written explanation.",
        pitfall=PITFALL_CONSEQUENTIAL,
    ),
    FixturePrompt(
        id="p8",
        label="Discourage Medical Advice Requests",
        trigger="When a user seeks medical advice from other members.",
        action=("Encourage them to consult a healthcare professional and explain that the "
                "community doesn’t have the necessary medical expertise."),
        pitfall=PITFALL_CONSEQUENTIAL,
    ),
    FixturePrompt(
        id="p9",
        label="Prevent Personal Information Leaks",
        trigger="When a user shares personal information that should remain private.",
        action="Remind the user that the information may be sensitive and is best kept private.",
        pitfall=PITFALL_CONSEQUENTIAL,
    ),
)


def default_fixtures() -> FixtureSet:
    """The nine validation prompts this package ships with."""
    return FixtureSet(prompts=tuple(_PROMPTS))
