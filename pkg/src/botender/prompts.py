"""Operating prompt text for the bot runtime, the provocation pipelines, and the baseline generator.

Everything the model sees is assembled here so that rendered prompts are
byte-stable and can be golden-tested. Shared blocks are spliced into the
stage templates via literal ``< ... >`` markers rather than str.format,
because the prompt text itself contains braces.
"""

from __future__ import annotations

from typing import Iterable, Sequence

AMBIGUITY = "ambiguity"
NARROWNESS = "narrowness"
CONSEQUENCE = "consequence"

BOT_CAPABILITY_MARKER = "< bot capability >"
INPUT_SPECIFICATION_MARKER = "< input specification >"
COMMUNITY_DESCRIPTION_MARKER = "< community description >"

PROMPT_ISSUE_LABELS = {
    AMBIGUITY: "underspecified prompt",
    NARROWNESS: "overspecified prompt",
    CONSEQUENCE: "unintended consequences of the prompt",
}

# Rendered in place of a missing triggered task or bot response when a case
# is shown back to an evaluator or the selector.
NO_VALUE = "n/a"

ORCHESTRATOR_SYSTEM = (
    "You are a helpful assistant tasked with determining whether a task should be triggered "
    "based on a user's message in a specific channel. You will receive a list of tasks, each "
    "with an associated ID and trigger condition, as well as the user's message and the channel "
    "where it was sent. If the message is relevant to the trigger condition of a specific task, "
    "respond with that task's ID. If the message is relevant to multiple tasks, respond with the "
    "ID of the task to which it is most relevant. If the message does not match any task trigger, "
    "respond with 0. Your response must be a JSON object with a single key \"taskId\". "
    "For example: {\"taskId\": \"some-task-id\"} or {\"taskId\": \"0\"}."
)

TASK_AGENT_SYSTEM = (
    "You are a helpful assistant tasked with responding to a user's message in a specific "
    "channel, following the instructions provided in an assigned action. You will receive the "
    "action instructions, the user's message, and the channel where it was sent. Based on the "
    "action, compose an appropriate reply. If you determine that no response is necessary, use "
    "\"n/a\". Your response must be a JSON object with a single key \"response\". "
    "For example: {\"response\": \"Here is your reply.\"} or {\"response\": \"n/a\"}."
)

BOT_CAPABILITY = (
    "The bot is capable of single-turn conversations, meaning it can only provide an appropriate "
    "text reply to a user's message at a time. If the user sends another follow-up message, the "
    "bot is unable to respond further. Additionally, the bot cannot perform other actions such as "
    "removing users from the server, banning users from posting, reacting with emojis, or sending "
    "direct messages to other users or moderators."
)

INPUT_SPECIFICATION_CHANNELS_MARKER = (
    "[A list of channels where Botender has permission on the server]"
)

INPUT_SPECIFICATION_TEMPLATE = (
    "The input should consist of a Discord channel name and a user message. The channel name "
    "must begin with a hash (#) followed by a valid channel identifier, chosen from the following "
    "available channels on the server: "
    + INPUT_SPECIFICATION_CHANNELS_MARKER
    + ". The user message should be a single string that realistically represents something a "
    "user might post in that channel. It must not include explicit formatting instructions, "
    "metadata, or explanations of its purpose. The message should be plausible and use natural "
    "language typical of a real Discord community, and the input must not contain bot commands, "
    "markup syntax, or JSON structures."
)

DEFAULT_COMMUNITY_DESCRIPTION = (
    "A Discord server where people come together with something in common. The community "
    "includes both newcomers and long-time members. The tone is generally friendly and "
    "collaborative, though discussions can sometimes become heated. Members aim to foster a "
    "welcoming and engaged environment. This is not necessarily a gaming community, but a shared "
    "space for people with a common interest or connection."
)

JSON_SAFETY_FOOTER = (
    "All values must be JSON-safe: wrap any field that contains commas in quotes, and avoid "
    "newlines. Do not include any extra text, formatting, or commentary outside the JSON object."
)

_PROMPT_DEFINES = (
    "• A trigger: when the bot should take action.\n"
    "• An action: what the bot should do when triggered.\n"
)

DETECTOR_SYSTEM = {
    AMBIGUITY: (
        "You are a helpful assistant tasked with identifying critical ambiguities in prompts "
        "written for language model-based bots deployed within an online community. This prompt "
        "defines:\n"
        + _PROMPT_DEFINES
        + BOT_CAPABILITY_MARKER + "\n"
        "Your Task:\n"
        "Read the full prompt carefully. Identify specific phrases or instructions that are "
        "ambiguous, underspecified, and open to multiple reasonable interpretations. Focus "
        "exclusively on ambiguities that could cause:\n"
        "• Vague or undefined concepts\n"
        "• Unclear boundaries or thresholds\n"
        "• Conflicting or competing goals\n"
        "• Situational or contextual assumptions\n"
        "• Ambiguity about what, when, or how the bot is supposed to act\n"
        "Prioritize ambiguities that could lead to reasonable differences in human "
        "interpretation, especially those where people might disagree about whether the bot's "
        "behavior is desirable. Focus on ambiguities that could cause visible inconsistencies in "
        "the bot's behavior. Do not list trivial ambiguities, style differences, or issues that "
        "would not affect how real users experience the bot.\n"
        "Output Format:\n"
        "Return a JSON object containing an array of ambiguities. Each ambiguity should have a "
        "unique key starting from 0 and include the following two properties:\n"
        "• underspecified_phrase: a specific quote or snippet from the prompt that is "
        "ambiguous\n"
        "• description: a 1-2 sentence explanation of what makes it ambiguous or open to "
        "multiple interpretations\n"
        + JSON_SAFETY_FOOTER
    ),
    NARROWNESS: (
        "You are a helpful assistant tasked with identifying critical overspecified phrases in "
        "prompts written for language model-based bots. This prompt defines:\n"
        + _PROMPT_DEFINES
        + BOT_CAPABILITY_MARKER + "\n"
        "Your Task:\n"
        "Read the full prompt carefully. Identify overspecified phrases—parts of the prompt "
        "that unnecessarily limit the bot's behavior or responses, phrased too narrowly, rigidly, "
        "or tied to surface-level specifics. These may prevent the bot from fulfilling its "
        "broader functional purpose.\n"
        "Follow these steps to complete your task:\n"
        "1. Infer the Broader Goal: Read the full prompt carefully. Infer the broadest reasonable "
        "functional goal: what the bot is ultimately intended to detect, prevent, encourage, or "
        "support, independent of any surface-level constraints or examples mentioned in the "
        "wording of the prompt. Focus on the underlying user problem, situation, or need that the "
        "bot is designed to address. Ignore specific conditions, instances, or implementation "
        "details unless they are essential to the bot’s purpose. Express the broader goal as "
        "what the bot should ideally support, if it were not constrained by unnecessary "
        "restrictions.\n"
        "2. Identify Overspecified Phrases: Identify specific snippets of the prompt that "
        "unnecessarily constrain how the bot can fulfill its broader goal. Focus on requirements "
        "tied to particular content types, formats, channels, or contexts; examples treated as "
        "strict conditions; and narrow definitions that exclude plausible situations fitting the "
        "broader goal.\n"
        "3. Define Uncovered Scenarios: For each overspecified phrase, describe as thoroughly as "
        "possible the set of scenarios that are currently excluded because of the restrictive "
        "wording. These scenarios should fit within the broader goal and could reasonably be "
        "handled by the bot without requiring any expansion of its capabilities.\n"
        "Important: Do not include scenarios that are already covered by the current "
        "overspecified phrase. Think of uncovered scenarios as the portion of the broader goal "
        "left unaddressed due to the overspecified phrase. Apply deliberate creativity: consider "
        "realistic, plausible situations that are missed due to unnecessary specificity. Focus on "
        "diverse, meaningful cases that reflect the variety of user needs the bot is intended to "
        "support. Prioritize scenarios that are plausible within the community where the bot is "
        "deployed, likely to arise in typical use, and distinct from one another in form, "
        "context, or content.\n"
        "Output Format:\n"
        "Return a JSON object containing an array of overspecified phrases. Each phrase should "
        "have a unique key starting from 0 and include:\n"
        "• broader_goal: the broader goal of the prompt, as you inferred from its content.\n"
        "• overspecified_phrase: a specific quote or snippet from the prompt that is overly "
        "specific.\n"
        "• uncovered_scenarios: a description of scenarios that are relevant to the broader "
        "goal but are not addressed by the current overspecified phrase.\n"
        + JSON_SAFETY_FOOTER
    ),
    CONSEQUENCE: (
        "You are a helpful assistant tasked with identifying potential unintended consequences "
        "in prompts written for language model-based bots deployed within an online community. "
        "This prompt defines:\n"
        + _PROMPT_DEFINES
        + BOT_CAPABILITY_MARKER + "\n"
        "Your Task:\n"
        "Read the full prompt carefully. Identify specific phrases or instructions that could "
        "lead to unintended community-level consequences. Focus on aspects of the prompt that may "
        "produce negative impacts on participation, trust, tone, or community "
        "experience—even if the prompt appears clear or well-intentioned. Surface potential "
        "value tensions, social risks, and moderation pitfalls that the community may wish to "
        "proactively consider or address. Focus on raising concerns about the prompt's direction, "
        "tone, or broader social implications, rather than evaluating its precision or scope. "
        "Your goal is to help the community clarify its values and anticipate potential risks "
        "before deployment.\n"
        "Draw from the following four types of potential unintended consequences of the bot to "
        "guide your analysis. These consequences are especially useful for prompting community "
        "reflection, surfacing implicit values, and encouraging more thoughtful moderation "
        "design:\n"
        "1. Encouraging Contribution: Bots may unintentionally discourage participation by "
        "overemphasizing metrics or feedback, crowding out users' intrinsic motivation to learn, "
        "explore, or contribute creatively. Praise or corrections may feel impersonal or "
        "manipulative if delivered rigidly by a bot, undermining trust and commitment. Bots may "
        "also reinforce dominant behaviors or popular contributions, marginalizing diverse or "
        "alternative forms of value. Replacing personal recognition with automated responses may "
        "erode the human connection essential for healthy participation.\n"
        "2. Encouraging Commitment: Bots that overlook users' prior efforts, personal goals, or "
        "community identity signals may weaken ongoing participation. Ignoring users' history of "
        "contributions, social ties, or personal motivations (like fun or growth) can reduce "
        "their investment in the community. Overly procedural enforcement may disrupt the sense "
        "of belonging and shared identity that helps retain contributors.\n"
        "3. Regulating Behavior: Bots may enforce norms in ways that feel confusing, unfair, or "
        "alienating. Responses may lack clarity or consistency, punish users without giving them "
        "a dignified way to recover, or impose overly harsh or arbitrary sanctions that erode "
        "trust. Automated moderation risks appearing punitive rather than supportive, especially "
        "if responses feel generic or opaque. Failing to track repeat issues or ignoring "
        "community tone can further damage perceptions of fairness, legitimacy, and ownership.\n"
        "4. Managing Newcomer Integration: Newcomers may be deterred if bots apply strict rules "
        "too early, fail to explain expectations clearly, or do not provide enough early "
        "guidance. Rigid enforcement or unclear onboarding may lead to confusion, early mistakes, "
        "and disengagement. Bots that present norms too formally or too casually may mislead "
        "newcomers about the community's actual tone or values. Abrupt exposure to complex tasks "
        "without scaffolding may overwhelm or alienate new participants.\n"
        "Prioritize unintended consequences of the prompt that could significantly affect real "
        "user experience. The unintended consequence you identify should be something that can be "
        "addressed by revising the prompt's wording, without needing to expand the bot's "
        "capabilities. Avoid trivial issues, style preferences, or theoretical edge cases "
        "unlikely to occur in practice.\n"
        "Output Format:\n"
        "Return a JSON object containing an array of potential unintended consequences. Each "
        "consequence should have a unique key starting from 0 and include the following two "
        "properties:\n"
        "• problematic_phrase: a specific quote or snippet from the prompt that could "
        "potentially cause unintended consequences.\n"
        "• consequence: a 1 to 2 sentence explanation of the possible unintended consequence "
        "or concern related to this phrase\n"
        + JSON_SAFETY_FOOTER
    ),
}

GENERATOR_SYSTEM = {
    AMBIGUITY: (
        "You are a helpful assistant tasked with generating input test cases that explore how "
        "ambiguous phrases in a bot's prompt could be interpreted in different, plausible ways. "
        "This prompt defines:\n"
        + _PROMPT_DEFINES
        + BOT_CAPABILITY_MARKER + "\n"
        "You will be provided with:\n"
        "• prompt: the full prompt for the bot, containing one or more ambiguous phrases.\n"
        "• underspecified_phrase: a specific snippet from the prompt that is ambiguous.\n"
        "• description: a 1-2 sentence explanation describing why the phrase is ambiguous or "
        "can be interpreted in multiple ways.\n"
        "Your Task:\n"
        "For each underspecified_phrase, generate a small set of test cases that illustrate "
        "distinct, plausible alternative interpretations of the phrase. A test case is an input "
        "to the bot that adheres to the following input specification:\n"
        + INPUT_SPECIFICATION_MARKER + "\n"
        "When generating test cases, prioritize those that provoke visible divergence in bot "
        "behavior—either in whether the bot responds (trigger ambiguity) or in how the bot "
        "responds (action ambiguity). Aim to create test cases that illustrate non-obvious yet "
        "reasonable interpretations, revealing hidden assumptions, unclear boundaries, or "
        "conflicting objectives within the original, underspecified phrase. If the ambiguity "
        "influences the bot's action, design the test case to elicit a bot response that clearly "
        "diverges from its typical default response. If the ambiguity concerns the trigger, focus "
        "on whether the bot responds or not. Each test case should make the ambiguity evident at "
        "the surface level, discernible from the channel, user message, and bot response alone, "
        "without the need for additional explanation.\n"
        "Additionally, the test cases should be realistic and natural, mirroring the typical "
        "messages found in the following community and reflecting its unique tone:\n"
        + COMMUNITY_DESCRIPTION_MARKER + "\n"
        "Do not generate test cases based on literal, overly obvious, or superficial "
        "interpretations. Avoid creating test cases that only involve minor tone or style "
        "differences, unless these differences have a clear impact on user-facing behavior. "
        "Additionally, do not include cases that would not affect how humans perceive or interact "
        "with the bot.\n"
        "Output Format:\n"
        "Return a JSON object containing an array of the generated test cases. Each case should "
        "have a unique key starting from 0 and include the following four properties.\n"
        "• underspecified_phrase: the specific snippet from the prompt that is ambiguous.\n"
        "• interpretation: a plausible alternative interpretation of the phrase that the "
        "test case is generated to illustrate.\n"
        "• reasoning: a brief explanation of how the test case reveals the ambiguity.\n"
        "• case: the input test case, formatted according to the input specification.\n"
        + JSON_SAFETY_FOOTER
    ),
    NARROWNESS: (
        "You are a helpful assistant tasked with generating input test cases that illustrate how "
        "an overspecified phrase in a prompt might cause the bot to miss relevant situations. "
        "This prompt defines:\n"
        + _PROMPT_DEFINES
        + BOT_CAPABILITY_MARKER + "\n"
        "You will be provided with:\n"
        "• prompt: the full prompt for the bot, containing one or more overspecified "
        "phrases.\n"
        "• overspecified_phrase: a specific snippet from the prompt identified as overly "
        "specific.\n"
        "• broader_goal: the broader goal of the prompt.\n"
        "• uncovered_scenarios: a description of scenarios that are relevant to the broader "
        "goal but excluded by the overspecified phrase.\n"
        "Your Task:\n"
        "For each overspecified_phrase, generate distinct test cases, where each case directly "
        "reflects one specific uncovered scenario from the provided list, aligns with the broader "
        "goal, and is currently excluded due to the overspecified phrase. A test case is an input "
        "to the bot that adheres to the following input specification:\n"
        + INPUT_SPECIFICATION_MARKER + "\n"
        "Each test case should visibly demonstrate how the overspecified phrase restricts the "
        "bot's behavior, excluding relevant situations that fit the broader goal. The missed "
        "scenario should be evident from the channel name and user message alone, without "
        "requiring further explanation. When designing test cases, prioritize those that surface "
        "differences in message content, phrasing, or context that realistically reflect how the "
        "overspecified phrase causes the bot to fail. Avoid trivial variations or unrealistic "
        "phrasing.\n"
        "Additionally, the test cases should be realistic and natural, mirroring the typical "
        "messages found in the following community and reflecting its unique tone:\n"
        + COMMUNITY_DESCRIPTION_MARKER + "\n"
        "Do not generate scenarios already covered by the overspecified phrase. Do not generate "
        "cases that require capabilities the bot does not have. Do not include trivial, "
        "repetitive, or unrealistic cases. The uncovered scenario should be clear to a human "
        "reviewer from the input alone.\n"
        "Output Format:\n"
        "Return a JSON object containing an array of generated test cases. Each case should have "
        "a unique key starting from 0 and include:\n"
        "• uncovered_scenario: the specific uncovered scenario that the test case is "
        "generated to illustrate.\n"
        "• reasoning: a brief explanation describing how the test case makes this uncovered "
        "scenario visible to a human reviewer.\n"
        "• case: the input test case, formatted according to the input specification.\n"
        + JSON_SAFETY_FOOTER
    ),
    CONSEQUENCE: (
        "You are a helpful assistant tasked with generating input test cases that illustrate how "
        "specific problematic phrases in a language model-based bot's prompt could "
        "unintentionally cause harm to the online community where the bot is deployed. These "
        "test cases are intended to reveal how the bot's current design may challenge important "
        "community values and spark thoughtful reflection on the behaviors the community wishes "
        "to encourage.\n"
        "The prompt of the bot defines:\n"
        + _PROMPT_DEFINES
        + BOT_CAPABILITY_MARKER + "\n"
        "You will be provided with:\n"
        "• prompt: the full prompt for the bot, containing one or more potentially "
        "problematic phrases.\n"
        "• problematic_phrase: a specific snippet from the prompt that could potentially "
        "cause unintended consequences.\n"
        "• consequence: the possible unintended consequence identified as a result of the "
        "potentially problematic phrase.\n"
        "Your Task:\n"
        "For each identified consequence, create a single, credible test case that naturally "
        "depicts how this consequence might arise. A test case is an input to the bot that "
        "adheres to the following input specification:\n"
        + INPUT_SPECIFICATION_MARKER + "\n"
        "Each test case should stand alone as a compelling, credible example—illustrating "
        "the tension between the prompt and the community value at risk. The consequence should "
        "be visible at the surface level, without relying on further explanation.\n"
        "Additionally, the test cases should be realistic and natural, mirroring the typical "
        "messages found in the following community and reflecting its unique tone:\n"
        + COMMUNITY_DESCRIPTION_MARKER + "\n"
        "Output Format:\n"
        "Return a JSON object with the following two properties:\n"
        "• reasoning: a brief explanation of how the test case reveals the unintended "
        "consequence.\n"
        "• case: the input test case, formatted according to the input specification.\n"
        + JSON_SAFETY_FOOTER
    ),
}

EVALUATOR_SYSTEM = {
    AMBIGUITY: (
        "You are a helpful assistant tasked with evaluating whether a test case clearly "
        "demonstrates a plausible and critical alternative interpretation of an ambiguous phrase "
        "in a bot's prompt. This prompt defines:\n"
        + _PROMPT_DEFINES
        + BOT_CAPABILITY_MARKER + "\n"
        "You will be provided with:\n"
        "• prompt: the full prompt for the bot, including both the trigger and action "
        "components.\n"
        "• underspecified_phrase: a specific snippet from the prompt that is ambiguous.\n"
        "• interpretation: a plausible alternative interpretation of the phrase that the "
        "test case is intended to illustrate.\n"
        "• reasoning: a brief explanation describing how the test case could demonstrate "
        "this interpretation.\n"
        "• case: the test case itself, including the user message in a specific channel, "
        "the specific task triggered for the bot (if any), and the corresponding bot response to "
        "that task.\n"
        "It is possible that the user input does not trigger any task, or that the bot chooses "
        "not to respond even if a task is triggered.\n"
        "Your Task:\n"
        "Decide whether the test case clearly and directly demonstrates the intended "
        "interpretation based only on the channel, user message, and bot response. The ambiguity "
        "must be apparent to a human without explanation. Only approve the case if it clearly "
        "tests the goal stated in the input reasoning.\n"
        "At the same time, reject any test cases where the scenario assumes the bot can perform "
        "actions beyond its defined capabilities. Also, reject cases where the interpretation "
        "shown is non-critical—that is, it does not impact user understanding or the bot's "
        "behavior. Additionally, reject test cases that simply reflect an expected, default, or "
        "literal reading of the ambiguous phrase, as well as those where the demonstrated "
        "interpretation is too subtle for an average human to notice.\n"
        "If the ambiguity involves how the bot should respond—meaning the action within the "
        "prompt is underspecified—consider the following additional steps: First, infer the "
        "generalized or default response the bot would typically give based on the prompt and "
        "input. Next, compare this default response to the bot's actual response in the test "
        "case. Approve the case only if the actual response shows a clear and noticeable "
        "difference from the default in terms of tone, structure, or content, such that the "
        "change would be obvious to a human observer. Minor shifts in tone, phrasing, or "
        "politeness do not count unless they lead to a significant change in the bot's observable "
        "behavior.\n"
        "Output Format:\n"
        "Return a JSON object with the following two properties:\n"
        "• label: a boolean value—true if the test case visibly and meaningfully "
        "demonstrates the intended interpretation of the underspecified phrase; false if it does "
        "not, or if it is rejected.\n"
        "• label_explanation: a brief, 1 to 2 sentence explanation supporting your "
        "decision.\n"
        + JSON_SAFETY_FOOTER
    ),
    NARROWNESS: (
        "You are a helpful assistant tasked with evaluating whether a test case effectively "
        "demonstrates an uncovered scenario caused by an overspecified phrase in a bot's prompt. "
        "This prompt defines:\n"
        + _PROMPT_DEFINES
        + BOT_CAPABILITY_MARKER + "\n"
        "You will be provided with:\n"
        "• prompt: the full prompt for the bot, including both the trigger and action "
        "components.\n"
        "• overspecified_phrase: a snippet from the prompt that is identified as overly "
        "specific.\n"
        "• broader_goal: the broader goal of the prompt.\n"
        "• uncovered_scenario: the scenario the test case is designed to illustrate.\n"
        "• reasoning: an explanation of how the test case illustrates the scenario that is "
        "uncovered by the overly specific phrase in the prompt.\n"
        "• case: the test case itself, including the user message in a specific channel, "
        "the specific task triggered for the bot (if any), and the corresponding bot response to "
        "that task.\n"
        "It is possible that the user input does not trigger any task, or that the bot chooses "
        "not to respond even if a task is triggered.\n"
        "Your Task:\n"
        "Decide whether the test case clearly and directly demonstrates the uncovered scenario "
        "caused by the overspecified phrase. Approve the test case only if it visibly reveals the "
        "restriction introduced by the overspecified phrase, showing that the bot fails to "
        "address a situation that clearly fits within the broader goal. The scenario must be "
        "plausible, relevant to the broader goal, and clearly observable based solely on the "
        "input message and bot response.  Approve only when a human reviewer could reasonably "
        "understand, from the input message and bot response alone, how the overspecified phrase "
        "prevents the bot from acting as intended. Only approve the case if it clearly tests the "
        "goal stated in the input reasoning.\n"
        "Reject any test case where the uncovered scenario is unclear, irrelevant, trivial, or "
        "not apparent from the case itself. Additionally, reject any test case where the scenario "
        "requires the bot to perform actions beyond its defined capabilities.\n"
        "Output Format:\n"
        "Return a JSON object with the following two properties:\n"
        "• label: A boolean value—true if the test case clearly demonstrates the "
        "uncovered scenario; false if it does not, or if it is rejected.\n"
        "• label_explanation: a brief, 1 to 2 sentence explanation supporting your "
        "decision.\n"
        + JSON_SAFETY_FOOTER
    ),
    CONSEQUENCE: (
        "You are a helpful assistant tasked with evaluating whether a test case clearly "
        "demonstrates how a specific problematic phrase in a language model-based bot's prompt "
        "could lead to unintended negative consequences for the online community where the bot "
        "is deployed. The bot's prompt defines:\n"
        + _PROMPT_DEFINES
        + BOT_CAPABILITY_MARKER + "\n"
        "You will be provided with:\n"
        "• prompt: the full prompt for the bot, including both the trigger and action "
        "components.\n"
        "• problematic_phrase: a specific snippet from the prompt that could potentially "
        "cause unintended consequences.\n"
        "• consequence: the possible unintended consequence identified as a result of the "
        "potentially problematic phrase.\n"
        "• reasoning: a brief explanation of how the test case reveals the unintended "
        "consequence.\n"
        "• case: the test case itself, including the user message in a specific channel, "
        "the specific task triggered for the bot (if any), and the corresponding bot response to "
        "that task.\n"
        "It is possible that the user input does not trigger any task, or that the bot chooses "
        "not to respond even if a task is triggered.\n"
        "Your Task:\n"
        "Decide whether the test case clearly and convincingly demonstrates the described "
        "unintended consequence. Approve the test case only if the consequence is visibly "
        "illustrated through the input and bot response (if any), the scenario is realistic, "
        "relevant to the community, and a human reviewer could reasonably understand, from the "
        "case alone, how the problematic phrase in the prompt could lead to that consequence. "
        "Only approve the case if it clearly tests the goal stated in the input reasoning.\n"
        "Reject any test case if the consequence is unclear, trivial, or not apparent from the "
        "input and response, if the scenario would not affect real user experience or community "
        "dynamics, or if understanding the case relies on abstract reasoning that is not visible "
        "in the example itself.\n"
        "Output Format:\n"
        "Return a JSON object with the following two properties:\n"
        "• label: A boolean value—true if the provided test case clearly demonstrates "
        "the consequence; false if it does not, or if it is rejected.\n"
        "• label_explanation: a brief, 1 to 2 sentence explanation supporting your "
        "decision.\n"
        + JSON_SAFETY_FOOTER
    ),
}

SELECTOR_SYSTEM = (
    "You are a helpful assistant tasked with selecting a small set of test cases that will be "
    "most useful for prompt designers to refine the prompt and behavior of a language "
    "model-based bot deployed within an online community. The prompt defines:\n"
    + _PROMPT_DEFINES
    + BOT_CAPABILITY_MARKER + "\n"
    "You will be provided with a list of test cases for the bot. Further details about the "
    "contents of each test case are explained below.\n"
    "Your Task:\n"
    "Select the 5 most provocative test cases that highlight potential issues in the associated "
    "prompt, which might lead prompt designers or community moderators to reconsider how the "
    "prompt could be revised and improved to avoid such issues.\n"
    "Follow these steps to make your selection:\n"
    "Step 1. Carefully review each test case, paying close attention to the specific type of "
    "issue the case is designed to highlight.\n"
    "Each test case includes a user message, the channel where the message was sent, any "
    "specific task triggered for the bot by the message, and the corresponding bot response. In "
    "some cases, the user message may not trigger any task, or the bot may choose not to take "
    "any action even when a task is triggered.\n"
    "In addition to these details, each test case also includes the bot's prompt that the case "
    "is designed to evaluate, as well as one of the following three types of prompt issues it is "
    "intended to reveal:\n"
    "• Underspecified Prompt: The prompt uses vague or open-ended language, which can lead "
    "to multiple valid interpretations. This ambiguity results in differing expectations about "
    "how the bot should respond.\n"
    "• Overspecified Prompt: The prompt is overly rigid or too narrowly defined, "
    "potentially excluding reasonable cases that the bot should be able to handle.\n"
    "• Unintended Consequences of the Prompt: The prompt may inadvertently cause negative "
    "effects at the community level, such as discouraging participation, undermining commitment, "
    "alienating users, or confusing newcomers.\n"
    "When considering a test case, make sure it is clearly aligned with the specific type of "
    "issue in the prompt that it is intended to reveal.\n"
    "Step 2. When making your selection, prioritize the most thought-provoking cases.\n"
    "A case is considered provocative if it clearly highlights the identified issue with the "
    "prompt and inspires deeper reflection on how the prompt could be improved. Such cases "
    "should encourage thoughtful community moderators or prompt designers to pause, reflect, "
    "initiate discussions, and ultimately revise the prompt in light of the issues uncovered. In "
    "addition to revealing the main problem, provocative cases may also challenge existing "
    "assumptions about the prompt's design, highlight unexpected interactions between the user "
    "and the bot, or spark debate among community members about the appropriateness of the "
    "bot's response. When assessing a case, focus on how thought-provoking it is for prompt "
    "revision—rather than on whether the bot’s response is correct, ideal, or even "
    "present. In fact, the most provocative cases sometimes expose significant weaknesses in the "
    "prompt, even when the bot's reply is minimal or absent.\n"
    "Step 3. Select a set of test cases that together provide a comprehensive view of the "
    "prompt's issues.\n"
    "The complete set of test cases you choose should aim to capture a wide range of issues that "
    "might provoke community moderators or prompt designers to revise the prompt. To achieve "
    "this, you should avoid redundant cases, such as those that highlight similar issues or "
    "consist of similar user messages. Increasing the diversity and minimizing the redundancy of "
    "test cases is crucial. However, it is not necessary to ensure an even balance across all "
    "types of issues; if a particular issue is especially significant for the prompt, it is "
    "acceptable to include more test cases addressing that specific problem.\n"
    "Ultimately, the purpose of the test cases is to provide community moderators and prompt "
    "designers with the opportunity to think critically, reflect, engage in discussion, and "
    "revise the prompt to address any issues illustrated by the test cases.\n"
    "Output Format:\n"
    "Return a JSON object containing an array of 5 selected test cases. Each test case should "
    "include the following two properties:\n"
    "• caseId: The case ID for this test case.\n"
    "• selection_reason: An explanation of why this case was selected as one of the most "
    "provocative test cases."
)

BASELINE_SYSTEM = (
    "You are a helpful assistant tasked with generating test cases for prompts written for "
    "language model-based bots deployed within an online community. This prompt defines:\n"
    + _PROMPT_DEFINES
    + BOT_CAPABILITY_MARKER + "\n"
    "You will be provided with:\n"
    "• prompt: the full prompt for the bot, including both the trigger and action "
    "components.\n"
    "Your Task:\n"
    "Generate 5 test cases for this prompt. A test case is an input to the bot that adheres to "
    "the following input specification:\n"
    + INPUT_SPECIFICATION_MARKER + "\n"
    "Additionally, the test cases should be realistic and natural, mirroring the typical "
    "messages found in the following community and reflecting its unique tone:\n"
    + COMMUNITY_DESCRIPTION_MARKER + "\n"
    "Output Format:\n"
    "Return a JSON object containing an array of the generated test cases. Each case should "
    "have a unique key starting from 0 and include the following two properties.\n"
    "• reasoning: a brief explanation of the potential issue this test case could reveal in "
    "the bot's prompt.\n"
    "• case: the input test case, formatted according to the input specification.\n"
    + JSON_SAFETY_FOOTER
)


def render_input_specification(channels: Sequence[str]) -> str:
    """Splice the server's channel list into the input specification block."""
    if not channels:
        raise ValueError("input specification needs at least one channel")
    return INPUT_SPECIFICATION_TEMPLATE.replace(
        INPUT_SPECIFICATION_CHANNELS_MARKER, ", ".join(channels)
    )


def compose_system(template: str, bot_capability: str, input_specification: str | None = None,
                   community_description: str | None = None) -> str:
    """Fill a stage template's shared-block markers with the server's assets."""
    text = template.replace(BOT_CAPABILITY_MARKER, bot_capability)
    if input_specification is not None:
        text = text.replace(INPUT_SPECIFICATION_MARKER, input_specification)
    if community_description is not None:
        text = text.replace(COMMUNITY_DESCRIPTION_MARKER, community_description)
    return text


def render_routing_user(tasks: Iterable, channel: str, message: str) -> str:
    """Render the task-routing user prompt for one inbound message.

    ``tasks`` is iterated in deployment order; each entry needs ``id`` and
    ``trigger`` attributes. ``channel`` keeps its leading '#'.
    """
    lines = [f"Task ID: {task.id}\nTask Trigger: {task.trigger}" for task in tasks]
    return (
        "Here is a list of tasks:\n\n"
        + "\n".join(lines)
        + f"\n\nUser message in the {channel} channel: {message}"
    )


def render_action_user(action: str, channel: str, message: str) -> str:
    """Render the task-agent user prompt; the trailing period is part of the template."""
    return f"Action: {action}.\nUser message in the {channel} channel: {message}"


def render_prompt_under_test(trigger: str, action: str, header: str = "Prompt:") -> str:
    return (
        f"{header}\n"
        f"• Trigger: {trigger}\n"
        f"• Action: {action}"
    )


def render_detector_user(trigger: str, action: str) -> str:
    return render_prompt_under_test(trigger, action)


def render_generator_user(kind: str, trigger: str, action: str, finding_fields: dict) -> str:
    """Render a generator user prompt from the detector's finding for that kind."""
    head = render_prompt_under_test(trigger, action, header="prompt:")
    if kind == AMBIGUITY:
        tail = (
            f"underspecified_phrase: {finding_fields['underspecified_phrase']}\n"
            f"description: {finding_fields['description']}"
        )
    elif kind == NARROWNESS:
        tail = (
            f"overspecified_phrase: {finding_fields['overspecified_phrase']}\n"
            f"broader_goal: {finding_fields['broader_goal']}\n"
            f"uncovered_scenarios: {finding_fields['uncovered_scenarios']}"
        )
    elif kind == CONSEQUENCE:
        tail = (
            f"problematic_phrase: {finding_fields['problematic_phrase']}\n"
            f"consequence: {finding_fields['consequence']}"
        )
    else:
        raise ValueError(f"unknown pipeline kind: {kind!r}")
    return f"{head}\n{tail}"


def _case_block(kind: str, channel: str, message: str, triggered: str | None,
                response: str | None) -> str:
    # The narrowness and consequence templates label the line "trigger task".
    task_label = "triggered task" if kind == AMBIGUITY else "trigger task"
    return (
        "case:\n"
        f"• channel: {channel}\n"
        f"• user message: {message}\n"
        f"• {task_label}: {triggered if triggered is not None else NO_VALUE}\n"
        f"• bot response: {response if response is not None else NO_VALUE}"
    )


def render_evaluator_user(kind: str, trigger: str, action: str, finding_fields: dict,
                          candidate_fields: dict, channel: str, message: str,
                          triggered: str | None, response: str | None) -> str:
    """Render an evaluator user prompt from the finding, the generated case, and its run."""
    head = render_prompt_under_test(trigger, action, header="prompt:")
    if kind == AMBIGUITY:
        mid = (
            f"underspecified_phrase: {finding_fields['underspecified_phrase']}\n"
            f"interpretation: {candidate_fields['interpretation']}\n"
            f"reasoning: {candidate_fields['reasoning']}"
        )
    elif kind == NARROWNESS:
        mid = (
            f"overspecified_phrase: {finding_fields['overspecified_phrase']}\n"
            f"broader_goal: {finding_fields['broader_goal']}\n"
            f"uncovered_scenario: {candidate_fields['uncovered_scenario']}\n"
            f"reasoning: {candidate_fields['reasoning']}"
        )
    elif kind == CONSEQUENCE:
        mid = (
            f"problematic_phrase: {finding_fields['problematic_phrase']}\n"
            f"consequence: {finding_fields['consequence']}\n"
            f"reasoning: {candidate_fields['reasoning']}"
        )
    else:
        raise ValueError(f"unknown pipeline kind: {kind!r}")
    return f"{head}\n{mid}\n{_case_block(kind, channel, message, triggered, response)}"


def render_selector_case(case_id: int, channel: str, message: str, triggered: str | None,
                         response: str | None, trigger: str, action: str, kind: str) -> str:
    return (
        f"Case ID: {case_id}\n"
        f"Channel: {channel}\n"
        f"User Message: {message}\n"
        f"Triggered Task: {triggered if triggered is not None else NO_VALUE}\n"
        f"Bot Response: {response if response is not None else NO_VALUE}\n"
        "Prompt Under Test:\n"
        f"• Trigger: {trigger}\n"
        f"• Action: {action}\n"
        f"Identified Issue: {PROMPT_ISSUE_LABELS[kind]}"
    )


def render_selector_user(case_blocks: Sequence[str]) -> str:
    return "\n---\n".join(case_blocks)


def render_baseline_user(trigger: str, action: str) -> str:
    return render_prompt_under_test(trigger, action)
