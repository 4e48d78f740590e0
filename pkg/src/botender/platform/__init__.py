"""Chat-platform boundary: events, actions, registry, and the simulator."""

from botender.platform.models import (
    CREATE_CHANNEL,
    CREATE_THREAD,
    POST_MESSAGE,
    PlatformAction,
    PlatformEvent,
)
from botender.platform.registry import TaskSetRegistry
from botender.platform.scenario import Scenario, run_scenario
from botender.platform.simulator import BOT_CHANNEL, SimulatedPlatform, SimulatedServer

__all__ = [
    "BOT_CHANNEL",
    "CREATE_CHANNEL",
    "CREATE_THREAD",
    "POST_MESSAGE",
    "PlatformAction",
    "PlatformEvent",
    "Scenario",
    "SimulatedPlatform",
    "SimulatedServer",
    "TaskSetRegistry",
    "run_scenario",
]
