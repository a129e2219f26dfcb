"""Simulated bracelet: scheduling, synthesis, battery, transmission."""

from pulseguard.device.sim import (
    BatteryAction,
    DeviceConfig,
    DeviceState,
    battery_drain,
    in_resting_window,
    schedule_next,
    step,
)

__all__ = [
    "BatteryAction",
    "DeviceConfig",
    "DeviceState",
    "battery_drain",
    "in_resting_window",
    "schedule_next",
    "step",
]
