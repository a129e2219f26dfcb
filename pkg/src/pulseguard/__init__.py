"""pulseguard: desk-scale maternal blood-pressure monitoring platform.

Simulated sensor bracelet, encrypted telemetry link, a gateway that turns
pressure waveforms into blood-pressure readings, and a server that stores
readings, raises persistent-hypertension alerts and scores risk.
"""

__version__ = "0.1.0"
