"""Energy-use prediction for mixed transit fleets from telemetry and map context."""
from .geo import GeoPoint

__version__ = "0.1.0"
__all__ = ["GeoPoint"]
