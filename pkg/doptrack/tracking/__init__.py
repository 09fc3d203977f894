from .interpolate import interpolate_misses
from .kalman import KalmanConfig, smooth
from .tracks import DopplerTrackSet, build_track_set, tracks_from_measurements

__all__ = [
    "KalmanConfig",
    "DopplerTrackSet",
    "interpolate_misses",
    "smooth",
    "build_track_set",
    "tracks_from_measurements",
]
