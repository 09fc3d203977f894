import numpy as np

from doptrack.errors import InsufficientDetectionsError


def interpolate_misses(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """
    Fill missed detections of one receiver's track.

    Misses between two detections are interpolated linearly in ``k``; leading
    and trailing misses take the nearest detection's value.

    Examples
    --------
    >>> interpolate_misses(np.array([10.0, 0.0, 14.0]), np.array([True, False, True]))
    array([10., 12., 14.])
    """
    values = np.asarray(values, dtype=float)
    valid = np.asarray(valid, dtype=bool)
    if valid.sum() < 2:
        raise InsufficientDetectionsError(
            f"need at least two detections to interpolate, got {int(valid.sum())}"
        )
    k = np.arange(len(values))
    return np.interp(k, k[valid], values[valid])
