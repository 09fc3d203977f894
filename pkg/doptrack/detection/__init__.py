from .clutter import CancellerConfig, cancel
from .caf import CafConfig, CafMap, caf_window, caf_maps
from .cfar import Detection, cfar_threshold, detect

__all__ = [
    "CancellerConfig",
    "CafConfig",
    "CafMap",
    "Detection",
    "cancel",
    "caf_window",
    "caf_maps",
    "cfar_threshold",
    "detect",
]
