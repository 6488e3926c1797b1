"""Object tracking with a cost-sensitively weighted online-sequential ELM."""

from .geometry import BBox, RingSpec, iou
from .tracker import TrackerConfig, TrackerState, TrackingError, init, step, track_sequence

__version__ = "0.1.0"

__all__ = ["BBox", "RingSpec", "iou", "TrackerConfig", "TrackerState", "TrackingError",
           "init", "step", "track_sequence"]
