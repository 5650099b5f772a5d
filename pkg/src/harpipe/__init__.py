"""Edge-style streaming pipeline for skeleton-based human action recognition."""

from .camera import CameraIntrinsics, DepthImage, Point3D, backproject, project, sample_depth
from .classifier import (ClassifierGateway, MockClassifier, RemoteClassifier,
                         WindowTensor, resize_crop)
from .skeleton import (BoundingBox, ReducedSkeleton2D, Skeleton3D, lift_to_3d,
                       simplify, user_bbox)
from .tracking import (IdentityEvent, TrackerConfig, TrackState, TrackStatus,
                       skeleton_distance, tick_track, track_step)
from .windowing import (WindowConfig, WindowScheduler, fuse, sample_frames,
                        sample_stride, windows_for_period)

__version__ = "0.1.0"
