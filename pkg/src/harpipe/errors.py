"""Exception hierarchy and CLI exit codes."""


class HarpipeError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(HarpipeError):
    """Invalid configuration (bad parameters, missing files referenced by config)."""


class StreamError(HarpipeError):
    """Recorded stream is missing, incomplete, or corrupt."""


class ClassifierError(HarpipeError):
    """Classifier backend unreachable or misbehaving at startup."""


class ProtocolError(ClassifierError):
    """Malformed message on the classifier wire protocol."""


class WindowFailure(HarpipeError):
    """A single window could not be classified; the scheduler skips its contribution."""


class InvalidDepthError(HarpipeError):
    """Non-positive depth passed to back-projection."""


class BoundsError(HarpipeError):
    """Pixel coordinates outside the image."""


class BehindCameraError(HarpipeError):
    """Projection requested for a point with z <= 0."""


class DegenerateSkeletonError(HarpipeError):
    """Too few usable keypoints to build a bounding box."""


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STREAM = 3
EXIT_CLASSIFIER = 4


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ProtocolError, ClassifierError)):
        return EXIT_CLASSIFIER
    if isinstance(exc, StreamError):
        return EXIT_STREAM
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    return 1
