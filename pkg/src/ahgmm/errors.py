"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class AhgmmError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ImageIOError(AhgmmError, OSError):
    exit_code = 2


class ImageFormatError(AhgmmError, ValueError):
    exit_code = 2


class BoundsError(AhgmmError, ValueError):
    exit_code = 3


class GeometryError(AhgmmError, ValueError):
    exit_code = 3


class KernelTooLargeError(AhgmmError, ValueError):
    exit_code = 3


class ConfigError(AhgmmError, ValueError):
    exit_code = 4
