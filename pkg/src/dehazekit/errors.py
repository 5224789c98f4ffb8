"""Shared exception types."""


class DehazekitError(Exception):
    """Base class for all errors raised by this package."""


class ImageError(DehazekitError):
    """Invalid image data or unusable image file."""


class PngFormatError(ImageError):
    """File is missing, not a PNG, or uses an unsupported color type."""


class RestorerError(DehazekitError):
    """A restorer failed or violated its dimension-preserving contract."""


class FusionError(DehazekitError):
    """Snapshot fusion received inconsistent images or weights."""


class TilingError(DehazekitError):
    """Invalid tile configuration or a restorer broke tile dimensions."""


class CurationError(DehazekitError):
    """Malformed embedding data or invalid selection configuration."""


class MetricError(DehazekitError):
    """Metric inputs are incompatible (dimensions, channels, window size)."""


class ManifestError(DehazekitError):
    """Dataset root is missing or yields no usable pairs."""


class ConfigError(DehazekitError):
    """Pipeline config file is malformed; message carries the field path."""
