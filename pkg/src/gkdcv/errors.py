"""Exception hierarchy.

Every error carries a short ``category`` string; the CLI prints it as the
first token of its one-line failure message.
"""


class GkdcvError(Exception):
    category = "error"


class ImageError(GkdcvError):
    category = "image"


class ManifestError(GkdcvError):
    category = "manifest"


class ConfigError(GkdcvError):
    category = "config"


class FitError(GkdcvError):
    category = "fit"


class DimensionError(GkdcvError, ValueError):
    category = "dimension"


class FormatError(GkdcvError):
    category = "format"


class EvaluationError(GkdcvError):
    category = "eval"
