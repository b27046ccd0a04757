"""Exception types raised across the package."""


class OAIndexError(ValueError):
    """Base class for all errors raised by oaindex."""


class SchemeError(OAIndexError):
    """Invalid subject scheme or zone registry, or lookup of an unknown code."""


class IncompatibleTablesError(OAIndexError):
    pass


class IndicatorError(OAIndexError):
    """An indicator is undefined for the requested zone, SC or discipline."""


class ClassificationError(OAIndexError):
    pass


class ExportError(OAIndexError):
    pass


class ConfigError(OAIndexError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))
