"""Exceptions raised by rfclt

Every class derives from the builtin a caller would naturally catch,
so `except ValueError` keeps working for all input problems.
"""


class DimensionError(ValueError):
    """Empty window, unsupported lattice dimension or mismatched dimensions"""


class LatticeRangeError(IndexError):
    """Index outside a window, or lo not componentwise <= hi"""


class PadError(ValueError):
    """Innovation pad does not cover the coefficient support"""


class ModelValidationError(ValueError):
    """Model coefficients or descriptor violate the model definition"""


class UnsupportedStructureError(ValueError):
    """Requested combination of model / innovation structure is not supported"""


class ParameterError(ValueError):
    """Invalid experiment or series parameter"""


class EnumerationSizeError(ValueError):
    """Exact enumeration would exceed the site cap"""

    def __init__(self, sites: int, cap: int) -> None:
        super().__init__(
            "Enumeration needs {} innovation sites (cap is {})".format(sites, cap)
        )
        self.sites = sites
        self.cap = cap


class NumericConsistencyError(ArithmeticError):
    """A quantity that is nonnegative in exact arithmetic came out negative"""


class ConfigError(ValueError):
    """Experiment configuration could not be parsed or validated"""
