"""Exception hierarchy shared by the pipeline and the CLI.

``main.py`` maps these onto exit codes: ``CapsExceededError`` exits with 2,
every other ``SapersError`` with 1.
"""


class SapersError(Exception):
    """Base class for every error the library raises on purpose."""

    kind = "error"


class InputError(SapersError):
    """Malformed manifest, points file, module file or polynomial."""

    kind = "input"


class CapsExceededError(SapersError):
    """A desk-scale cap (fiber dimension, parameters, degree, search size) was exceeded."""

    kind = "caps"


class WellBasedError(SapersError):
    """No coordinate shear produced a well-based decomposition."""

    kind = "well_based"

    def __init__(self, message, shear=None):
        super().__init__(message)
        self.shear = shear


class IndeterminateError(SapersError):
    """An equivalence search ended without a verdict and a boolean was requested."""

    kind = "indeterminate"
