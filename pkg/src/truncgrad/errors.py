"""Exception types shared across the package.

``TruncgradError`` subclasses signal numerical-precondition failures and map
to CLI exit code 1; plain ``ValueError`` (including ``ShapeMismatch`` and
``CmxFormatError``) and I/O errors map to exit code 2.
"""


class TruncgradError(Exception):
    """Base class for numerical failures with a defined error contract."""


class ShapeMismatch(ValueError):
    """Operands have incompatible dimensions."""


class CmxFormatError(ValueError):
    """Malformed cmx document (header, count, scalar syntax, or finiteness)."""


class DegenerateCut(TruncgradError):
    """The truncation boundary splits a (numerically) degenerate pair."""


class DegenerateSpectrum(TruncgradError):
    """A spectral gap needed by a tangent formula is below tolerance."""


class NoConvergence(TruncgradError):
    """An iterative routine hit its iteration cap before its tolerance."""


class NearSingularShift(TruncgradError):
    """A shifted linear system is singular on its deflated subspace."""


class ZeroPivot(TruncgradError):
    """The eigenvector gauge pivot entry vanishes."""


class NonDiagonalizable(TruncgradError):
    """The matrix has no eigenbasis of acceptable condition number."""
