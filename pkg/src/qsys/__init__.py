"""Q-systems: exact rational matrix one-forms, their transformations, and
numerical tools for zero counting of their solutions."""

from .algebra import LatticePolynomial, MatrixOneForm, RationalFunction, normalize, size
from .qsystem import QSystem, check_integrability, singular_fiber

__all__ = [
    "LatticePolynomial",
    "MatrixOneForm",
    "QSystem",
    "RationalFunction",
    "check_integrability",
    "normalize",
    "singular_fiber",
    "size",
]
__version__ = "0.1.0"
