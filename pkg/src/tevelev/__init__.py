"""Tropical Tevelev degrees: closed forms, solution grids and explicit covers."""
from __future__ import annotations

__version__ = "0.1.0"

from .core import DomainError, InternalFault, Params, Profile, ValidityReport, validate  # noqa: E402
from .formulas import DegreeValue, Provenance, tev_classical, tev_ell, tev_general  # noqa: E402

__all__ = [
    "DegreeValue",
    "DomainError",
    "InternalFault",
    "Params",
    "Profile",
    "Provenance",
    "ValidityReport",
    "__version__",
    "tev_classical",
    "tev_ell",
    "tev_general",
    "validate",
]
