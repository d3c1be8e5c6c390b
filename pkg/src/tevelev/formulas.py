"""Closed-form tropical Tevelev degrees."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .core import DomainError, InternalFault, Params, binomial, require_valid


class Provenance(str, enum.Enum):
    CLASSICAL = "classical"          # ell = 0, all simple: 2^g
    POSITIVE_TWIST = "ell-positive"  # ell > 0, all simple, g >= 1
    NEGATIVE_TWIST = "ell-negative"  # ell < 0, all simple
    GENERAL = "general"              # explicit ramification profiles
    EXTRAPOLATED = "extrapolated"    # ell > 0 with g = 0, outside the proven range


@dataclass(frozen=True)
class DegreeValue:
    value: int
    provenance: Provenance

    def __str__(self) -> str:
        return str(self.value)


def _checked(value: int, g: int, provenance: Provenance) -> DegreeValue:
    if value < 0:
        raise InternalFault(f"negative degree {value} (g={g})")
    if value > 2 ** g:
        raise InternalFault(f"degree {value} exceeds 2^g={2 ** g}")
    return DegreeValue(value, provenance)


def tev_classical(g: int) -> DegreeValue:
    if g < 0:
        raise DomainError(f"g={g} < 0")
    return DegreeValue(2 ** g, Provenance.CLASSICAL)


def negative_twist_deficit(g: int, ell: int) -> int:
    """Rows lost for ell < 0: sum over i < -ell of (g-2i+1)(C(g,i) - C(g,i-1))."""
    return sum(
        (g - 2 * i + 1) * (binomial(g, i) - binomial(g, i - 1))
        for i in range(0, -ell)
    )


def tev_ell(g: int, ell: int) -> DegreeValue:
    if g < 0:
        raise DomainError(f"g={g} < 0")
    if ell < 0 and g < -2 * ell:
        raise DomainError(f"ell={ell} needs g >= {-2 * ell}, got g={g}")
    if ell == 0:
        return tev_classical(g)
    if ell > 0:
        prov = Provenance.EXTRAPOLATED if g == 0 else Provenance.POSITIVE_TWIST
        return DegreeValue(2 ** g, prov)
    return _checked(2 ** g - negative_twist_deficit(g, ell), g, Provenance.NEGATIVE_TWIST)


def _outer_loss(g: int, ell: int, mag: int) -> int:
    # sum_{i=-ell}^{mag-ell-2} C(g, i)
    return sum(binomial(g, i) for i in range(-ell, mag - ell - 1))


def _middle_loss(g: int, ell: int, mag: int) -> int:
    return sum(
        (mag - i - ell - 1) * (binomial(g, i) - binomial(g, i - 1))
        for i in range(-ell, mag - ell - 1)
    )


def tev_general(params: Params) -> DegreeValue:
    """Generalized degree; reads the profiles only through their magnitudes."""
    require_valid(params)
    g, ell = params.g, params.ell
    mags = params.magnitudes()
    first, last = mags[0], mags[-1]
    total = 2 ** g
    if ell < 0:
        total -= negative_twist_deficit(g, ell)
    total -= _outer_loss(g, ell, first)
    total -= _outer_loss(g, ell, last)
    total += (first + last - 2) * binomial(g, -ell - 1)
    total -= sum(_middle_loss(g, ell, m) for m in mags[1:-1])
    prov = Provenance.EXTRAPOLATED if (ell > 0 and g == 0) else Provenance.GENERAL
    return _checked(total, g, prov)
