"""Domain types and exact combinatorial primitives shared across the package.

An instance is a genus ``g``, a twist ``ell`` and either explicit ramification
profiles or the distinguished all-simple marker.  Everything here is immutable
and uses Python integers only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


class DomainError(ValueError):
    """Input outside the domain where a quantity is defined."""


class InternalFault(RuntimeError):
    """A result that should be impossible on valid input (an implementation bug)."""


def binomial(a: int, b: int) -> int:
    """Binomial coefficient, zero-extended: 0 when b < 0, b > a or a < 0."""
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


@dataclass(frozen=True)
class Profile:
    """Ramification profile over one marked point of the target."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts:
            raise DomainError("a profile needs at least one part")
        if any(p < 1 for p in parts):
            raise DomainError(f"profile parts must be positive, got {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def magnitude(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def text(self) -> str:
        return ",".join(str(p) for p in self.parts)


SIMPLE = Profile((1,))


def parse_profiles(text: str) -> tuple[Profile, ...]:
    """Parse ``"1,1;1;1;1"`` into profiles.  Whitespace is ignored."""
    cleaned = "".join(text.split())
    if not cleaned:
        raise DomainError("empty profile string")
    out = []
    for chunk in cleaned.split(";"):
        if not chunk:
            raise DomainError(f"empty profile in {text!r}")
        try:
            parts = tuple(int(p) for p in chunk.split(","))
        except ValueError as exc:
            raise DomainError(f"cannot parse profile {chunk!r}") from exc
        out.append(Profile(parts))
    return tuple(out)


def format_profiles(profiles: Iterable[Profile]) -> str:
    return ";".join(p.text() for p in profiles)


def sort_profiles(profiles: Sequence[Profile]) -> tuple[tuple[Profile, ...], bool]:
    """Stable sort by magnitude, descending.  Returns (sorted, changed)."""
    ordered = tuple(sorted(profiles, key=lambda p: -p.magnitude))
    return ordered, ordered != tuple(profiles)


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(self.violations)


@dataclass(frozen=True)
class Params:
    """A problem instance.

    ``profiles=None`` is the all-simple case: n = g+3+2*ell profiles, each (1).
    Explicit profiles must already be sorted by magnitude, largest first.
    """

    g: int
    ell: int
    profiles: Optional[tuple[Profile, ...]] = None

    def __post_init__(self):
        if self.profiles is not None:
            profs = tuple(p if isinstance(p, Profile) else Profile(tuple(p)) for p in self.profiles)
            _, changed = sort_profiles(profs)
            if changed:
                raise DomainError(
                    "profiles must be listed by magnitude, largest first: "
                    + format_profiles(profs)
                )
            object.__setattr__(self, "profiles", profs)

    @classmethod
    def all_simple(cls, g: int, ell: int) -> "Params":
        return cls(g, ell, None)

    @classmethod
    def from_text(cls, g: int, ell: int, mu: Optional[str]) -> "Params":
        if mu is None:
            return cls.all_simple(g, ell)
        return cls(g, ell, parse_profiles(mu))

    @property
    def is_all_simple(self) -> bool:
        return self.profiles is None

    @property
    def d(self) -> int:
        return self.g + 1 + self.ell

    @property
    def n(self) -> int:
        """Number of marked points on the source."""
        if self.profiles is None:
            return self.g + 3 + 2 * self.ell
        return sum(p.length for p in self.profiles)

    @property
    def n_simple(self) -> int:
        """Number of marks in the all-simple instance with the same (g, ell)."""
        return self.g + 3 + 2 * self.ell

    @property
    def k(self) -> int:
        if self.profiles is None:
            return self.n
        return len(self.profiles)

    def magnitudes(self) -> tuple[int, ...]:
        if self.profiles is None:
            return (1,) * max(self.n, 0)
        return tuple(p.magnitude for p in self.profiles)

    def expanded(self) -> "Params":
        """The same instance with every profile spelled out explicitly."""
        if self.profiles is not None:
            return self
        return Params(self.g, self.ell, (SIMPLE,) * max(self.n, 0))

    def mu_text(self) -> Optional[str]:
        if self.profiles is None:
            return None
        return format_profiles(self.profiles)


def validate(params: Params) -> ValidityReport:
    """Check every instance constraint; violations are returned, not raised."""
    bad = []
    g, ell = params.g, params.ell
    if g < 0:
        bad.append(f"genus: g={g} is negative")
    d = params.d
    if d < 1:
        bad.append(f"degree: d=g+1+ell={d} < 1")
    if params.n < 3:
        bad.append(f"marked points: n={params.n} < 3")
    if params.profiles is None:
        if ell < 0 and g < -2 * ell:
            bad.append(f"marked points: g={g} < -2*ell={-2 * ell}")
    else:
        mags = params.magnitudes()
        if len(mags) < 3:
            bad.append(f"profile count: k={len(mags)} < 3")
        target = g + 3 + 2 * ell
        if sum(mags) != target:
            bad.append(f"magnitude sum: sum |mu_h| = {sum(mags)} != g+3+2*ell = {target}")
        over = [h + 1 for h, m in enumerate(mags) if m > d]
        if over:
            bad.append(f"magnitude bound: |mu_h| > d={d} for h in {over}")
        if any(mags[h] < mags[h + 1] for h in range(len(mags) - 1)):
            bad.append("ordering: magnitudes must be non-increasing")
    return ValidityReport(tuple(bad))


def require_valid(params: Params) -> None:
    report = validate(params)
    if not report.ok:
        raise DomainError(str(report))
