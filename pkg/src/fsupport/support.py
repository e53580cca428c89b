"""Supports of ``H^k_I(R/(f1, f2))`` assembled from the three surviving pieces.

Total degree ``k + 2`` of the Koszul-Čech double complex carries
``H^k_I(R/(f))``; its filtration has quotients ``E^{0,k+2}``,
``E^{1,k+1}`` and ``E^{2,k}`` at infinity, so the support is their union.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .cech import CechContext, supp_E0, supp_E1, supp_E2
from .chains import ChainConfig
from .errors import NotRegularSequence, ValidationError
from .fmodule import Provenance, SupportIdeal, empty_support, union_supports
from .fmodule import same_support as _same_ideal_support
from .groebner import Submodule, colon_by_element, ideal
from .ring import Polynomial, RingSpec

__all__ = [
    "ProblemSpec",
    "DegreeResult",
    "SupportResult",
    "supp_lc_ci",
    "compute_supports",
    "union_supports",
    "same_support",
    "is_regular_pair",
    "support_of",
]

PIECES = ("E0", "E1", "E2")


def is_regular_pair(f1: Polynomial, f2: Polynomial) -> bool:
    """f1 nonzero, f2 a nonzerodivisor mod f1, and (f1, f2) proper."""
    if not f1:
        return False
    ring = f1.ring
    base = ideal(ring, [f1])
    if not colon_by_element(base, f2).same(base):
        return False
    return not ideal(ring, [f1, f2]).is_whole()


@dataclass(frozen=True)
class ProblemSpec:
    ring: RingSpec
    g: tuple[Polynomial, ...]
    f: tuple[Polynomial, Polynomial]
    degrees: tuple[int, ...] | None = None  # None means 0..t
    cfg: ChainConfig = field(default_factory=ChainConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "g", tuple(self.g))
        object.__setattr__(self, "f", tuple(self.f))
        if not self.g:
            raise ValidationError("I needs at least one generator")
        if len(self.f) != 2:
            raise ValidationError("f must have exactly two elements")
        for p in self.g + self.f:
            if p.ring != self.ring:
                raise ValidationError("all polynomials must live in the problem ring")
        if any(not p for p in self.g):
            raise ValidationError("generators of I must be nonzero")
        if not is_regular_pair(*self.f):
            raise NotRegularSequence("f is not a regular sequence")

    @property
    def t(self) -> int:
        return len(self.g)

    def requested_degrees(self) -> tuple[int, ...]:
        return tuple(range(self.t + 1)) if self.degrees is None else self.degrees


@dataclass(frozen=True)
class DegreeResult:
    k: int
    support: SupportIdeal
    pieces: dict[str, SupportIdeal]
    wall_ms: float
    note: str = ""

    @property
    def certified(self) -> bool:
        return self.support.certified

    @property
    def empty(self) -> bool:
        return self.support.is_empty()


@dataclass(frozen=True)
class SupportResult:
    spec: ProblemSpec
    degrees: tuple[DegreeResult, ...]

    def by_degree(self, k: int) -> DegreeResult:
        for d in self.degrees:
            if d.k == k:
                return d
        raise KeyError(k)


def _disjoint(spec: ProblemSpec) -> bool:
    return ideal(spec.ring, list(spec.g) + list(spec.f)).is_whole()


def supp_lc_ci(spec: ProblemSpec, k: int, ctx: CechContext | None = None) -> DegreeResult:
    """Support of ``H^k_I(R/(f1, f2))`` with its per-piece breakdown."""
    start = time.perf_counter()
    ring = spec.ring
    if not 0 <= k <= spec.t:
        sup = empty_support(ring, "degree outside 0..t")
        return DegreeResult(k, sup, {}, (time.perf_counter() - start) * 1000, "degree outside 0..t")
    f1, f2 = spec.f
    if _disjoint(spec):
        # every H^k_I(M) lives on V(I) and Supp M; here those never meet
        note = "V(I) and V(f1, f2) are disjoint"
        pieces = {n: empty_support(ring, note) for n in PIECES}
        return DegreeResult(k, empty_support(ring, note), pieces, (time.perf_counter() - start) * 1000, note)
    ctx = ctx or CechContext(spec.g, spec.cfg)
    pieces = {
        "E0": supp_E0(spec.g, f1, f2, k + 2, ctx=ctx),
        "E1": supp_E1(spec.g, f1, f2, k + 1, ctx=ctx),
        "E2": supp_E2(spec.g, f1, f2, k + 1, ctx=ctx),
    }
    sup = union_supports([pieces[n] for n in PIECES], formula=f"union of E0({k + 2}), E1({k + 1}), E2({k})")
    return DegreeResult(k, sup, pieces, (time.perf_counter() - start) * 1000)


def compute_supports(spec: ProblemSpec) -> SupportResult:
    ctx = CechContext(spec.g, spec.cfg)
    return SupportResult(spec, tuple(supp_lc_ci(spec, k, ctx) for k in spec.requested_degrees()))


def same_support(j1: SupportIdeal | Submodule, j2: SupportIdeal | Submodule) -> bool:
    """Equal vanishing loci, decided by radical membership both ways."""
    a = j1.ideal if isinstance(j1, SupportIdeal) else j1
    b = j2.ideal if isinstance(j2, SupportIdeal) else j2
    return _same_ideal_support(a, b)


def support_of(ring: RingSpec, gens: Sequence[Polynomial | str]) -> SupportIdeal:
    """Wrap a literal ideal as a support, for comparisons."""
    return SupportIdeal(ideal(ring, gens), Provenance("given"))
