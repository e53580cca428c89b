"""F-finite F-modules presented by roots, and supports of their Koszul cohomology.

A root is a pair ``(A, U)``: the layer ``L = coker A`` inside ``R^a`` and a
structure map ``U: coker A -> coker A^{[p]}``.  Level ``e`` of the module is
``L_e = coker A^{[p^e]}`` and the transition ``L_e -> L_{e'}`` is the
composite ``U^{[p^{e'-1}]} ... U^{[p^e]}``.  Everything below works with
lifts to free modules, so each layer object is a submodule of ``R^a``
containing ``im A^{[p^e]}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .chains import ChainConfig, ChainLog, ChainRecord, stabilize
from .errors import ChainViolation, DimensionError, FSupportError, ValidationError
from .groebner import (
    Submodule,
    Subquotient,
    ann_subquotient,
    colon_by_element,
    groebner_basis,
    intersect,
    membership,
    preimage,
    radical_membership,
    submodule_sum,
)
from .ring import PolyMatrix, Polynomial, RingSpec, bracket_power, frobenius_power

__all__ = [
    "FRoot",
    "RootReport",
    "Provenance",
    "SupportIdeal",
    "validate_root",
    "stable_kernel",
    "supp_koszul_h0",
    "supp_koszul_top",
    "torsion_part_root",
    "supp_koszul_h1_pair",
    "same_support",
    "union_supports",
    "empty_support",
]


class FRoot:
    """Root ``(A, U)`` of an F-finite F-module.

    ``A`` is a×b and ``U`` is a×a.  Rank zero (a = 0) is the zero module.
    Bracket powers of ``A`` and transition composites are memoized on the
    instance.
    """

    __slots__ = ("ring", "A", "U", "_images", "_phis")

    def __init__(self, A: PolyMatrix, U: PolyMatrix, ring: RingSpec | None = None):
        ring = ring or A.ring
        if A.ring != ring or U.ring != ring:
            raise ValidationError("root matrices must share the ring")
        if U.nrows != A.nrows or U.ncols != A.nrows:
            raise DimensionError(f"U must be {A.nrows}x{A.nrows}, got {U.nrows}x{U.ncols}")
        self.ring = ring
        self.A = A
        self.U = U
        self._images: dict[int, Submodule] = {}
        self._phis: dict[tuple[int, int], PolyMatrix] = {}

    @classmethod
    def zero(cls, ring: RingSpec) -> FRoot:
        return cls(PolyMatrix.zeros(ring, 0, 0), PolyMatrix.zeros(ring, 0, 0), ring)

    @classmethod
    def free(cls, ring: RingSpec, rank: int = 1) -> FRoot:
        return cls(PolyMatrix.zeros(ring, rank, 0), PolyMatrix.identity(ring, rank), ring)

    @classmethod
    def parse(cls, ring: RingSpec, A: Sequence[Sequence[str]], U: Sequence[Sequence[str]]) -> FRoot:
        a = len(U)
        amat = PolyMatrix.parse(ring, A) if A and A[0] else PolyMatrix.zeros(ring, a, 0)
        return cls(amat, PolyMatrix.parse(ring, U), ring)

    @property
    def a(self) -> int:
        return self.A.nrows

    @property
    def b(self) -> int:
        return self.A.ncols

    def is_zero_rank(self) -> bool:
        return self.a == 0

    def image(self, e: int = 0) -> Submodule:
        """``im A^{[p^e]}`` inside ``R^a``."""
        if e not in self._images:
            self._images[e] = Submodule.from_matrix(bracket_power(self.A, e))
        return self._images[e]

    def phi(self, e0: int, e1: int) -> PolyMatrix:
        """Lift of the transition ``L_{e0} -> L_{e1}``."""
        if e1 < e0:
            raise ValidationError("transition goes upward only")
        key = (e0, e1)
        if key not in self._phis:
            if e1 == e0:
                m = PolyMatrix.identity(self.ring, self.a)
            else:
                m = bracket_power(self.U, e1 - 1) @ self.phi(e0, e1 - 1)
            self._phis[key] = m
        return self._phis[key]

    def __eq__(self, other) -> bool:
        return isinstance(other, FRoot) and self.A == other.A and self.U == other.U

    def __hash__(self) -> int:
        return hash((self.A, self.U))

    def __repr__(self) -> str:
        return f"FRoot(A={self.A.to_strings()}, U={self.U.to_strings()})"


class RootReport(NamedTuple):
    compatible: bool
    injective: bool


def validate_root(r: FRoot) -> RootReport:
    """Check that U descends to cokernels and that the induced map is injective."""
    if r.a == 0:
        return RootReport(True, True)
    twisted = r.image(1)
    ua = r.U @ r.A
    compatible = all(twisted.contains_vector(c) for c in ua.columns())
    pre = preimage(r.U, twisted)
    injective = r.image(0).contains(pre) and pre.contains(r.image(0))
    return RootReport(compatible, injective)


# supports


@dataclass(frozen=True)
class Provenance:
    formula: str
    chains: tuple[ChainRecord, ...] = ()
    notes: tuple[str, ...] = ()
    parts: tuple["SupportIdeal", ...] = ()

    @property
    def certified(self) -> bool:
        return all(c.certified for c in self.chains) and all(p.certified for p in self.parts)

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.chains) + sum(p.provenance.violations for p in self.parts)

    def all_chains(self) -> list[ChainRecord]:
        out = list(self.chains)
        for p in self.parts:
            out.extend(p.provenance.all_chains())
        return out

    def to_dict(self) -> dict:
        d: dict = {"formula": self.formula, "certified": self.certified}
        if self.chains:
            d["chains"] = [c.to_dict() for c in self.chains]
        if self.notes:
            d["notes"] = list(self.notes)
        if self.parts:
            d["parts"] = [p.to_dict() for p in self.parts]
        return d


@dataclass(frozen=True)
class SupportIdeal:
    """An ideal whose vanishing locus is a support set."""

    ideal: Submodule
    provenance: Provenance = field(default_factory=lambda: Provenance("given"))

    def __post_init__(self) -> None:
        if self.ideal.rank != 1:
            raise DimensionError("a support ideal must be an ideal")

    @property
    def ring(self) -> RingSpec:
        return self.ideal.ring

    @property
    def certified(self) -> bool:
        return self.provenance.certified

    def is_empty(self) -> bool:
        # sqrt(J) = R exactly when J = R
        return self.ideal.is_whole()

    def generators(self) -> list[str]:
        """Reduced Groebner basis, printed; deterministic for a given ideal."""
        return [str(g[0]) for g in groebner_basis(self.ideal).gens]

    def same_support(self, other: SupportIdeal | Submodule) -> bool:
        return same_support(self.ideal, other.ideal if isinstance(other, SupportIdeal) else other)

    def to_dict(self) -> dict:
        return {"generators": self.generators(), "empty": self.is_empty(), "provenance": self.provenance.to_dict()}


def _whole_ideal(ring: RingSpec) -> Submodule:
    return Submodule.whole(ring, 1)


def empty_support(ring: RingSpec, formula: str = "zero module", notes: Iterable[str] = ()) -> SupportIdeal:
    return SupportIdeal(_whole_ideal(ring), Provenance(formula, notes=tuple(notes)))


def same_support(j1: Submodule, j2: Submodule) -> bool:
    """V(J1) = V(J2), tested by radical membership of generators both ways."""
    if j1.ring != j2.ring:
        raise ValidationError("ideals over different rings")
    return all(radical_membership(g[0], j2) for g in j1.gens) and all(
        radical_membership(g[0], j1) for g in j2.gens
    )


def _support_leq(j_small: Submodule, j_big: Submodule) -> bool:
    """V(j_small) inside V(j_big), i.e. j_big inside sqrt(j_small)."""
    return all(radical_membership(g[0], j_small) for g in j_big.gens)


def _intersect_ideals(ideals: Sequence[Submodule], ring: RingSpec) -> Submodule:
    out = None
    for j in ideals:
        if j.is_whole():
            continue
        out = j if out is None else intersect(out, j)
    return _whole_ideal(ring) if out is None else out


def union_supports(supports: Sequence[SupportIdeal], formula: str = "union") -> SupportIdeal:
    """Support of the union: the intersection of the ideals."""
    if not supports:
        raise ValidationError("union of no supports needs a ring")
    ring = supports[0].ring
    for s in supports:
        if s.ring != ring:
            raise ValidationError("supports over different rings")
    ideal = _intersect_ideals([s.ideal for s in supports], ring)
    return SupportIdeal(ideal, Provenance(formula, parts=tuple(supports)))


def _support(q: Subquotient, formula: str, log: ChainLog | None = None, notes: Iterable[str] = ()) -> SupportIdeal:
    chains = tuple(log.records) if log is not None else ()
    return SupportIdeal(ann_subquotient(q), Provenance(formula, chains, tuple(notes)))


def _scaled_whole(ring: RingSpec, rank: int, fs: Sequence[Polynomial]) -> Submodule:
    zero = ring.zero()
    gens = []
    for f in fs:
        for i in range(rank):
            gens.append(tuple(f if j == i else zero for j in range(rank)))
    return Submodule(ring, rank, gens)


def _scaled(w: Submodule, f: Polynomial) -> Submodule:
    return Submodule(w.ring, w.rank, [tuple(f * x for x in g) for g in w.gens])


# closed-support formulas for H^0 and top Koszul cohomology


def stable_kernel(r: FRoot, cfg: ChainConfig | None = None, log: ChainLog | None = None) -> tuple[Submodule, int]:
    """First stable term of ``W_j = preimage(Phi_{0,j+1}, im A^{[p^{j+1}]})``.

    ``W_j / im A`` is the kernel of ``L -> L_{j+1}``.  The first repeat is
    final, so this chain stops certified.
    """
    cfg = cfg or ChainConfig()
    if r.a == 0:
        return Submodule.zero(r.ring, 0), 0
    res = stabilize(
        "stable_kernel",
        lambda j: preimage(r.phi(0, j + 1), r.image(j + 1)),
        cfg,
        certified=True,
        log=log,
    )
    return res.value, res.index


def supp_koszul_h0(
    r: FRoot, f: Sequence[Polynomial], cfg: ChainConfig | None = None
) -> SupportIdeal:
    """Support of ``H^0(K(f; M))``, the elements of M killed by all of f."""
    cfg = cfg or ChainConfig()
    if r.a == 0:
        return empty_support(r.ring)
    log = ChainLog()
    w, _ = stable_kernel(r, cfg, log)
    n = w
    for fi in f:
        n = intersect(n, colon_by_element(w, fi)) if n is not w else colon_by_element(w, fi)
    return _support(Subquotient(n, w), "koszul_h0", log)


def supp_koszul_top(
    r: FRoot, f: Sequence[Polynomial], cfg: ChainConfig | None = None
) -> SupportIdeal:
    """Support of ``H^c(K(f; M)) = M / (f) M`` for ``c = len(f)``."""
    cfg = cfg or ChainConfig()
    if r.a == 0:
        return empty_support(r.ring)
    log = ChainLog()
    fr = _scaled_whole(r.ring, r.a, f)
    res = stabilize(
        "koszul_top",
        lambda j: preimage(r.phi(0, j + 1), submodule_sum(fr, r.image(j + 1))),
        cfg,
        certified=False,
        log=log,
    )
    whole = Submodule.whole(r.ring, r.a)
    return _support(Subquotient(whole, res.value), "koszul_top", log)


# torsion part


def _prune(gens: Sequence[tuple], base: Submodule) -> list[tuple]:
    """Drop generators already in ``base`` plus the rest; keeps the order."""
    kept = [g for g in gens if not base.contains_vector(g)]
    i = len(kept) - 1
    while i >= 0 and len(kept) > 1:
        rest = Submodule(base.ring, base.rank, list(base.gens) + kept[:i] + kept[i + 1 :])
        if rest.contains_vector(kept[i]):
            kept.pop(i)
        i -= 1
    return kept


def restrict_root(r: FRoot, gens: Sequence[tuple], base_twisted: Submodule) -> FRoot:
    """Re-present the F-submodule of L spanned by ``gens`` as its own root.

    The new presentation is the syzygy module of ``[gens | A]`` cut to the
    ``gens`` block.  The structure map column i holds the coordinates of
    ``U gens_i`` against ``gens^{[p]}`` modulo ``base_twisted`` (the level-one
    image of the presentation).
    """
    ring = r.ring
    k = len(gens)
    if k == 0:
        return FRoot.zero(ring)
    smat = PolyMatrix.from_columns(ring, gens, r.a)
    pres = preimage(smat, r.image(0))
    amat = PolyMatrix.from_columns(ring, pres.gens, k) if pres.gens else PolyMatrix.zeros(ring, k, 0)
    twisted_gens = [tuple(frobenius_power(x, 1) for x in g) for g in gens]
    target = Submodule(ring, r.a, twisted_gens + list(base_twisted.gens))
    cols = []
    for g in gens:
        m = membership(r.U.apply(g), target)
        if not m.member:
            raise FSupportError("structure map does not preserve the submodule")
        cols.append(m.coordinates[:k])
    return FRoot(amat, PolyMatrix.from_columns(ring, cols, k), ring)


@dataclass
class _Torsion:
    root: FRoot
    saturation: Submodule  # lift of the torsion submodule of L in R^a
    gens: list[tuple]
    stop: int


def _torsion(r: FRoot, f1: Polynomial, f2: Polynomial, cfg: ChainConfig, log: ChainLog | None) -> _Torsion:
    base = r.image(0)
    sats: dict[int, Submodule] = {0: base}

    def step(j: int) -> Submodule:
        if j not in sats:
            prev = step(j - 1)
            sats[j] = intersect(colon_by_element(prev, f1), colon_by_element(prev, f2))
        return sats[j]

    res = stabilize("saturation", step, cfg, certified=True, cap=cfg.power_cap, log=log)
    gens = _prune(list(res.value.gens), base)
    root = restrict_root(r, gens, r.image(1))
    return _Torsion(root, res.value, gens, res.index)


def torsion_part_root(
    r: FRoot, f1: Polynomial, f2: Polynomial, cfg: ChainConfig | None = None, log: ChainLog | None = None
) -> FRoot:
    """Root of the (f1, f2)-torsion F-submodule, restricted from r."""
    cfg = cfg or ChainConfig()
    if r.a == 0:
        return r
    return _torsion(r, f1, f2, cfg, log).root


# H^1 of the two-element Koszul complex


def _torsion_h1_parts(
    t: FRoot, f1: Polynomial, f2: Polynomial, cfg: ChainConfig, log: ChainLog
) -> list[tuple[str, Subquotient]]:
    """Pieces of ``H^1(K(f1, f2; G))`` for an (f1, f2)-torsion module G."""
    ring, k = t.ring, t.a
    out: list[tuple[str, Subquotient]] = []

    # kernel of f2 on G / f1 G, read on the root layer
    f1r = _scaled_whole(ring, k, [f1])
    meets = stabilize(
        "f1_multiples_on_root",
        lambda e: preimage(t.phi(0, e), submodule_sum(f1r, t.image(e))),
        cfg,
        certified=False,
        log=log,
    ).value
    out.append(("torsion_kernel", Subquotient(colon_by_element(meets, f2), meets)))

    # cokernels of f_b on (0 :_G f_a), read on L and on L_{e0}
    ann_cache: dict[tuple[int, int], Submodule] = {}

    def killed(which: int, e: int) -> Submodule:
        key = (which, e)
        if key not in ann_cache:
            ann_cache[key] = colon_by_element(t.image(e), (f1, f2)[which])
        return ann_cache[key]

    def image_chain(which: int, base: int) -> tuple[Submodule, int]:
        other = (f2, f1)[which]

        def step(e: int) -> Submodule:
            target = submodule_sum(_scaled(killed(which, e), other), t.image(e))
            return intersect(preimage(t.phi(base, e), target), killed(which, base))

        name = f"cokernel_f{2 - which}_on_f{which + 1}_torsion_L{base}"
        res = stabilize(name, step, cfg, certified=False, start=base, cap=base + cfg.hard_cap, log=log)
        return res.value, res.index

    layer0 = [image_chain(0, 0), image_chain(1, 0)]
    annihilator = ann_subquotient(Subquotient(Submodule.whole(ring, k), t.image(0)))
    e_ann = 0
    while not all(_frobenius_power_in(fi, e_ann, annihilator) for fi in (f1, f2)):
        e_ann += 1
        if e_ann > cfg.hard_cap:
            raise FSupportError("torsion module not killed by a Frobenius power of f within hard_cap")
    e0 = max(e_ann, layer0[0][1], layer0[1][1])
    for which in (0, 1):
        out.append((f"torsion_cokernel_{which + 1}_L0", Subquotient(killed(which, 0), layer0[which][0])))
        if e0 > 0:
            img, _ = image_chain(which, e0)
            out.append((f"torsion_cokernel_{which + 1}_L{e0}", Subquotient(killed(which, e0), img)))
    return out


def _frobenius_power_in(f: Polynomial, e: int, j: Submodule) -> bool:
    return j.contains_vector((frobenius_power(f, e),))


def _connecting_kernel_parts(
    r: FRoot,
    torsion: _Torsion | None,
    f1: Polynomial,
    f2: Polynomial,
    cfg: ChainConfig,
    log: ChainLog,
) -> list[tuple[str, Subquotient]]:
    """Supports of the kernel of the connecting map into ``H^2(K(f; G))``.

    With Z the Koszul 1-cycles of M and G the torsion part, the kernel is
    ``Z / (B + Z cap G^2)``; it is read on the levels ``L_e`` and the union
    over e is stabilized as a chain of support sets.
    """
    ring, a = r.ring, r.a
    ident = PolyMatrix.identity(ring, a)
    cycle_map = ident.scale(f2).hstack(ident.scale(-f1))
    boundary_cols = [tuple(f1 * x for x in c) + tuple(f2 * x for x in c) for c in ident.columns()]
    tgens = torsion.gens if torsion is not None else []

    def torsion_level(e: int) -> Submodule:
        twisted = [tuple(frobenius_power(x, e) for x in g) for g in tgens]
        return Submodule(ring, a, twisted + list(r.image(e).gens))

    def doubled(w: Submodule) -> list[tuple]:
        zero = (ring.zero(),) * a
        return [g + zero for g in w.gens] + [zero + g for g in w.gens]

    def phi2(e0: int, e1: int) -> PolyMatrix:
        m = r.phi(e0, e1)
        z = PolyMatrix.zeros(ring, a, a)
        top = m.hstack(z)
        bottom = z.hstack(m)
        return PolyMatrix(ring, top.rows() + bottom.rows(), 2 * a)

    def cycles(e: int) -> Submodule:
        return preimage(cycle_map, r.image(e))

    def boundaries_at(e: int) -> Submodule:
        return Submodule(ring, 2 * a, boundary_cols + doubled(torsion_level(e)))

    parts: list[tuple[str, Subquotient]] = []

    def level_support(e: int) -> Submodule:
        z = cycles(e)
        g = stabilize(
            f"connecting_boundaries_L{e}",
            lambda e2: intersect(z, preimage(phi2(e, e2), boundaries_at(e2))),
            cfg,
            certified=False,
            start=e,
            cap=e + cfg.hard_cap,
            log=log,
        ).value
        q = Subquotient(z, g)
        parts.append((f"connecting_kernel_L{e}", q))
        return ann_subquotient(q)

    level_ideals: dict[int, Submodule] = {}

    def cumulative(e: int) -> Submodule:
        if e not in level_ideals:
            level_ideals[e] = level_support(e)
            if e > 0 and e - 1 in level_ideals and not _support_leq(level_ideals[e - 1], level_ideals[e]):
                # Supp(Z_e/G_e) only grows with e; anything else is a defect
                raise ChainViolation("connecting_kernel_levels", e)
        return _intersect_ideals([level_ideals[i] for i in range(e + 1) if i in level_ideals], ring)

    def step(e: int) -> Submodule:
        for i in range(e + 1):
            if i not in level_ideals:
                cumulative(i)
        return cumulative(e)

    stabilize(
        "connecting_kernel_levels",
        step,
        cfg,
        certified=False,
        leq=lambda small, big: _support_leq(small, big),
        log=log,
    )
    return parts


def supp_koszul_h1_pair(
    r: FRoot, f1: Polynomial, f2: Polynomial, cfg: ChainConfig | None = None
) -> SupportIdeal:
    """Support of ``H^1(K(f1, f2; M))``.

    Splits along ``0 -> G -> M -> M/G -> 0`` with G the (f1, f2)-torsion
    part: the image of ``H^1(K; G)`` and the kernel of the connecting map
    ``H^1(K; M/G) -> H^2(K; G)``.
    """
    cfg = cfg or ChainConfig()
    ring = r.ring
    if r.a == 0:
        return empty_support(ring)
    log = ChainLog()
    notes: list[str] = []
    tors = _torsion(r, f1, f2, cfg, log)
    parts: list[tuple[str, Subquotient]] = []
    if tors.root.a:
        rep = validate_root(tors.root)
        if not rep.injective:
            notes.append("torsion part is presented by a generating morphism that is not injective")
        parts.extend(_torsion_h1_parts(tors.root, f1, f2, cfg, log))
    if not tors.saturation.same(Submodule.whole(ring, r.a)):
        parts.extend(_connecting_kernel_parts(r, tors if tors.gens else None, f1, f2, cfg, log))
    pieces = [SupportIdeal(ann_subquotient(q), Provenance(name)) for name, q in parts]
    ideal = _intersect_ideals([p.ideal for p in pieces], ring)
    return SupportIdeal(ideal, Provenance("koszul_h1_pair", tuple(log.records), tuple(notes), tuple(pieces)))
