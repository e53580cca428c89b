"""Truncated Čech complexes, local cohomology roots and the Koszul-Čech edge map.

Level ``e`` of the Čech complex on ``g`` identifies each summand
``R * 1/(prod g_J)^{p^e}`` with ``R``; the differential from subset J to
``J + {l}`` is then multiplication by ``±g_l^{p^e}`` and the inclusion of
level e into level e+1 is multiplication by ``(prod g_J)^{p^{e+1}-p^e}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import NamedTuple, Sequence

from .chains import ChainConfig, ChainLog, ChainRecord, stabilize
from .errors import DimensionError, NotRegularSequence, ValidationError
from .fmodule import (
    FRoot,
    Provenance,
    RootReport,
    SupportIdeal,
    _prune,
    empty_support,
    same_support,
    supp_koszul_h1_pair,
    validate_root,
)
from .groebner import (
    Submodule,
    Subquotient,
    ann_subquotient,
    bracket_submodule,
    colon_by_element,
    ideal,
    intersect,
    kernel_of_map,
    membership,
    preimage,
    submodule_sum,
)
from .ring import PolyMatrix, Polynomial, RingSpec, bracket_power, frobenius_power

__all__ = [
    "TruncCechComplex",
    "CechContext",
    "build_truncated_cech",
    "transition",
    "transition_between",
    "lc_truncated_cohomology",
    "lc_root",
    "EdgeKernelResult",
    "edge_kernel_K0",
    "supp_E0",
    "supp_E1",
    "supp_E2",
    "OracleReport",
    "oracle_total_vs_row",
]


@dataclass(frozen=True)
class TruncCechComplex:
    ring: RingSpec
    g: tuple[Polynomial, ...]
    e: int
    subsets: tuple[tuple[tuple[int, ...], ...], ...]
    diffs: tuple[PolyMatrix, ...]

    @property
    def length(self) -> int:
        return len(self.g)

    def rank(self, i: int) -> int:
        t = len(self.g)
        return comb(t, i) if 0 <= i <= t else 0

    def diff(self, i: int) -> PolyMatrix:
        """``delta^i_e``; a zero matrix of the right shape outside 0..t-1."""
        if 0 <= i < len(self.diffs):
            return self.diffs[i]
        return PolyMatrix.zeros(self.ring, self.rank(i + 1), self.rank(i))


def _subsets(t: int, i: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(t), i))


def _check_gens(g: Sequence[Polynomial]) -> tuple[RingSpec, tuple[Polynomial, ...]]:
    g = tuple(g)
    if not g:
        raise ValidationError("the ideal needs at least one generator")
    ring = g[0].ring
    for x in g:
        if x.ring != ring:
            raise ValidationError("generators live in different rings")
        if not x:
            raise ValidationError("generators must be nonzero")
    return ring, g


def build_truncated_cech(g: Sequence[Polynomial], e: int, ring: RingSpec | None = None) -> TruncCechComplex:
    ring_g, g = _check_gens(g)
    if ring is not None and ring != ring_g:
        raise ValidationError("generators are not in the given ring")
    ring = ring_g
    if e < 0:
        raise ValidationError("truncation level must be nonnegative")
    t = len(g)
    powered = [frobenius_power(x, e) for x in g]
    subsets = tuple(_subsets(t, i) for i in range(t + 1))
    zero = ring.zero()
    diffs = []
    for i in range(t):
        src, dst = subsets[i], subsets[i + 1]
        index = {s: k for k, s in enumerate(dst)}
        rows = [[zero] * len(src) for _ in dst]
        for col, J in enumerate(src):
            for ell in range(t):
                if ell in J:
                    continue
                big = tuple(sorted(J + (ell,)))
                s = big.index(ell)  # zero-based insertion position
                rows[index[big]][col] = powered[ell] if s % 2 == 0 else -powered[ell]
        diffs.append(PolyMatrix(ring, rows, len(src)))
    for i in range(t - 1):
        if not (diffs[i + 1] @ diffs[i]).is_zero():
            raise AssertionError("Čech differential does not square to zero")
    return TruncCechComplex(ring, g, e, subsets, tuple(diffs))


def _power_gap(h: Polynomial, e: int, e2: int) -> Polynomial:
    """``h^{p^{e2} - p^e}`` as a product of Frobenius twists of ``h^{p-1}``."""
    ring = h.ring
    base = h ** (ring.p - 1)
    out = ring.one()
    for k in range(e, e2):
        out = out * frobenius_power(base, k)
    return out


def transition_between(g: Sequence[Polynomial], i: int, e: int, e2: int) -> PolyMatrix:
    """Degree-i component of the inclusion of level e into level e2."""
    ring, g = _check_gens(g)
    entries = []
    for J in _subsets(len(g), i):
        h = ring.one()
        for idx in J:
            h = h * g[idx]
        entries.append(_power_gap(h, e, e2))
    return PolyMatrix.diagonal(ring, entries)


def transition(cx: TruncCechComplex) -> list[PolyMatrix]:
    """Chain map from level e to level e+1, one diagonal matrix per degree."""
    return [transition_between(cx.g, i, cx.e, cx.e + 1) for i in range(cx.length + 1)]


class CechContext:
    """Memo of every level object for one generator list.

    Chain records of cached objects are replayed into the caller's log so
    each support still reports every stabilization it relied on.
    """

    def __init__(self, g: Sequence[Polynomial], cfg: ChainConfig | None = None):
        self.ring, self.g = _check_gens(g)
        self.cfg = cfg or ChainConfig()
        self.t = len(self.g)
        self._cx: dict[int, TruncCechComplex] = {}
        self._ker: dict[tuple[int, int], Submodule] = {}
        self._den: dict[tuple[int, int], tuple[Submodule, tuple[ChainRecord, ...]]] = {}
        self._trans: dict[tuple[int, int, int], PolyMatrix] = {}
        self._img: dict[tuple[int, int], Submodule] = {}
        self._roots: dict[int, tuple[FRoot, RootReport, tuple[ChainRecord, ...]]] = {}

    def complex(self, e: int) -> TruncCechComplex:
        if e not in self._cx:
            self._cx[e] = build_truncated_cech(self.g, e)
        return self._cx[e]

    def rank(self, i: int) -> int:
        return comb(self.t, i) if 0 <= i <= self.t else 0

    def diff(self, i: int, e: int) -> PolyMatrix:
        return self.complex(e).diff(i)

    def trans(self, i: int, e: int, e2: int) -> PolyMatrix:
        key = (i, e, e2)
        if key not in self._trans:
            self._trans[key] = transition_between(self.g, i, e, e2)
        return self._trans[key]

    def kernel(self, j: int, e: int) -> Submodule:
        """``ker delta^j_e``; level e is the bracket power of level 0 by flatness."""
        key = (j, e)
        if key not in self._ker:
            if e == 0:
                d = self.diff(j, 0)
                if d.nrows == 0:
                    self._ker[key] = Submodule.whole(self.ring, self.rank(j))
                else:
                    self._ker[key] = kernel_of_map(d)
            else:
                self._ker[key] = bracket_submodule(self.kernel(j, 0), e)
        return self._ker[key]

    def image(self, j: int, e: int) -> Submodule:
        """``im delta^{j-1}_e`` inside the degree-j term."""
        key = (j, e)
        if key not in self._img:
            self._img[key] = Submodule.from_matrix(self.diff(j - 1, e))
        return self._img[key]

    def denominator(self, j: int, e: int, log: ChainLog | None = None) -> Submodule:
        """Level-e cycles that bound in the full Čech complex."""
        key = (j, e)
        if key not in self._den:
            local = ChainLog()
            if j <= 0 or self.rank(j) == 0:
                value = Submodule.zero(self.ring, self.rank(j))
            else:
                value = stabilize(
                    f"cech_boundaries_deg{j}_L{e}",
                    lambda e2: preimage(self.trans(j, e, e2), self.image(j, e2)),
                    self.cfg,
                    certified=False,
                    start=e,
                    cap=e + self.cfg.hard_cap,
                    log=local,
                ).value
            self._den[key] = (value, tuple(local.records))
        value, recs = self._den[key]
        if log is not None:
            log.records.extend(recs)
        return value

    def cohomology(self, j: int, e: int, log: ChainLog | None = None) -> Subquotient:
        if not 0 <= j <= self.t:
            zero = Submodule.zero(self.ring, 0)
            return Subquotient(zero, zero)
        return Subquotient(self.kernel(j, e), self.denominator(j, e, log))

    def root(self, j: int, log: ChainLog | None = None) -> tuple[FRoot, RootReport]:
        if j not in self._roots:
            local = ChainLog()
            self._roots[j] = self._build_root(j, local) + (tuple(local.records),)
        r, rep, recs = self._roots[j]
        if log is not None:
            log.records.extend(recs)
        return r, rep

    def _build_root(self, j: int, log: ChainLog) -> tuple[FRoot, RootReport]:
        ring = self.ring
        if not 0 <= j <= self.t:
            return FRoot.zero(ring), RootReport(True, True)
        q = self.cohomology(j, 0, log)
        gens = _prune(list(q.numerator.gens), q.denominator)
        if not gens:
            return FRoot.zero(ring), RootReport(True, True)
        k, n = len(gens), self.rank(j)
        smat = PolyMatrix.from_columns(ring, gens, n)
        pres = preimage(smat, q.denominator)
        amat = PolyMatrix.from_columns(ring, pres.gens, k) if pres.gens else PolyMatrix.zeros(ring, k, 0)
        twisted = [tuple(frobenius_power(x, 1) for x in c) for c in gens]
        target = Submodule(ring, n, twisted + list(bracket_submodule(q.denominator, 1).gens))
        step = self.trans(j, 0, 1)
        cols = []
        for c in gens:
            m = membership(step.apply(c), target)
            if not m.member:
                raise AssertionError("transition image escapes the level-one cycles")
            cols.append(m.coordinates[:k])
        root = FRoot(amat, PolyMatrix.from_columns(ring, cols, k), ring)
        return root, validate_root(root)


def _ctx(g, cfg: ChainConfig | None, ctx: CechContext | None) -> CechContext:
    if ctx is not None:
        return ctx
    return CechContext(g, cfg)


def lc_truncated_cohomology(
    g: Sequence[Polynomial], j: int, e: int, cfg: ChainConfig | None = None, ctx: CechContext | None = None
) -> Subquotient:
    """Image of ``H^j`` of level e in ``H^j_I(R)``, as cycles over full-complex boundaries."""
    c = _ctx(g, cfg, ctx)
    if not 0 <= j <= c.t:
        raise ValidationError(f"degree {j} outside 0..{c.t}")
    return c.cohomology(j, e)


def lc_root(g: Sequence[Polynomial], j: int, cfg: ChainConfig | None = None, ctx: CechContext | None = None) -> FRoot:
    """Root of ``H^j_I(R)`` built on its level-0 layer."""
    c = _ctx(g, cfg, ctx)
    if not 0 <= j <= c.t:
        raise ValidationError(f"degree {j} outside 0..{c.t}")
    return c.root(j)[0]


# edge map


@dataclass(frozen=True)
class EdgeKernelResult:
    K0: Submodule
    system: PolyMatrix  # block matrix whose kernel was projected
    solutions: int  # number of kernel generators found


def _block(ring: RingSpec, rows: Sequence[Sequence[PolyMatrix | None]], heights: Sequence[int], widths: Sequence[int]) -> PolyMatrix:
    zero = ring.zero()
    out = []
    for bi, brow in enumerate(rows):
        for r in range(heights[bi]):
            line = []
            for bj, blk in enumerate(brow):
                if blk is None:
                    line.extend([zero] * widths[bj])
                else:
                    if blk.shape != (heights[bi], widths[bj]):
                        raise DimensionError(f"block {bi},{bj} has shape {blk.shape}")
                    line.extend(blk.rows()[r])
            out.append(line)
    return PolyMatrix(ring, out, sum(widths))


def _scalar(ring: RingSpec, f: Polynomial, n: int) -> PolyMatrix:
    return PolyMatrix.diagonal(ring, [f] * n)


def edge_kernel_K0(
    g: Sequence[Polynomial],
    f1: Polynomial,
    f2: Polynomial,
    j: int,
    cfg: ChainConfig | None = None,
    ctx: CechContext | None = None,
) -> EdgeKernelResult:
    """Level-0 cycles whose class is killed by f and by the edge map.

    Unknowns ``(eta, alpha1, alpha2, c1, c2, gamma)`` with
    ``delta eta = 0``, ``delta alpha_i = f_i eta`` and
    ``-f2 alpha1 + f1 alpha2 = f1 K c1 + f2 K c2 + delta gamma`` where K
    holds generators of the (j-1)-cycles.
    """
    c = _ctx(g, cfg, ctx)
    ring = c.ring
    if not 0 <= j <= c.t:
        raise ValidationError(f"degree {j} outside 0..{c.t}")
    n_next, n, n_prev, n_pp = c.rank(j + 1), c.rank(j), c.rank(j - 1), c.rank(j - 2)
    cyc = c.kernel(j - 1, 0) if n_prev else Submodule.zero(ring, 0)
    kmat = cyc.matrix() if cyc.gens else PolyMatrix.zeros(ring, n_prev, 0)
    m = kmat.ncols
    widths = [n, n_prev, n_prev, m, m, n_pp]
    heights = [n_next, n, n, n_prev]
    d_j, d_prev, d_pp = c.diff(j, 0), c.diff(j - 1, 0), c.diff(j - 2, 0)
    system = _block(
        ring,
        [
            [d_j, None, None, None, None, None],
            [_scalar(ring, -f1, n), d_prev, None, None, None, None],
            [_scalar(ring, -f2, n), None, d_prev, None, None, None],
            [
                None,
                _scalar(ring, -f2, n_prev),
                _scalar(ring, f1, n_prev),
                kmat.scale(-f1),
                kmat.scale(-f2),
                d_pp.scale(-ring.one()),
            ],
        ],
        heights,
        widths,
    )
    sols = kernel_of_map(system) if system.nrows else Submodule.whole(ring, sum(widths))
    etas = [s[:n] for s in sols.gens]
    k0 = Submodule(ring, n, etas + list(c.image(j, 0).gens))
    return EdgeKernelResult(k0, system, len(sols.gens))


def supp_E0(
    g: Sequence[Polynomial],
    f1: Polynomial,
    f2: Polynomial,
    j: int,
    cfg: ChainConfig | None = None,
    ctx: CechContext | None = None,
) -> SupportIdeal:
    """Support of ``E^{0,j}`` at infinity, the kernel of the edge map out of it."""
    c = _ctx(g, cfg, ctx)
    if not 0 <= j <= c.t:
        return empty_support(c.ring, "E0 outside the Čech range")
    log = ChainLog()
    k0 = edge_kernel_K0(c.g, f1, f2, j, ctx=c).K0
    den = intersect(k0, c.denominator(j, 0, log))
    q = Subquotient(k0, den)
    return SupportIdeal(ann_subquotient(q), Provenance("E0_edge_kernel", tuple(log.records)))


def supp_E1(
    g: Sequence[Polynomial],
    f1: Polynomial,
    f2: Polynomial,
    j: int,
    cfg: ChainConfig | None = None,
    ctx: CechContext | None = None,
) -> SupportIdeal:
    """Support of ``E^{1,j}``: Koszul H^1 of ``H^j_I(R)`` through its root."""
    c = _ctx(g, cfg, ctx)
    if not 0 <= j <= c.t:
        return empty_support(c.ring, "E1 outside the Čech range")
    log = ChainLog()
    root, rep = c.root(j, log)
    notes = () if rep.injective else ("local cohomology layer gives a generating morphism that is not injective",)
    inner = supp_koszul_h1_pair(root, f1, f2, c.cfg)
    return SupportIdeal(inner.ideal, Provenance("E1_koszul_h1", tuple(log.records), notes, (inner,)))


def _hl_system(
    c: CechContext, f1: Polynomial, f2: Polynomial, j: int, e: int
) -> Submodule:
    """Level-0 (j-1)-cycles whose class lies in the preimage of the edge image, witnessed at level e."""
    ring = c.ring
    n_t, n_h, n_pp = c.rank(j), c.rank(j - 1), c.rank(j - 2)
    tau_gens = c.kernel(j, e) if n_t else Submodule.zero(ring, 0)
    tmat = tau_gens.matrix() if tau_gens.gens else PolyMatrix.zeros(ring, n_t, 0)
    cyc = c.kernel(j - 1, e)
    kmat = cyc.matrix() if cyc.gens else PolyMatrix.zeros(ring, n_h, 0)
    mt, m = tmat.ncols, kmat.ncols
    widths = [n_h, mt, n_h, n_h, m, m, n_pp]
    heights = [n_t, n_t, n_h]
    d_prev, d_pp = c.diff(j - 1, e), c.diff(j - 2, e)
    system = _block(
        ring,
        [
            [None, tmat.scale(-f1), d_prev, None, None, None, None],
            [None, tmat.scale(-f2), None, d_prev, None, None, None],
            [
                c.trans(j - 1, 0, e),
                None,
                _scalar(ring, f2, n_h),
                _scalar(ring, -f1, n_h),
                kmat.scale(-f1),
                kmat.scale(-f2),
                d_pp.scale(-ring.one()),
            ],
        ],
        heights,
        widths,
    )
    sols = kernel_of_map(system)
    return Submodule(ring, n_h, [s[:n_h] for s in sols.gens])


def supp_E2(
    g: Sequence[Polynomial],
    f1: Polynomial,
    f2: Polynomial,
    j: int,
    cfg: ChainConfig | None = None,
    ctx: CechContext | None = None,
) -> SupportIdeal:
    """Support of ``E^{2,j-1}`` at infinity, the cokernel of the edge map into it.

    The level-0 classes H are compared with the preimage of the edge
    image, built as an increasing union over witness levels e.
    """
    c = _ctx(g, cfg, ctx)
    if not 1 <= j <= c.t + 1:
        return empty_support(c.ring, "E2 outside the Čech range")
    log = ChainLog()
    num = c.kernel(j - 1, 0)
    den = c.denominator(j - 1, 0, log)
    if den.contains(num):
        return SupportIdeal(Submodule.whole(c.ring, 1), Provenance("E2_edge_cokernel", tuple(log.records)))
    hl = stabilize(
        f"edge_image_deg{j - 1}",
        lambda e: submodule_sum(_hl_system(c, f1, f2, j, e), den),
        c.cfg,
        certified=False,
        log=log,
    ).value
    q = Subquotient(num, hl)
    return SupportIdeal(ann_subquotient(q), Provenance("E2_edge_cokernel", tuple(log.records)))


# degeneration oracle


class OracleReport(NamedTuple):
    k: int
    e: int
    total: Submodule
    row: Submodule
    match: bool


def _regular_pair(f1: Polynomial, f2: Polynomial) -> bool:
    if not f1:
        return False
    ring = f1.ring
    base = ideal(ring, [f1])
    if not colon_by_element(base, f2).same(base):
        return False
    return not ideal(ring, [f1, f2]).is_whole()


def _hstack_all(ring: RingSpec, mats: Sequence[PolyMatrix], nrows: int) -> PolyMatrix:
    cols = []
    for m in mats:
        cols.extend(m.columns())
    return PolyMatrix.from_columns(ring, cols, nrows)


def _total_differential(c: CechContext, e: int, n: int, F1: Polynomial, F2: Polynomial) -> PolyMatrix:
    """``d^n`` of the Koszul-Čech total complex at level e.

    Degree n is the sum over Koszul index i in 0..2 of ``K^i ⊗ C^{n-i}``;
    ``K^1`` contributes two copies.  Vertical maps are ``(F1, F2)^T`` and
    ``(-F2, F1)``, horizontal maps carry the sign ``(-1)^i``.
    """
    ring = c.ring

    def blocks(m: int) -> list[tuple[int, int, int]]:
        # (koszul index, copy, cech degree)
        out = []
        for i, copies in ((0, 1), (1, 2), (2, 1)):
            for cp in range(copies):
                out.append((i, cp, m - i))
        return out

    src, dst = blocks(n), blocks(n + 1)
    widths = [c.rank(j) for (_, _, j) in src]
    heights = [c.rank(j) for (_, _, j) in dst]
    grid: list[list[PolyMatrix | None]] = []
    for (i2, cp2, j2) in dst:
        row: list[PolyMatrix | None] = []
        for (i1, cp1, j1) in src:
            blk = None
            if i2 == i1 and cp2 == cp1 and j2 == j1 + 1:
                d = c.diff(j1, e)
                blk = d if i1 % 2 == 0 else d.scale(-ring.one())
            elif i2 == i1 + 1 and j2 == j1:
                r = c.rank(j1)
                if i1 == 0:
                    blk = _scalar(ring, F1 if cp2 == 0 else F2, r)
                elif i1 == 1:
                    blk = _scalar(ring, -F2 if cp1 == 0 else F1, r)
            row.append(blk)
        grid.append(row)
    return _block(ring, grid, heights, widths)


def _total_cohomology(c: CechContext, e: int, k: int, F1: Polynomial, F2: Polynomial) -> Subquotient:
    d = _total_differential(c, e, k, F1, F2)
    d_prev = _total_differential(c, e, k - 1, F1, F2)
    size = d.ncols
    if size == 0:
        zero = Submodule.zero(c.ring, 0)
        return Subquotient(zero, zero)
    num = kernel_of_map(d) if d.nrows else Submodule.whole(c.ring, size)
    return Subquotient(num, Submodule.from_matrix(d_prev))


def _row_cohomology(c: CechContext, e: int, m: int, F1: Polynomial, F2: Polynomial) -> Subquotient:
    ring = c.ring
    n = c.rank(m)
    if n == 0:
        zero = Submodule.zero(ring, 0)
        return Subquotient(zero, zero)

    def fmod(r: int) -> Submodule:
        gens = []
        for f in (F1, F2):
            gens.extend(_scalar(ring, f, r).columns())
        return Submodule(ring, r, gens)

    d = c.diff(m, e)
    num = preimage(d, fmod(d.nrows)) if d.nrows else Submodule.whole(ring, n)
    den = submodule_sum(c.image(m, e), fmod(n))
    return Subquotient(num, den)


def oracle_total_vs_row(
    g: Sequence[Polynomial],
    f1: Polynomial,
    f2: Polynomial,
    e: int,
    k: int,
    cfg: ChainConfig | None = None,
    ctx: CechContext | None = None,
) -> OracleReport:
    """Compare ``H^k`` of the level-e total complex with ``H^{k-2}`` of Čech mod ``f^{[p^e]}``.

    Every level-e Čech term is free, so only the top Koszul row survives
    in the column-first spectral sequence.
    """
    c = _ctx(g, cfg, ctx)
    F1, F2 = frobenius_power(f1, e), frobenius_power(f2, e)
    if not _regular_pair(F1, F2):
        raise NotRegularSequence("f is not a regular sequence")
    total = ann_subquotient(_total_cohomology(c, e, k, F1, F2))
    row = ann_subquotient(_row_cohomology(c, e, k - 2, F1, F2))
    return OracleReport(k, e, total, row, same_support(total, row))
