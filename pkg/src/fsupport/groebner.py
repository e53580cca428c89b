"""Groebner bases for submodules of free modules R^a, R = F_p[x1..xn].

Module elements are stored internally as dicts mapping a *term key* to a
residue.  The key of ``monomial * e_pos`` is ``(-pos,) + ring.sort_key(exps)``,
so plain tuple comparison realizes the position-over-term order (position 0
is the largest) and, because ``sort_key`` is linear, multiplying by a monomial
is a componentwise shift of keys.

Every derived operation (kernel, preimage, intersection, colon, annihilator)
is a block syzygy computation: stack the relevant columns over an identity
block placed at lower-priority positions, compute a POT basis, and read the
syzygies off the elements whose leading position lies in the identity block.

Buchberger runs with the Gebauer-Moeller update (chain criterion), sugar
selection, and a cap on the number of S-pairs.  The cap defaults to 10**6 and
can be overridden with the FSUPPORT_BUDGET environment variable or
:func:`budget_scope`.
"""
from __future__ import annotations

import heapq

import contextlib
import contextvars
import os
from dataclasses import dataclass
from operator import add
from typing import Iterable, NamedTuple, Sequence

from .errors import BudgetExceeded, DimensionError, ValidationError
from .ring import Polynomial, PolyMatrix, RingSpec, frobenius_power

__all__ = [
    "DEFAULT_BUDGET",
    "Submodule",
    "Subquotient",
    "Membership",
    "budget_scope",
    "transcript_scope",
    "groebner_basis",
    "membership",
    "kernel_of_map",
    "preimage",
    "intersect",
    "colon_by_element",
    "colon_into",
    "radical_membership",
    "ann_subquotient",
    "ideal",
    "image",
    "submodule_sum",
    "bracket_submodule",
]

DEFAULT_BUDGET = 10**6

_budget_var: contextvars.ContextVar[int | None] = contextvars.ContextVar("fsupport_budget", default=None)
_transcript_var: contextvars.ContextVar[list | None] = contextvars.ContextVar("fsupport_transcript", default=None)


def _current_budget() -> int:
    b = _budget_var.get()
    if b is not None:
        return b
    env = os.environ.get("FSUPPORT_BUDGET")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"FSUPPORT_BUDGET must be an integer, got {env!r}") from None
    return DEFAULT_BUDGET


@contextlib.contextmanager
def budget_scope(limit: int):
    """Cap every S-pair loop started inside the block at ``limit`` pairs."""
    token = _budget_var.set(limit)
    try:
        yield
    finally:
        _budget_var.reset(token)


@contextlib.contextmanager
def transcript_scope():
    """Collect a text record of every basis computation run inside the block."""
    records: list[str] = []
    token = _transcript_var.set(records)
    try:
        yield records
    finally:
        _transcript_var.reset(token)


# term keys


class _Order:
    __slots__ = ("ring", "nvars", "graded")

    def __init__(self, ring: RingSpec):
        self.ring = ring
        self.nvars = ring.nvars
        self.graded = ring.order != "lex"

    def key(self, pos: int, exps: tuple[int, ...]) -> tuple[int, ...]:
        return (-pos,) + self.ring.sort_key(exps)

    def exps(self, key: tuple[int, ...]) -> tuple[int, ...]:
        return self.ring.exps_from_key(key[1:])

    def deg(self, key: tuple[int, ...]) -> int:
        if self.graded:
            return key[1]
        return sum(key[1:])


def _divides(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _lcm(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x if x > y else y for x, y in zip(a, b))


def _coprime(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    for x, y in zip(a, b):
        if x and y:
            return False
    return True


def _vec_from_cols(col: Sequence[Polynomial], order: _Order, offset: int = 0) -> dict:
    v = {}
    for i, f in enumerate(col):
        if f._terms:
            base = -(i + offset)
            for exps, c in f._terms.items():
                v[(base,) + order.ring.sort_key(exps)] = c
    return v


def _vec_to_col(v: dict, order: _Order, rank: int, offset: int = 0) -> tuple[Polynomial, ...]:
    buckets: list[dict] = [{} for _ in range(rank)]
    for k, c in v.items():
        pos = -k[0] - offset
        if 0 <= pos < rank:
            buckets[pos][order.exps(k)] = c
    return tuple(Polynomial(order.ring, b) for b in buckets)


class _Elt:
    __slots__ = ("vec", "lead", "lexps", "pos", "sugar")

    def __init__(self, vec: dict, order: _Order, sugar: int):
        self.vec = vec
        self.lead = max(vec)
        self.lexps = order.exps(self.lead)
        self.pos = -self.lead[0]
        self.sugar = sugar


def _make_monic(v: dict, p: int) -> dict:
    lc = v[max(v)]
    if lc == 1:
        return v
    inv = pow(lc, p - 2, p)
    return {k: c * inv % p for k, c in v.items()}


def _sugar(v: dict, order: _Order) -> int:
    return max(order.deg(k) for k in v)


def _reduce(v: dict, reducers: dict, order: _Order, p: int, limit: float) -> dict:
    """Full reduction of ``v`` (consumed) by monic reducers grouped by position.

    Only terms at positions < ``limit`` are reduced; the rest pass through.
    Terms are visited in decreasing order through a heap of negated keys;
    a reduction step only creates smaller terms, so stale entries are skipped.
    """
    rem = {}
    heap = [tuple(-x for x in k) for k in v]
    heapq.heapify(heap)
    while heap:
        k = tuple(-x for x in heapq.heappop(heap))
        c = v.get(k)
        if c is None:
            continue
        pos = -k[0]
        r = None
        if pos < limit:
            cands = reducers.get(pos)
            if cands:
                e = order.exps(k)
                for cand in cands:
                    if _divides(cand.lexps, e):
                        r = cand
                        break
        del v[k]
        if r is None:
            rem[k] = c
            continue
        shift = tuple(map(int.__sub__, k, r.lead))
        for kk, cc in r.vec.items():
            if kk == r.lead:
                continue
            nk = tuple(map(add, kk, shift))
            old = v.get(nk)
            if old is None:
                nv = -c * cc % p
                if nv:
                    v[nk] = nv
                    heapq.heappush(heap, tuple(-x for x in nk))
            else:
                nv = (old - c * cc) % p
                if nv:
                    v[nk] = nv
                else:
                    del v[nk]
    return rem


def _shifted(v: dict, shift: tuple[int, ...], coeff: int, p: int) -> dict:
    return {tuple(map(add, k, shift)): c * coeff % p for k, c in v.items()}


def _buchberger(
    vecs: list[dict],
    order: _Order,
    rank_total: int,
    *,
    limit: float = float("inf"),
    drop_from: float = float("inf"),
    syz_from: float = float("inf"),
    label: str = "gb",
) -> list[dict]:
    """Reduced POT Groebner basis of the given vectors.

    ``drop_from``: discard any new element whose leading position is at least
    this value (used when only the leading block matters, e.g. for lifting).
    ``limit``: reduce only terms at positions below it.
    ``syz_from``: elements led at or past this position are kept as plain
    generators, with no S-pairs among them.  The output is then a basis of
    the leading block plus a generating set of the syzygy block.
    """
    p = order.ring.p
    budget = _current_budget()
    product_ok = rank_total == 1
    elts: list[_Elt] = []
    active: list[int] = []
    pairs: list[tuple] = []  # (sugar, lcm_key, i, j, lcm_exps)
    reducers: dict[int, list[_Elt]] = {}
    npairs = 0

    def rebuild_reducers():
        reducers.clear()
        for idx in active:
            e = elts[idx]
            reducers.setdefault(e.pos, []).append(e)

    def update(h: int) -> None:
        nonlocal active, pairs
        eh = elts[h]
        if eh.pos >= syz_from:
            active.append(h)
            reducers.setdefault(eh.pos, []).append(eh)
            return
        cands = [j for j in active if elts[j].pos == eh.pos]
        lcms = {j: _lcm(eh.lexps, elts[j].lexps) for j in cands}
        kept: list[int] = []
        queue = list(cands)
        while queue:
            j = queue.pop(0)
            lj = lcms[j]
            if product_ok and _coprime(eh.lexps, elts[j].lexps):
                kept.append(j)
                continue
            if any(_divides(lcms[k], lj) for k in queue) or any(_divides(lcms[k], lj) for k in kept):
                continue
            kept.append(j)
        new_pairs = []
        for j in kept:
            if product_ok and _coprime(eh.lexps, elts[j].lexps):
                continue
            lj = lcms[j]
            ej = elts[j]
            lkey = order.key(eh.pos, lj)
            degl = order.deg(lkey)
            sug = max(
                eh.sugar + degl - order.deg(eh.lead),
                ej.sugar + degl - order.deg(ej.lead),
            )
            new_pairs.append((sug, lkey, j, h, lj))
        survivors = []
        for pr in pairs:
            i, j, lij = pr[2], pr[3], pr[4]
            if (
                elts[i].pos == eh.pos
                and _divides(eh.lexps, lij)
                and _lcm(elts[i].lexps, eh.lexps) != lij
                and _lcm(elts[j].lexps, eh.lexps) != lij
            ):
                continue
            survivors.append(pr)
        pairs = survivors + new_pairs
        active = [j for j in active if not (elts[j].pos == eh.pos and _divides(eh.lexps, elts[j].lexps))]
        active.append(h)
        rebuild_reducers()

    def insert(v: dict, sugar: int) -> None:
        v = _make_monic(v, p)
        elts.append(_Elt(v, order, sugar))
        update(len(elts) - 1)

    inputs = [v for v in vecs if v]
    inputs.sort(key=lambda v: max(v))
    for v in inputs:
        s = _sugar(v, order)
        r = _reduce(dict(v), reducers, order, p, limit)
        if r and -max(r)[0] < drop_from:
            insert(r, s)

    while pairs:
        best = min(range(len(pairs)), key=lambda t: (pairs[t][0], pairs[t][1], pairs[t][2], pairs[t][3]))
        sug, lkey, i, j, lij = pairs.pop(best)
        npairs += 1
        if npairs > budget:
            raise BudgetExceeded(budget)
        ei, ej = elts[i], elts[j]
        si = order.key(0, tuple(a - b for a, b in zip(lij, ei.lexps)))
        sj = order.key(0, tuple(a - b for a, b in zip(lij, ej.lexps)))
        s = _shifted(ei.vec, si, 1, p)
        for kk, cc in ej.vec.items():
            nk = tuple(map(add, kk, sj))
            nv = (s.get(nk, 0) - cc) % p
            if nv:
                s[nk] = nv
            else:
                s.pop(nk, None)
        if not s:
            continue
        r = _reduce(s, reducers, order, p, limit)
        if r and -max(r)[0] < drop_from:
            insert(r, sug)

    # interreduce to the reduced basis
    basis = [elts[i] for i in active]
    out = []
    for idx, e in enumerate(basis):
        if e.pos >= syz_from:
            # already reduced on insertion; interreducing a non-basis can lose generators
            out.append(e.vec)
            continue
        others: dict[int, list[_Elt]] = {}
        for jdx, o in enumerate(basis):
            if jdx != idx:
                others.setdefault(o.pos, []).append(o)
        tail = dict(e.vec)
        lc = tail.pop(e.lead)
        tail = _reduce(tail, others, order, p, limit)
        tail[e.lead] = lc
        out.append(_make_monic(tail, p))
    out.sort(key=lambda v: max(v), reverse=True)

    sink = _transcript_var.get()
    if sink is not None:
        sink.append(_format_transcript(label, order, inputs, out, npairs, rank_total))
    return out


def _format_transcript(label, order, inputs, out, npairs, rank_total) -> str:
    def show(v):
        col = _vec_to_col(v, order, rank_total)
        return "(" + ", ".join(str(f) for f in col) + ")"

    lines = [f"# {label}: rank {rank_total}, {len(inputs)} inputs, {npairs} S-pairs, {len(out)} basis elements"]
    lines += ["in  " + show(v) for v in inputs]
    lines += ["gb  " + show(v) for v in out]
    return "\n".join(lines)


# public types


def _as_col(ring: RingSpec, v, rank: int) -> tuple[Polynomial, ...]:
    if isinstance(v, Polynomial):
        v = (v,)
    col = tuple(v)
    if len(col) != rank:
        raise DimensionError(f"vector of length {len(col)} in a module of rank {rank}")
    for f in col:
        if not isinstance(f, Polynomial) or f.ring != ring:
            raise ValidationError("vector entries must be polynomials of the module ring")
    return col


class Submodule:
    """Finitely generated submodule of R^rank given by generator columns.

    The zero submodule has no generators.  Basis computations are cached on
    the instance; the generator list itself never changes.
    """

    __slots__ = ("ring", "rank", "gens", "is_gb", "_order", "_gb", "_gb_red", "_lift")

    def __init__(self, ring: RingSpec, rank: int, gens: Iterable = (), *, is_gb: bool = False):
        self.ring = ring
        self.rank = rank
        cols = [_as_col(ring, g, rank) for g in gens]
        self.gens = tuple(c for c in cols if any(c))
        self.is_gb = is_gb
        self._order = _Order(ring)
        self._gb = None
        self._gb_red = None
        self._lift = None

    @classmethod
    def zero(cls, ring: RingSpec, rank: int) -> Submodule:
        return cls(ring, rank, (), is_gb=True)

    @classmethod
    def whole(cls, ring: RingSpec, rank: int) -> Submodule:
        return cls(ring, rank, PolyMatrix.identity(ring, rank).columns(), is_gb=True)

    @classmethod
    def from_matrix(cls, m: PolyMatrix) -> Submodule:
        return cls(m.ring, m.nrows, m.columns())

    def matrix(self) -> PolyMatrix:
        return PolyMatrix.from_columns(self.ring, self.gens, self.rank)

    def _check_same(self, other: Submodule) -> None:
        if self.ring != other.ring:
            raise ValidationError("submodules live over different rings")
        if self.rank != other.rank:
            raise DimensionError(f"rank mismatch: {self.rank} vs {other.rank}")

    # basis

    def _basis(self) -> list[dict]:
        if self._gb is None:
            vecs = [_vec_from_cols(g, self._order) for g in self.gens]
            self._gb = _buchberger(vecs, self._order, self.rank, label="basis")
            red: dict[int, list[_Elt]] = {}
            for v in self._gb:
                e = _Elt(v, self._order, 0)
                red.setdefault(e.pos, []).append(e)
            self._gb_red = red
        return self._gb

    def basis_columns(self) -> list[tuple[Polynomial, ...]]:
        return [_vec_to_col(v, self._order, self.rank) for v in self._basis()]

    def normal_form(self, v) -> tuple[Polynomial, ...]:
        col = _as_col(self.ring, v, self.rank)
        self._basis()
        rem = _reduce(_vec_from_cols(col, self._order), self._gb_red, self._order, self.ring.p, float("inf"))
        return _vec_to_col(rem, self._order, self.rank)

    def contains_vector(self, v) -> bool:
        col = _as_col(self.ring, v, self.rank)
        if not any(col):
            return True
        if not self.gens:
            return False
        self._basis()
        rem = _reduce(_vec_from_cols(col, self._order), self._gb_red, self._order, self.ring.p, float("inf"))
        return not rem

    def contains(self, other: Submodule) -> bool:
        self._check_same(other)
        return all(self.contains_vector(g) for g in other.gens)

    def same(self, other: Submodule) -> bool:
        return self.contains(other) and other.contains(self)

    def is_zero(self) -> bool:
        return not self.gens

    def is_whole(self) -> bool:
        if self.rank == 0:
            return True
        one, zero = self.ring.one(), self.ring.zero()
        return all(
            self.contains_vector(tuple(one if i == j else zero for i in range(self.rank))) for j in range(self.rank)
        )

    # lifting

    def _lift_basis(self) -> tuple[list[dict], dict]:
        if self._lift is None:
            a, k = self.rank, len(self.gens)
            vecs = []
            for idx, g in enumerate(self.gens):
                v = _vec_from_cols(g, self._order)
                v[self._order.key(a + idx, (0,) * self._order.nvars)] = 1
                vecs.append(v)
            basis = _buchberger(vecs, self._order, a + k, limit=a, drop_from=a, label="lift")
            red: dict[int, list[_Elt]] = {}
            for v in basis:
                e = _Elt(v, self._order, 0)
                red.setdefault(e.pos, []).append(e)
            self._lift = (basis, red)
        return self._lift

    def __repr__(self) -> str:
        shown = ["(" + ", ".join(str(f) for f in g) + ")" for g in self.gens]
        return f"Submodule(rank={self.rank}, gens=[{', '.join(shown)}])"

    def __len__(self) -> int:
        return len(self.gens)


class Membership(NamedTuple):
    member: bool
    coordinates: tuple[Polynomial, ...] | None


@dataclass(frozen=True)
class Subquotient:
    """N/L with L inside N, both submodules of the same free module."""

    numerator: Submodule
    denominator: Submodule

    def __post_init__(self) -> None:
        self.numerator._check_same(self.denominator)
        if not self.numerator.contains(self.denominator):
            raise ValidationError("malformed subquotient: denominator is not contained in numerator")

    def is_zero(self) -> bool:
        return self.denominator.contains(self.numerator)


# constructors


def ideal(ring: RingSpec, polys: Iterable[Polynomial | str]) -> Submodule:
    cols = []
    for f in polys:
        if isinstance(f, str):
            f = ring.parse(f)
        cols.append((f,))
    return Submodule(ring, 1, cols)


def image(m: PolyMatrix) -> Submodule:
    return Submodule.from_matrix(m)


def submodule_sum(*mods: Submodule) -> Submodule:
    first = mods[0]
    gens = []
    for m in mods:
        first._check_same(m)
        gens.extend(m.gens)
    return Submodule(first.ring, first.rank, gens)


def bracket_submodule(w: Submodule, e: int) -> Submodule:
    """Submodule generated by the entrywise ``p^e`` powers of the generators."""
    if e == 0:
        return w
    return Submodule(w.ring, w.rank, [tuple(frobenius_power(f, e) for f in g) for g in w.gens])


# operations


def groebner_basis(w: Submodule) -> Submodule:
    """Reduced POT Groebner basis, returned as a new flagged submodule."""
    if w.is_gb and w._gb is not None:
        return w
    cols = w.basis_columns()
    out = Submodule(w.ring, w.rank, cols, is_gb=True)
    out._gb = w._gb
    out._gb_red = w._gb_red
    return out


def membership(v, w: Submodule) -> Membership:
    """Decide v in W; on success give coordinates against W's generators."""
    col = _as_col(w.ring, v, w.rank)
    k = len(w.gens)
    zero = w.ring.zero()
    if not any(col):
        return Membership(True, (zero,) * k)
    if not k:
        return Membership(False, None)
    basis, red = w._lift_basis()
    order = w._order
    p = w.ring.p
    rem = _reduce(_vec_from_cols(col, order), red, order, p, w.rank)
    if any(-key[0] < w.rank for key in rem):
        return Membership(False, None)
    coords = _vec_to_col(rem, order, k, offset=w.rank)
    return Membership(True, tuple(-c for c in coords))


def _syzygies(cols: Sequence[Sequence[Polynomial]], ring: RingSpec, rank: int, label: str) -> list[tuple[Polynomial, ...]]:
    """Generators of the syzygy module of the given columns."""
    b = len(cols)
    if b == 0:
        return []
    order = _Order(ring)
    if rank == 0 or all(not any(c) for c in cols):
        return PolyMatrix.identity(ring, b).columns()
    vecs = []
    unit = (0,) * order.nvars
    for idx, c in enumerate(cols):
        v = _vec_from_cols(c, order)
        v[order.key(rank + idx, unit)] = 1
        vecs.append(v)
    basis = _buchberger(vecs, order, rank + b, syz_from=rank, label=label)
    out = []
    for v in basis:
        if -max(v)[0] >= rank:
            out.append(_vec_to_col(v, order, b, offset=rank))
    return out


def kernel_of_map(m: PolyMatrix) -> Submodule:
    """ker(M: R^b -> R^a) via syzygies of the columns of M."""
    syz = _syzygies(m.columns(), m.ring, m.nrows, "kernel")
    return Submodule(m.ring, m.ncols, syz)


def preimage(m: PolyMatrix, w: Submodule) -> Submodule:
    """{v in R^b : M v in W}, from syzygies of [M | gens W] cut to the first b slots."""
    if m.ring != w.ring:
        raise ValidationError("matrix and submodule over different rings")
    if m.nrows != w.rank:
        raise DimensionError(f"matrix with {m.nrows} rows cannot map into rank {w.rank}")
    b = m.ncols
    if b == 0:
        return Submodule.zero(m.ring, 0)
    if not w.gens:
        return kernel_of_map(m)
    syz = _syzygies(m.columns() + list(w.gens), m.ring, m.nrows, "preimage")
    return Submodule(m.ring, b, [s[:b] for s in syz])


def intersect(w1: Submodule, w2: Submodule) -> Submodule:
    w1._check_same(w2)
    if not w1.gens or not w2.gens:
        return Submodule.zero(w1.ring, w1.rank)
    mat = w1.matrix()
    coeffs = preimage(mat, w2)
    return Submodule(w1.ring, w1.rank, [mat.apply(c) for c in coeffs.gens])


def colon_by_element(w: Submodule, f: Polynomial) -> Submodule:
    """(W :_{R^a} f) = {v : f v in W}."""
    if f.ring != w.ring:
        raise ValidationError("element from a different ring")
    if w.rank == 0:
        return w
    if f.is_constant() and f:
        return w
    return preimage(PolyMatrix.diagonal(w.ring, [f] * w.rank), w)


def colon_into(w: Submodule, v: Submodule) -> Submodule:
    """(W :_R V) = {r : r V in W}, an ideal."""
    w._check_same(v)
    ring = w.ring
    if w.rank == 0 or not v.gens:
        return Submodule.whole(ring, 1)
    result = None
    for g in v.gens:
        if w.contains_vector(g):
            continue
        col_ideal = preimage(PolyMatrix.from_columns(ring, [g], w.rank), w)
        result = col_ideal if result is None else intersect(result, col_ideal)
    return Submodule.whole(ring, 1) if result is None else result


def ann_subquotient(q: Subquotient) -> Submodule:
    """(L :_R N); its vanishing locus is Supp(N/L)."""
    return colon_into(q.denominator, q.numerator)


_RABINOWITSCH = "T_rabinowitsch"


def radical_membership(f: Polynomial, j: Submodule) -> bool:
    """f in sqrt(J), tested as 1 in J + (1 - T f) over R[T]."""
    if j.rank != 1:
        raise DimensionError("radical membership needs an ideal")
    if f.ring != j.ring:
        raise ValidationError("element from a different ring")
    if not f:
        return True
    if not j.gens:
        return False
    if j.contains_vector((f,)):
        return True
    name = _RABINOWITSCH
    while name in f.ring.vars:
        name += "_"
    big = f.ring.extend(name)
    t = big.var(name)
    gens = [(g[0].change_ring(big),) for g in j.gens]
    gens.append((big.one() - t * f.change_ring(big),))
    return Submodule(big, 1, gens).contains_vector((big.one(),))
