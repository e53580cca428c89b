"""Sparse multivariate polynomials over a prime field F_p.

A :class:`RingSpec` fixes the prime, the variable names and the monomial
order.  :class:`Polynomial` values are immutable maps from exponent tuples to
nonzero residues, always kept in canonical form, so equality is structural.

Frobenius acts termwise: in characteristic p the map f -> f^p is additive and
fixes F_p, so ``frobenius_power`` just scales exponents.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import OverflowFailure, PolyParseError, ValidationError

__all__ = [
    "EXP_LIMIT",
    "ORDERS",
    "RingSpec",
    "Polynomial",
    "PolyMatrix",
    "parse_poly",
    "frobenius_power",
    "bracket_power",
    "is_prime",
]

# Exponents are 32-bit unsigned; anything past this is refused.
EXP_LIMIT = 2**32 - 1
ORDERS = ("grevlex", "grlex", "lex")
_VAR_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class RingSpec:
    """Polynomial ring F_p[vars] with a monomial order."""

    p: int
    vars: tuple[str, ...]
    order: str = "grevlex"

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", tuple(self.vars))
        if not isinstance(self.p, int) or isinstance(self.p, bool):
            raise ValidationError("p must be an integer")
        if not (2 <= self.p <= 2**16) or not is_prime(self.p):
            raise ValidationError("p must be prime")
        if not self.vars:
            raise ValidationError("ring needs at least one variable")
        for name in self.vars:
            if not isinstance(name, str) or not _VAR_RE.match(name):
                raise ValidationError(f"invalid variable name {name!r}")
        if len(set(self.vars)) != len(self.vars):
            raise ValidationError("variable names must be unique")
        if self.order not in ORDERS:
            raise ValidationError(f"unknown monomial order {self.order!r}")

    @property
    def nvars(self) -> int:
        return len(self.vars)

    def __str__(self) -> str:
        return f"F_{self.p}[{','.join(self.vars)}]"

    # constructors

    def zero(self) -> Polynomial:
        return Polynomial(self, {})

    def one(self) -> Polynomial:
        return self.const(1)

    def const(self, c: int) -> Polynomial:
        c %= self.p
        return Polynomial(self, {(0,) * self.nvars: c} if c else {})

    def var(self, name: str) -> Polynomial:
        try:
            i = self.vars.index(name)
        except ValueError:
            raise ValidationError(f"unknown variable {name!r}") from None
        exps = [0] * self.nvars
        exps[i] = 1
        return Polynomial(self, {tuple(exps): 1})

    def gens(self) -> tuple[Polynomial, ...]:
        return tuple(self.var(v) for v in self.vars)

    def monomial(self, exps: Sequence[int], coeff: int = 1) -> Polynomial:
        exps = tuple(exps)
        if len(exps) != self.nvars:
            raise ValidationError("exponent vector has wrong length")
        coeff %= self.p
        return Polynomial(self, {exps: coeff} if coeff else {})

    def parse(self, text: str) -> Polynomial:
        return parse_poly(text, self)

    def extend(self, name: str) -> RingSpec:
        """Same ring with one extra variable appended last."""
        return RingSpec(self.p, self.vars + (name,), self.order)

    # ordering

    def sort_key(self, exps: tuple[int, ...]) -> tuple[int, ...]:
        """Tuple whose lexicographic comparison realizes the monomial order.

        The map is linear in the exponents, which the Groebner engine relies on
        when it shifts keys by monomial multiplication.
        """
        if self.order == "lex":
            return exps
        deg = sum(exps)
        if self.order == "grlex":
            return (deg,) + exps
        return (deg,) + tuple(-e for e in reversed(exps))

    def exps_from_key(self, key: Sequence[int]) -> tuple[int, ...]:
        if self.order == "lex":
            return tuple(key)
        if self.order == "grlex":
            return tuple(key[1:])
        return tuple(-e for e in reversed(key[1:]))


def _check_exps(exps: Iterable[int]) -> None:
    for e in exps:
        if e > EXP_LIMIT:
            raise OverflowFailure(f"exponent {e} exceeds the 32-bit limit")


def _check_top(terms: Mapping[tuple[int, ...], int]) -> None:
    if terms:
        _check_exps((max(max(m) for m in terms),))


class Polynomial:
    """Immutable sparse polynomial; no stored zero coefficients."""

    __slots__ = ("ring", "_terms", "_hash")

    def __init__(self, ring: RingSpec, terms: Mapping[tuple[int, ...], int]):
        self.ring = ring
        self._terms = dict(terms)
        self._hash = None

    # construction helpers

    @classmethod
    def from_terms(cls, ring: RingSpec, terms: Mapping[Sequence[int], int]) -> Polynomial:
        acc: dict[tuple[int, ...], int] = {}
        p = ring.p
        for exps, c in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != ring.nvars or any(e < 0 for e in exps):
                raise ValidationError(f"bad exponent vector {exps}")
            _check_exps(exps)
            v = (acc.get(exps, 0) + c) % p
            if v:
                acc[exps] = v
            else:
                acc.pop(exps, None)
        return cls(ring, acc)

    def terms(self) -> dict[tuple[int, ...], int]:
        """Copy of the term map."""
        return dict(self._terms)

    def items_desc(self) -> list[tuple[tuple[int, ...], int]]:
        key = self.ring.sort_key
        return sorted(self._terms.items(), key=lambda t: key(t[0]), reverse=True)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], int]]:
        return iter(self.items_desc())

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and not any(next(iter(self._terms))))

    def leading_term(self) -> tuple[tuple[int, ...], int]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        key = self.ring.sort_key
        return max(self._terms.items(), key=lambda t: key(t[0]))

    def total_degree(self) -> int:
        return max((sum(m) for m in self._terms), default=-1)

    def variables(self) -> set[str]:
        used = set()
        for m in self._terms:
            for name, e in zip(self.ring.vars, m):
                if e:
                    used.add(name)
        return used

    # arithmetic

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise ValidationError("polynomials from different rings")
            return other
        if isinstance(other, int):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.ring.p
        acc = dict(self._terms)
        for m, c in other._terms.items():
            v = (acc.get(m, 0) + c) % p
            if v:
                acc[m] = v
            else:
                acc.pop(m, None)
        return Polynomial(self.ring, acc)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        p = self.ring.p
        return Polynomial(self.ring, {m: p - c for m, c in self._terms.items()})

    def __sub__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return self.ring.zero()
        p = self.ring.p
        acc: dict[tuple[int, ...], int] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                acc[m] = (acc.get(m, 0) + c1 * c2) % p
        for m in [m for m, c in acc.items() if not c]:
            del acc[m]
        _check_top(acc)
        return Polynomial(self.ring, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale_monomial(self, exps: Sequence[int], coeff: int = 1) -> Polynomial:
        p = self.ring.p
        coeff %= p
        if not coeff:
            return self.ring.zero()
        out = {}
        for m, c in self._terms.items():
            out[tuple(a + b for a, b in zip(m, exps))] = c * coeff % p
        _check_top(out)
        return Polynomial(self.ring, out)

    def evaluate(self, point: Mapping[str, int]) -> int:
        p = self.ring.p
        vals = [point[v] % p for v in self.ring.vars]
        total = 0
        for m, c in self._terms.items():
            t = c
            for v, e in zip(vals, m):
                if e:
                    t = t * pow(v, e, p) % p
            total += t
        return total % p

    def change_ring(self, ring: RingSpec) -> Polynomial:
        """Embed into a ring whose variables extend this ring's variables."""
        if ring.p != self.ring.p:
            raise ValidationError("characteristic mismatch")
        idx = []
        for v in self.ring.vars:
            if v not in ring.vars:
                raise ValidationError(f"variable {v!r} missing from target ring")
            idx.append(ring.vars.index(v))
        out = {}
        for m, c in self._terms.items():
            e = [0] * ring.nvars
            for i, a in zip(idx, m):
                e[i] = a
            out[tuple(e)] = c
        return Polynomial(ring, out)

    # comparison and printing

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = self.ring.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring == other.ring and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._terms.items())))
        return self._hash

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.items_desc():
            factors = []
            for name, e in zip(self.ring.vars, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r} in {self.ring})"


# parsing

_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[*^+])|(?P<bad>\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            break
        kind = m.lastgroup
        val = m.group(kind)
        tokens.append((kind, val, m.start(kind)))
        pos = m.end()
    return tokens


def parse_poly(text: str, ring: RingSpec) -> Polynomial:
    """Parse ``expr := term ('+' term)*`` with ``term := coeff? ('*'? var ('^' nat)?)*``.

    Coefficients are non-negative integers reduced mod p.  Errors carry the
    0-based character position of the offending token.
    """
    if not isinstance(text, str):
        raise PolyParseError("polynomial must be given as a string", 0, "type")
    tokens = _tokenize(text)
    if not tokens:
        raise PolyParseError("empty input", 0, "empty")
    for kind, val, pos in tokens:
        if kind == "bad":
            raise PolyParseError(f"unexpected character {val!r}", pos, "syntax")

    n = ring.nvars
    p = ring.p
    acc: dict[tuple[int, ...], int] = {}
    i = 0
    end_pos = len(text)

    def peek(k: int = 0):
        return tokens[i + k] if i + k < len(tokens) else None

    while True:
        start = peek()
        if start is None or start[1] == "+":
            where = start[2] if start else end_pos
            raise PolyParseError("empty term", where, "syntax")
        coeff = 1
        exps = [0] * n
        seen_factor = False
        if start[0] == "int":
            coeff = int(start[1])
            i += 1
            seen_factor = True
        while True:
            tok = peek()
            if tok is None or tok[1] == "+":
                break
            star = False
            if tok[1] == "*":
                star = True
                i += 1
                tok = peek()
                if tok is None:
                    raise PolyParseError("expected a variable after '*'", end_pos, "syntax")
            if tok[0] == "int":
                raise PolyParseError("coefficient must come first in a term", tok[2], "syntax")
            if tok[0] != "name":
                raise PolyParseError(f"unexpected {tok[1]!r}", tok[2], "syntax")
            if tok[1] not in ring.vars:
                raise PolyParseError(f"unknown variable {tok[1]!r}", tok[2], "unknown_variable")
            if star and not seen_factor:
                raise PolyParseError("term cannot start with '*'", tok[2] - 1, "syntax")
            vi = ring.vars.index(tok[1])
            i += 1
            e = 1
            nxt = peek()
            if nxt is not None and nxt[1] == "^":
                i += 1
                ex = peek()
                if ex is None or ex[0] != "int":
                    where = ex[2] if ex else end_pos
                    raise PolyParseError("malformed exponent", where, "malformed_exponent")
                e = int(ex[1])
                if e > EXP_LIMIT:
                    raise PolyParseError("exponent exceeds the 32-bit limit", ex[2], "malformed_exponent")
                i += 1
                after = peek()
                if after is not None and after[1] == "^":
                    raise PolyParseError("malformed exponent", after[2], "malformed_exponent")
            exps[vi] += e
            seen_factor = True
        key = tuple(exps)
        _check_exps(key)
        v = (acc.get(key, 0) + coeff) % p
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)
        tok = peek()
        if tok is None:
            break
        i += 1  # the '+'
        if peek() is None:
            raise PolyParseError("empty term", end_pos, "syntax")
    return Polynomial(ring, acc)


# Frobenius

def frobenius_power(f: Polynomial, e: int) -> Polynomial:
    """Return ``f^(p^e)`` by scaling every exponent by ``p^e``."""
    if not isinstance(e, int) or e < 0:
        raise ValueError("e must be a non-negative integer")
    if e == 0 or not f._terms:
        return f
    q = f.ring.p**e
    top = max(max(m) for m in f._terms)
    if top * q > EXP_LIMIT:
        raise OverflowFailure(f"frobenius power p^{e} overflows exponent {top}")
    return Polynomial(f.ring, {tuple(a * q for a in m): c for m, c in f._terms.items()})


class PolyMatrix:
    """Rectangular matrix of polynomials; columns are elements of R^rows."""

    __slots__ = ("ring", "nrows", "ncols", "_rows")

    def __init__(self, ring: RingSpec, rows: Sequence[Sequence[Polynomial]], ncols: int | None = None):
        self.ring = ring
        self._rows = tuple(tuple(r) for r in rows)
        self.nrows = len(self._rows)
        if self.nrows:
            width = len(self._rows[0])
            if any(len(r) != width for r in self._rows):
                raise ValidationError("matrix rows have different lengths")
            if ncols is not None and ncols != width:
                raise ValidationError("declared column count does not match rows")
            self.ncols = width
        else:
            self.ncols = ncols or 0
        for r in self._rows:
            for x in r:
                if not isinstance(x, Polynomial) or x.ring != ring:
                    raise ValidationError("matrix entries must be polynomials of the matrix ring")

    @classmethod
    def from_columns(cls, ring: RingSpec, cols: Sequence[Sequence[Polynomial]], nrows: int) -> PolyMatrix:
        cols = [tuple(c) for c in cols]
        for c in cols:
            if len(c) != nrows:
                raise ValidationError("column length does not match row count")
        rows = [[c[i] for c in cols] for i in range(nrows)]
        return cls(ring, rows, ncols=len(cols))

    @classmethod
    def identity(cls, ring: RingSpec, n: int) -> PolyMatrix:
        one, zero = ring.one(), ring.zero()
        return cls(ring, [[one if i == j else zero for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def zeros(cls, ring: RingSpec, nrows: int, ncols: int) -> PolyMatrix:
        zero = ring.zero()
        return cls(ring, [[zero] * ncols for _ in range(nrows)], ncols=ncols)

    @classmethod
    def diagonal(cls, ring: RingSpec, entries: Sequence[Polynomial]) -> PolyMatrix:
        n = len(entries)
        zero = ring.zero()
        return cls(ring, [[entries[i] if i == j else zero for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def parse(cls, ring: RingSpec, rows: Sequence[Sequence[str]]) -> PolyMatrix:
        return cls(ring, [[parse_poly(s, ring) for s in r] for r in rows])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def rows(self) -> tuple[tuple[Polynomial, ...], ...]:
        return self._rows

    def entry(self, i: int, j: int) -> Polynomial:
        return self._rows[i][j]

    def column(self, j: int) -> tuple[Polynomial, ...]:
        return tuple(r[j] for r in self._rows)

    def columns(self) -> list[tuple[Polynomial, ...]]:
        return [self.column(j) for j in range(self.ncols)]

    def transpose(self) -> PolyMatrix:
        return PolyMatrix(self.ring, [list(c) for c in self.columns()], ncols=self.nrows)

    def map_entries(self, fn) -> PolyMatrix:
        return PolyMatrix(self.ring, [[fn(x) for x in r] for r in self._rows], ncols=self.ncols)

    def apply(self, vec: Sequence[Polynomial]) -> tuple[Polynomial, ...]:
        if len(vec) != self.ncols:
            raise ValidationError(f"vector of length {len(vec)} does not fit {self.nrows}x{self.ncols} matrix")
        zero = self.ring.zero()
        out = []
        for r in self._rows:
            s = zero
            for a, b in zip(r, vec):
                if a and b:
                    s = s + a * b
            out.append(s)
        return tuple(out)

    def __matmul__(self, other: PolyMatrix) -> PolyMatrix:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if self.ncols != other.nrows:
            raise ValidationError(f"cannot compose {self.shape} with {other.shape}")
        cols = [self.apply(c) for c in other.columns()]
        return PolyMatrix.from_columns(self.ring, cols, self.nrows)

    def scale(self, f: Polynomial) -> PolyMatrix:
        return self.map_entries(lambda x: x * f)

    def hstack(self, other: PolyMatrix) -> PolyMatrix:
        if self.nrows != other.nrows:
            raise ValidationError("hstack needs equal row counts")
        return PolyMatrix.from_columns(self.ring, self.columns() + other.columns(), self.nrows)

    def is_zero(self) -> bool:
        return all(not x for r in self._rows for x in r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.ring == other.ring and self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.ring, self.shape, self._rows))

    def to_strings(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self._rows]

    def __repr__(self) -> str:
        return f"PolyMatrix({self.nrows}x{self.ncols}, {self.to_strings()})"


def bracket_power(m: PolyMatrix, e: int) -> PolyMatrix:
    """Entrywise ``p^e``-th powers."""
    if e == 0:
        return m
    return m.map_entries(lambda x: frobenius_power(x, e))
