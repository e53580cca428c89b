"""Stabilization of increasing chains of submodules and support sets.

Two stopping rules exist.  A *certified* chain stops at the first
consecutive equality because equality there provably persists.  A
*heuristic* chain needs ``stab_window`` consecutive equalities, after which
``stab_window`` further terms are computed as a probe; a probe that finds
growth counts as a violation and the chain keeps going.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Generic, TypeVar

from .errors import ChainViolation, UnstabilizedChain, ValidationError

__all__ = ["ChainConfig", "ChainRecord", "ChainLog", "stabilize"]

T = TypeVar("T")


@dataclass(frozen=True)
class ChainConfig:
    """Limits for chain stabilization.

    ``hard_cap`` bounds Frobenius-level indices; ``j_cap`` bounds power
    indices (saturation exponents, colon chains in f^j) and defaults to
    ``hard_cap``.  With ``certify`` off, heuristic stops skip the probe.
    """

    stab_window: int = 2
    hard_cap: int = 12
    certify: bool = True
    j_cap: int | None = None

    def __post_init__(self) -> None:
        if self.stab_window < 1:
            raise ValidationError("stab_window must be at least 1")
        if self.hard_cap < self.stab_window:
            raise ValidationError("hard_cap must be at least stab_window")
        if self.j_cap is not None and self.j_cap < 1:
            raise ValidationError("j_cap must be positive")

    @property
    def power_cap(self) -> int:
        return self.hard_cap if self.j_cap is None else self.j_cap


@dataclass
class ChainRecord:
    name: str
    kind: str  # "certified" or "heuristic"
    start: int
    stop: int = -1
    last_index: int = -1
    probe_steps: int = 0
    probe_complete: bool = False
    violations: int = 0

    @property
    def certified(self) -> bool:
        # a heuristic stop counts as certified once its probe ran in full
        if self.stop < 0:
            return False
        return self.kind == "certified" or self.probe_complete

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "start": self.start,
            "stop": self.stop,
            "last_index": self.last_index,
            "probe_steps": self.probe_steps,
            "probe_complete": self.probe_complete,
            "violations": self.violations,
            "certified": self.certified,
        }


@dataclass
class ChainLog:
    """Records of every chain evaluated during one computation."""

    records: list[ChainRecord] = field(default_factory=list)

    def add(self, rec: ChainRecord) -> None:
        self.records.append(rec)

    def extend(self, other: ChainLog) -> None:
        self.records.extend(other.records)

    @property
    def violations(self) -> int:
        return sum(r.violations for r in self.records)

    @property
    def certified(self) -> bool:
        return all(r.certified for r in self.records)

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class Stabilized(Generic[T]):
    value: T
    index: int
    record: ChainRecord


def _default_leq(a, b) -> bool:
    return b.contains(a)


def stabilize(
    name: str,
    step: Callable[[int], T],
    cfg: ChainConfig,
    *,
    certified: bool,
    start: int = 0,
    cap: int | None = None,
    leq: Callable[[T, T], bool] = _default_leq,
    log: ChainLog | None = None,
) -> Stabilized[T]:
    """Walk ``step(start), step(start+1), ...`` until it stabilizes.

    ``leq(a, b)`` must decide a <= b; the chain is checked to be increasing at
    every step.  Raises :class:`UnstabilizedChain` when ``cap`` is reached.
    """
    cap = cfg.hard_cap if cap is None else cap
    rec = ChainRecord(name, "certified" if certified else "heuristic", start)
    if log is not None:
        log.add(rec)
    need = 1 if certified else cfg.stab_window
    i = start
    cur = step(i)
    run = 0
    while True:
        if i >= cap:
            rec.last_index = i
            raise UnstabilizedChain(name, i, cur)
        nxt = step(i + 1)
        if not leq(cur, nxt):
            raise ChainViolation(name, i + 1)
        i += 1
        run = run + 1 if leq(nxt, cur) else 0
        cur = nxt
        if run < need:
            continue
        stop = i - run
        if certified:
            rec.stop = stop
            rec.last_index = i
            return Stabilized(cur, stop, rec)
        # probe past the heuristic stop
        grew = False
        probed = 0
        while cfg.certify and probed < cfg.stab_window and i < cap:
            nxt = step(i + 1)
            if not leq(cur, nxt):
                raise ChainViolation(name, i + 1)
            i += 1
            probed += 1
            if not leq(nxt, cur):
                grew = True
                cur = nxt
                break
        rec.last_index = i
        if grew:
            rec.violations += 1
            run = 0
            continue
        rec.stop = stop
        rec.probe_steps = probed
        rec.probe_complete = probed == cfg.stab_window
        return Stabilized(cur, stop, rec)
