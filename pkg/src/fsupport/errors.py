"""Exception hierarchy.  Every error carries a machine-readable ``kind``."""
from __future__ import annotations


class FSupportError(Exception):
    kind = "error"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": str(self)}


class ValidationError(FSupportError, ValueError):
    kind = "validation"


class PolyParseError(ValidationError):
    def __init__(self, message: str, position: int, reason: str = "syntax"):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.reason = reason

    kind = "parse"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": str(self), "position": self.position, "reason": self.reason}


class DimensionError(ValidationError):
    kind = "dimension"


class NotRegularSequence(ValidationError):
    kind = "not_regular"


class OverflowFailure(FSupportError, OverflowError):
    kind = "overflow"


class BudgetExceeded(FSupportError):
    kind = "budget"

    def __init__(self, limit: int):
        super().__init__(f"budget exceeded ({limit} S-pairs)")
        self.limit = limit


class UnstabilizedChain(FSupportError):
    """A chain hit its cap without stabilizing; ``last`` is the final element."""

    kind = "unstabilized"

    def __init__(self, chain: str, index: int, last=None):
        super().__init__(f"chain {chain!r} did not stabilize by index {index}")
        self.chain = chain
        self.index = index
        self.last = last

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": str(self), "chain": self.chain, "index": self.index}


class ChainViolation(FSupportError):
    """A chain that must be increasing was not; signals an engine defect."""

    kind = "chain_violation"

    def __init__(self, chain: str, index: int):
        super().__init__(f"chain {chain!r} is not monotone at index {index}")
        self.chain = chain
        self.index = index


class OracleMismatch(FSupportError):
    kind = "oracle_mismatch"

    def __init__(self, k: int, e: int):
        super().__init__(f"total complex and row complex disagree at k={k}, e={e}")
        self.k = k
        self.e = e

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": str(self), "k": self.k, "e": self.e}
