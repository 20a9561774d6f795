"""Abstract value lattice: intervals, string sets, bool sets.

The lattice is deliberately shallow. A variable is one of:

- ``IntRange(Interval)`` — integer in [lo, hi], None meaning ±infinity
- ``StrSet(values)``     — string drawn from a finite literal set, or any
  string at all (``values is None``, the TopStr element)
- ``BoolSet(values)``    — subset of {True, False}
- ``FLOAT_TOP``          — some float
- ``TOP``                — could be anything

Joins across different variants collapse to TOP. There is no explicit
bottom: unreachable states are represented as absent environments and
unbound variables as absent keys, so meets that become empty return None
and the caller prunes the path.
"""
from __future__ import annotations

from dataclasses import dataclass

# Cap on how many strings a StrSet may track before collapsing to TopStr.
MAX_STRSET = 8


@dataclass(frozen=True)
class Interval:
    """Integer interval with None as -inf (lo) / +inf (hi). lo <= hi."""

    lo: int | None = None
    hi: int | None = None

    def __post_init__(self) -> None:
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def const(cls, n: int) -> "Interval":
        return cls(n, n)

    @classmethod
    def top(cls) -> "Interval":
        return cls(None, None)

    def is_const(self) -> bool:
        return self.lo is not None and self.lo == self.hi

    def contains(self, n: int) -> bool:
        if self.lo is not None and n < self.lo:
            return False
        return self.hi is None or n <= self.hi

    def join(self, other: "Interval") -> "Interval":
        lo = None if self.lo is None or other.lo is None else min(self.lo, other.lo)
        hi = None if self.hi is None or other.hi is None else max(self.hi, other.hi)
        return Interval(lo, hi)

    def meet(self, other: "Interval") -> "Interval | None":
        """Greatest lower bound, or None when the intersection is empty."""
        lo = other.lo if self.lo is None else (
            self.lo if other.lo is None else max(self.lo, other.lo))
        hi = other.hi if self.hi is None else (
            self.hi if other.hi is None else min(self.hi, other.hi))
        if lo is not None and hi is not None and lo > hi:
            return None
        return Interval(lo, hi)

    def widen(self, newer: "Interval") -> "Interval":
        """Drop whichever bound is still growing to ±infinity."""
        lo = self.lo
        if newer.lo is None or (lo is not None and newer.lo < lo):
            lo = None
        hi = self.hi
        if newer.hi is None or (hi is not None and newer.hi > hi):
            hi = None
        return Interval(lo, hi)

    def covers(self, other: "Interval") -> bool:
        lo_ok = self.lo is None or (other.lo is not None and self.lo <= other.lo)
        hi_ok = self.hi is None or (other.hi is not None and self.hi >= other.hi)
        return lo_ok and hi_ok

    # -- arithmetic --

    def neg(self) -> "Interval":
        return Interval(None if self.hi is None else -self.hi,
                        None if self.lo is None else -self.lo)

    def add(self, other: "Interval") -> "Interval":
        lo = None if self.lo is None or other.lo is None else self.lo + other.lo
        hi = None if self.hi is None or other.hi is None else self.hi + other.hi
        return Interval(lo, hi)

    def sub(self, other: "Interval") -> "Interval":
        return self.add(other.neg())

    def mul(self, other: "Interval") -> "Interval":
        corners = []
        for a in (self.lo, self.hi):
            for b in (other.lo, other.hi):
                if a is None or b is None:
                    return Interval.top()
                corners.append(a * b)
        return Interval(min(corners), max(corners))

    def floordiv(self, other: "Interval") -> "Interval":
        # Only precise when the divisor has a definite sign and all four
        # corners are finite; anything else goes to top.
        if other.lo is not None and other.lo >= 1 or \
           other.hi is not None and other.hi <= -1:
            if None not in (self.lo, self.hi, other.lo, other.hi):
                corners = [a // b for a in (self.lo, self.hi)
                           for b in (other.lo, other.hi)]
                return Interval(min(corners), max(corners))
        return Interval.top()

    def mod(self, other: "Interval") -> "Interval":
        # Floor-mod result takes the divisor's sign.
        if other.lo is not None and other.lo >= 1 and other.hi is not None:
            return Interval(0, other.hi - 1)
        if other.hi is not None and other.hi <= -1 and other.lo is not None:
            return Interval(other.lo + 1, 0)
        return Interval.top()

    def __str__(self) -> str:
        lo = "-inf" if self.lo is None else str(self.lo)
        hi = "+inf" if self.hi is None else str(self.hi)
        return f"[{lo}, {hi}]"


class Top:
    """Any value at all."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Top"


class FloatTop:
    """Some float; the analysis tracks no float precision."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "FloatTop"


TOP = Top()
FLOAT_TOP = FloatTop()


@dataclass(frozen=True)
class IntRange:
    iv: Interval

    @classmethod
    def const(cls, n: int) -> "IntRange":
        return cls(Interval.const(n))

    def __repr__(self) -> str:
        return f"IntRange{self.iv}"


@dataclass(frozen=True)
class StrSet:
    """values is a frozenset of possible literals, or None for TopStr."""

    values: frozenset[str] | None

    @classmethod
    def of(cls, *items: str) -> "StrSet":
        return cls(frozenset(items))

    @property
    def is_top(self) -> bool:
        return self.values is None

    def __repr__(self) -> str:
        if self.values is None:
            return "StrSet(TopStr)"
        return f"StrSet({sorted(self.values)!r})"


TOP_STR = StrSet(None)


@dataclass(frozen=True)
class BoolSet:
    values: frozenset[bool]

    @classmethod
    def of(cls, *items: bool) -> "BoolSet":
        return cls(frozenset(items))

    def __repr__(self) -> str:
        return f"BoolSet({sorted(self.values)})"


BOTH_BOOLS = BoolSet(frozenset((False, True)))

AbstractValue = object  # IntRange | StrSet | BoolSet | FloatTop | Top


def join_values(a, b):
    """Least upper bound of two abstract values (different variants -> TOP)."""
    if a is None:
        return b
    if b is None:
        return a
    if a is TOP or b is TOP:
        return TOP
    if isinstance(a, IntRange) and isinstance(b, IntRange):
        return IntRange(a.iv.join(b.iv))
    if isinstance(a, StrSet) and isinstance(b, StrSet):
        if a.is_top or b.is_top:
            return TOP_STR
        merged = a.values | b.values
        return TOP_STR if len(merged) > MAX_STRSET else StrSet(merged)
    if isinstance(a, BoolSet) and isinstance(b, BoolSet):
        return BoolSet(a.values | b.values)
    if a is FLOAT_TOP and b is FLOAT_TOP:
        return FLOAT_TOP
    return TOP


def widen_values(older, newer):
    """Widening: like join, but growing intervals jump to ±infinity."""
    if older is None:
        return newer
    if isinstance(older, IntRange) and isinstance(newer, IntRange):
        return IntRange(older.iv.widen(newer.iv))
    return join_values(older, newer)


def value_covers(abstract, concrete) -> bool:
    """Does the abstract value admit this concrete (interpreter) value?"""
    if abstract is TOP:
        return True
    if type(concrete) is bool:
        return isinstance(abstract, BoolSet) and concrete in abstract.values
    if type(concrete) is int:
        return isinstance(abstract, IntRange) and abstract.iv.contains(concrete)
    if type(concrete) is float:
        return abstract is FLOAT_TOP
    if type(concrete) is str:
        return isinstance(abstract, StrSet) and (
            abstract.is_top or concrete in abstract.values)
    return False


def values_equal(a, b) -> bool:
    if a is None or b is None:
        return a is b
    return a == b if type(a) is type(b) else a is b
