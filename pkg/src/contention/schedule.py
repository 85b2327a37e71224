"""Exact transmission schedules for the age-based backoff protocol.

A schedule is the increasing sequence of "non-trivial" slots

    s_k = sum_{j=0}^{k} floor(2 * c^j),    k = 0, 1, 2, ...

for a rational growth factor c >= 1.  At those slots the protocol
transmits with some probability p < 1; at every other slot it transmits
with probability 1.

All arithmetic here is exact: floor(2 * c^j) is computed as integer
division of 2 * num^j by den^j with unbounded integers, so a schedule
can never drift from what floating-point powering would produce near an
integer boundary.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction


class ScheduleError(ValueError):
    """Base class for schedule construction/query failures."""


class InvalidParameterError(ScheduleError):
    """Growth factor outside the supported range."""


class HorizonExceededError(ScheduleError):
    """A query referenced a slot beyond the precomputed horizon."""


class InvalidArgumentsError(ScheduleError):
    """Malformed index arguments (e.g. k' <= k)."""


def parse_rational(text: str) -> Fraction:
    """Parse "num/den" (or a plain integer / decimal string) exactly."""
    return Fraction(text)


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


class Schedule:
    """Precomputed non-trivial slots for a rational growth factor.

    Immutable from the caller's point of view except for `extend_to`,
    which only appends.  Concurrent readers are safe once construction
    and any needed extension are done.
    """

    def __init__(self, c: Fraction, horizon_k: int):
        c = Fraction(c)
        if c < 1:
            raise InvalidParameterError(f"growth factor must be >= 1, got {c}")
        if horizon_k < 0:
            raise InvalidArgumentsError("horizon_k must be >= 0")
        self.c = c
        self.x: list[int] = []
        self.s: list[int] = []
        # incremental exact powers of num/den
        self._num_pow = 1
        self._den_pow = 1
        self.extend_to(horizon_k)

    @property
    def horizon_k(self) -> int:
        return len(self.x) - 1

    def extend_to(self, horizon_k: int) -> None:
        """Append entries so that x_0..x_horizon_k are available."""
        num, den = self.c.numerator, self.c.denominator
        while len(self.x) <= horizon_k:
            gap = (2 * self._num_pow) // self._den_pow
            self.x.append(gap)
            self.s.append((self.s[-1] if self.s else 0) + gap)
            self._num_pow *= num
            self._den_pow *= den

    def ensure_covers_time(self, t: int) -> None:
        """Extend until the last non-trivial slot is >= t."""
        while self.s[-1] < t:
            self.extend_to(len(self.x))

    def nontrivial_index(self, t: int) -> int | None:
        """Index k with s_k == t, or None if t is a trivial slot."""
        i = bisect_left(self.s, t)
        if i < len(self.s) and self.s[i] == t:
            return i
        return None

    def next_nontrivial_after(self, t: int) -> int | None:
        """Smallest s_k > t within the current horizon, else None."""
        i = bisect_right(self.s, t)
        if i < len(self.s):
            return self.s[i]
        return None

    def __eq__(self, other: object) -> bool:
        # structural identity of the protocol, not of the cached horizon
        if not isinstance(other, Schedule):
            return NotImplemented
        return self.c == other.c

    def __hash__(self) -> int:
        return hash(self.c)

    def __repr__(self) -> str:
        return f"Schedule(c={self.c}, horizon_k={self.horizon_k})"

    def to_json(self) -> dict:
        return {"c": format_rational(self.c), "s": list(self.s), "x": list(self.x)}

    @classmethod
    def from_json(cls, data: dict) -> "Schedule":
        sched = cls(parse_rational(data["c"]), len(data["s"]) - 1)
        if list(sched.s) != list(data["s"]) or list(sched.x) != list(data["x"]):
            raise InvalidArgumentsError("serialized schedule disagrees with exact recomputation")
        return sched


def build_schedule(c: Fraction, horizon_k: int) -> Schedule:
    """Build the exact schedule for growth factor c up to index horizon_k."""
    return Schedule(c, horizon_k)


def transmission_probability(sched: Schedule, p: float, t: int) -> float:
    """Protocol transmission probability at slot t: p on {s_k}, else 1.

    Raises HorizonExceededError beyond the precomputed horizon; the
    caller decides how far to extend.
    """
    if t < 1:
        raise InvalidArgumentsError("slots are numbered from 1")
    if t > sched.s[-1]:
        raise HorizonExceededError(f"slot {t} beyond schedule horizon s_{sched.horizon_k} = {sched.s[-1]}")
    return p if sched.nontrivial_index(t) is not None else 1.0


@dataclass(frozen=True)
class DominationCheck:
    lower: Fraction
    value: int
    upper: Fraction
    holds: bool


def check_domination(sched: Schedule, k: int, k_prime: int, j: int) -> DominationCheck:
    """Exact two-sided geometric comparison of inter-transmission gaps.

    Verifies c^(k'-k-1) (c-1) x_{k+j} <= x_{k'+j} <= c^(k'-k-1) (c+1) x_{k+j}
    in rational arithmetic.  Requires c in [1, 2] and k' > k >= 0, j >= 0.
    """
    if k_prime <= k or k < 0 or j < 0:
        raise InvalidArgumentsError(f"need k' > k >= 0 and j >= 0, got k={k}, k'={k_prime}, j={j}")
    c = sched.c
    if not (1 <= c <= 2):
        raise InvalidArgumentsError(f"domination check requires c in [1, 2], got {c}")
    sched.extend_to(k_prime + j)
    factor = c ** (k_prime - k - 1)
    base = sched.x[k + j]
    value = sched.x[k_prime + j]
    lower = factor * (c - 1) * base
    upper = factor * (c + 1) * base
    return DominationCheck(lower=lower, value=value, upper=upper, holds=lower <= value <= upper)
