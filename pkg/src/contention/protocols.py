"""Protocol decision rules for the slotted contention game.

Three families are provided:

* AgeBased -- transmit with probability p at the schedule's non-trivial
  slots and probability 1 everywhere else.  Ignores history.
* Deadline -- transmit with probability 1 at every slot >= t0; before
  the deadline a configurable PreRule applies.  Deadline(1) is the
  persistent protocol.
* ConstantProb -- transmit with a fixed probability q at every slot.

All rules see the player's personal attempt history so the engine stays
uniform over history-dependent rules, even though none of the built-in
families consults it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .schedule import (
    Schedule,
    build_schedule,
    format_rational,
    parse_rational,
    transmission_probability,
)


class ContractViolationError(ValueError):
    """A decision rule was queried outside its contract."""


class PersonalHistory:
    """Per-player attempt record, run-length encoded.

    Long stretches of identical behavior (e.g. forced transmissions at
    trivial slots) are stored as runs so trials over millions of slots
    stay cheap.  Length always equals the number of elapsed slots while
    the player was pending.
    """

    __slots__ = ("_runs", "_length", "pending")

    def __init__(self):
        self._runs: list[list[int]] = []  # [bit, count]
        self._length = 0
        self.pending = True

    def append(self, bit: int) -> None:
        self.extend(bit, 1)

    def extend(self, bit: int, count: int) -> None:
        if count <= 0:
            return
        if self._runs and self._runs[-1][0] == bit:
            self._runs[-1][1] += count
        else:
            self._runs.append([bit, count])
        self._length += count

    def __len__(self) -> int:
        return self._length

    def bits(self) -> list[int]:
        out: list[int] = []
        for bit, count in self._runs:
            out.extend([bit] * count)
        return out


@dataclass(frozen=True)
class Quiet:
    """Pre-deadline rule: never transmit."""


@dataclass(frozen=True)
class FixedProb:
    """Pre-deadline rule: transmit with a fixed probability."""

    q: float


@dataclass(frozen=True)
class FollowAgeBased:
    """Pre-deadline rule: behave like the age-based protocol."""

    schedule: Schedule
    p: float


PreRule = Union[Quiet, FixedProb, FollowAgeBased]


@dataclass(frozen=True)
class AgeBased:
    schedule: Schedule
    p: float


@dataclass(frozen=True)
class Deadline:
    t0: int
    pre: PreRule = field(default_factory=Quiet)


@dataclass(frozen=True)
class ConstantProb:
    q: float


ProtocolSpec = Union[AgeBased, Deadline, ConstantProb]


def _validate_history(history: PersonalHistory, t: int) -> None:
    if not history.pending:
        raise ContractViolationError("decision rule queried for a non-pending player")
    if len(history) != t - 1:
        raise ContractViolationError(
            f"history length {len(history)} inconsistent with slot {t}"
        )


def decision_probability(spec: ProtocolSpec, history: PersonalHistory, t: int) -> float:
    """Transmission probability of a pending player at slot t."""
    _validate_history(history, t)
    if isinstance(spec, AgeBased):
        return transmission_probability(spec.schedule, spec.p, t)
    if isinstance(spec, Deadline):
        if t >= spec.t0:
            return 1.0
        pre = spec.pre
        if isinstance(pre, Quiet):
            return 0.0
        if isinstance(pre, FixedProb):
            return pre.q
        return transmission_probability(pre.schedule, pre.p, t)
    if isinstance(spec, ConstantProb):
        return spec.q
    raise TypeError(f"unknown protocol spec {spec!r}")


def next_prob_change(spec: ProtocolSpec, t: int) -> int | None:
    """Earliest slot > t where the rule's probability can differ from its
    value at t, or None if it is constant from t on (within the schedule
    horizon for age-based rules; callers must pre-extend schedules).
    """
    if isinstance(spec, ConstantProb):
        return None
    if isinstance(spec, AgeBased):
        return _age_based_change(spec.schedule, spec.p, t)
    if isinstance(spec, Deadline):
        if t >= spec.t0:
            return None
        pre = spec.pre
        if isinstance(pre, FollowAgeBased):
            change = _age_based_change(pre.schedule, pre.p, t)
            if change is not None and change < spec.t0:
                return change
        return spec.t0
    raise TypeError(f"unknown protocol spec {spec!r}")


def _age_based_change(sched: Schedule, p: float, t: int) -> int | None:
    if p == 1.0:
        return None
    if sched.nontrivial_index(t) is not None:
        return t + 1
    return sched.next_nontrivial_after(t)


def is_anonymous(profile: list[ProtocolSpec]) -> bool:
    """True iff every player runs a structurally identical rule."""
    if not profile:
        raise ContractViolationError("empty protocol profile")
    first = profile[0]
    return all(spec == first for spec in profile[1:])


# --- JSON config -----------------------------------------------------------

def spec_to_json(spec: ProtocolSpec) -> dict:
    if isinstance(spec, AgeBased):
        return {"type": "age_based", "c": format_rational(spec.schedule.c), "p": spec.p}
    if isinstance(spec, Deadline):
        return {"type": "deadline", "t0": spec.t0, "pre": _pre_to_json(spec.pre)}
    if isinstance(spec, ConstantProb):
        return {"type": "constant_prob", "q": spec.q}
    raise TypeError(f"unknown protocol spec {spec!r}")


def _pre_to_json(pre: PreRule) -> dict:
    if isinstance(pre, Quiet):
        return {"type": "quiet"}
    if isinstance(pre, FixedProb):
        return {"type": "fixed_prob", "q": pre.q}
    return {"type": "follow_age_based", "c": format_rational(pre.schedule.c), "p": pre.p}


def spec_from_json(data: dict) -> ProtocolSpec:
    kind = data["type"]
    if kind == "age_based":
        return AgeBased(schedule=build_schedule(parse_rational(data["c"]), 8), p=float(data["p"]))
    if kind == "deadline":
        return Deadline(t0=int(data["t0"]), pre=_pre_from_json(data.get("pre", {"type": "quiet"})))
    if kind == "constant_prob":
        return ConstantProb(q=float(data["q"]))
    raise ValueError(f"unknown protocol type {kind!r}")


def _pre_from_json(data: dict) -> PreRule:
    kind = data["type"]
    if kind == "quiet":
        return Quiet()
    if kind == "fixed_prob":
        return FixedProb(q=float(data["q"]))
    if kind == "follow_age_based":
        return FollowAgeBased(schedule=build_schedule(parse_rational(data["c"]), 8), p=float(data["p"]))
    raise ValueError(f"unknown pre-deadline rule {kind!r}")


def profile_to_json(profile: list[ProtocolSpec]) -> dict:
    return {"players": [spec_to_json(spec) for spec in profile]}


def profile_from_json(data: dict) -> list[ProtocolSpec]:
    return [spec_from_json(entry) for entry in data["players"]]
