"""Slotted-channel game simulation with reproducible Monte Carlo.

Each trial plays out the game slot by slot: every pending player draws a
transmission attempt from her protocol's decision probability; exactly
one transmitter in a slot succeeds and exits, any other outcome leaves
the pending set unchanged.  Trials are censored at a slot cap because
some profiles (a persistent deviator against the age-based protocol)
have infinite expected latency.

Randomness is counter-based: every attempt draw is a pure hash of
(seed, trial_index, player, slot), so results are bit-identical for a
fixed (config, trials) regardless of execution order or parallelism.

Stretches of slots whose outcome is forced (all pending probabilities 0
or 1, with no lone transmitter) are fast-forwarded in one step; this is
what makes slot caps of 10^6 affordable when the age-based protocol
collides deterministically at every trivial slot.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .protocols import (
    AgeBased,
    Deadline,
    FollowAgeBased,
    PersonalHistory,
    ProtocolSpec,
    decision_probability,
    next_prob_change,
)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    # splitmix64 finalizer
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def attempt_uniform(seed: int, trial_index: int, player: int, slot: int) -> float:
    """Deterministic uniform in [0, 1) for one attempt draw."""
    z = _mix64(seed)
    z = _mix64(z ^ ((trial_index * _GOLDEN) & _MASK64))
    z = _mix64(z ^ ((player * _GOLDEN) & _MASK64))
    z = _mix64(z ^ ((slot * _GOLDEN) & _MASK64))
    return (z >> 11) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class GameConfig:
    n: int
    profile: tuple[ProtocolSpec, ...]
    seed: int
    slot_cap: int = 10**6

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one player")
        if len(self.profile) != self.n:
            raise ValueError(f"profile length {len(self.profile)} != n={self.n}")
        if self.slot_cap < 1:
            raise ValueError("slot_cap must be >= 1")


@dataclass(frozen=True)
class TrialOutcome:
    latency: tuple  # per-player int or None when censored
    censored: tuple
    slots_run: int


@dataclass(frozen=True)
class LatencyStats:
    trials: int
    mean: float  # lower bound on the true mean if censored_count > 0
    median: float
    q90: float
    q99: float
    censored_count: int
    ci95_halfwidth: float

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "mean": self.mean,
            "median": self.median,
            "q90": self.q90,
            "q99": self.q99,
            "censored_count": self.censored_count,
            "ci95_halfwidth": self.ci95_halfwidth,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LatencyStats":
        return cls(
            trials=data["trials"],
            mean=data["mean"],
            median=data["median"],
            q90=data["q90"],
            q99=data["q99"],
            censored_count=data["censored_count"],
            ci95_halfwidth=data["ci95_halfwidth"],
        )


def _ensure_horizons(config: GameConfig) -> None:
    for spec in config.profile:
        if isinstance(spec, AgeBased):
            spec.schedule.ensure_covers_time(config.slot_cap)
        elif isinstance(spec, Deadline) and isinstance(spec.pre, FollowAgeBased):
            spec.pre.schedule.ensure_covers_time(min(config.slot_cap, spec.t0))


def run_trial(config: GameConfig, trial_index: int) -> TrialOutcome:
    """Play one game to completion or the slot cap."""
    _ensure_horizons(config)
    n, seed, cap = config.n, config.seed, config.slot_cap
    profile = config.profile
    histories = [PersonalHistory() for _ in range(n)]
    pending = list(range(n))
    latency: list = [None] * n
    t = 1
    while pending and t <= cap:
        probs = [decision_probability(profile[i], histories[i], t) for i in pending]
        if all(pr == 0.0 or pr == 1.0 for pr in probs):
            ones = sum(1 for pr in probs if pr == 1.0)
            if ones == 1:
                # forced success, no draws needed
                for i, pr in zip(pending, probs):
                    histories[i].append(1 if pr == 1.0 else 0)
                winner = pending[probs.index(1.0)]
                histories[winner].pending = False
                latency[winner] = t
                pending.remove(winner)
                t += 1
                continue
            # forced collision or idle: repeat until some rule can change
            nxt = cap + 1
            for i in pending:
                change = next_prob_change(profile[i], t)
                if change is not None and change < nxt:
                    nxt = change
            span = nxt - t
            for i, pr in zip(pending, probs):
                histories[i].extend(1 if pr == 1.0 else 0, span)
            t = nxt
            continue
        transmitters = []
        for i, pr in zip(pending, probs):
            if pr == 1.0:
                hit = True
            elif pr == 0.0:
                hit = False
            else:
                hit = attempt_uniform(seed, trial_index, i, t) < pr
            histories[i].append(1 if hit else 0)
            if hit:
                transmitters.append(i)
        if len(transmitters) == 1:
            winner = transmitters[0]
            histories[winner].pending = False
            latency[winner] = t
            pending.remove(winner)
        t += 1
    return TrialOutcome(
        latency=tuple(latency),
        censored=tuple(latency[i] is None for i in range(n)),
        slots_run=min(t - 1, cap),
    )


def _run_range(config: GameConfig, start: int, stop: int) -> list[TrialOutcome]:
    return [run_trial(config, idx) for idx in range(start, stop)]


def run_trials(config: GameConfig, trials: int, n_jobs: int = 1) -> list[TrialOutcome]:
    """All trial outcomes in trial-index order, optionally in parallel.

    The counter-based draws make the result independent of how trials
    are scheduled across workers.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n_jobs <= 1 or trials < 2 * n_jobs:
        return _run_range(config, 0, trials)
    _ensure_horizons(config)  # extend once up front; shared reads after
    chunk = (trials + n_jobs - 1) // n_jobs
    ranges = [(i, min(i + chunk, trials)) for i in range(0, trials, chunk)]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        parts = list(pool.map(lambda r: _run_range(config, *r), ranges))
    out: list[TrialOutcome] = []
    for part in parts:
        out.extend(part)
    return out


def _quantile(sorted_values: list, q: float) -> float:
    idx = max(0, math.ceil(q * len(sorted_values)) - 1)
    return float(sorted_values[idx])


def summarize(outcomes: list[TrialOutcome], focus_player: int, slot_cap: int) -> LatencyStats:
    """Aggregate one player's latencies; censored trials count at the cap,
    so the mean is a lower bound on the true mean whenever censoring
    occurred."""
    values = []
    censored_count = 0
    for out in outcomes:
        lat = out.latency[focus_player]
        if lat is None:
            censored_count += 1
            values.append(slot_cap)
        else:
            values.append(lat)
    trials = len(values)
    mean = sum(values) / trials
    ordered = sorted(values)
    sd = statistics.stdev(values) if trials > 1 else 0.0
    return LatencyStats(
        trials=trials,
        mean=mean,
        median=_quantile(ordered, 0.5),
        q90=_quantile(ordered, 0.9),
        q99=_quantile(ordered, 0.99),
        censored_count=censored_count,
        ci95_halfwidth=1.96 * sd / math.sqrt(trials),
    )


def monte_carlo(config: GameConfig, trials: int, focus_player: int = 0, n_jobs: int = 1) -> LatencyStats:
    """Monte Carlo latency estimate for one player.

    Bit-identical for fixed (config, trials, focus_player) regardless of
    n_jobs: outcomes are aggregated in trial-index order.
    """
    outcomes = run_trials(config, trials, n_jobs=n_jobs)
    return summarize(outcomes, focus_player, config.slot_cap)


def empirical_distribution(config: GameConfig, trials: int, focus_player: int = 0, n_jobs: int = 1) -> dict[int, float]:
    """Empirical latency pmf for one player, normalized by total trials.

    Censored trials contribute no support point, so the frequencies sum
    to (trials - censored) / trials.
    """
    outcomes = run_trials(config, trials, n_jobs=n_jobs)
    counts = Counter(
        out.latency[focus_player] for out in outcomes if out.latency[focus_player] is not None
    )
    return {lat: cnt / trials for lat, cnt in sorted(counts.items())}


def outcomes_to_csv_rows(outcomes: list[TrialOutcome]):
    """Yield (trial_index, player, latency, censored) rows for export."""
    for idx, out in enumerate(outcomes):
        for player, lat in enumerate(out.latency):
            yield idx, player, "" if lat is None else lat, int(out.censored[player])
