"""Closed-form latency analysis for the 3-player contention game.

Everything here is a pure function of the protocol parameters (c, p).
Threshold comparisons and the divergence certificates are carried out in
exact rational arithmetic so that feasibility verdicts cannot flip on
floating-point rounding; results are reported as floats where a real
number is all that is needed.

Notation used throughout (per-round non-departure probabilities when
3, 2 players remain, and the persistent deviator's survival rate):

    gamma = 1 - (1-p)^2        a lone scheduled slot fails to clear the
                               persistent deviator
    delta = 1 - 2p(1-p)        neither of 2 pending players departs
    beta  = 1 - 3p(1-p)^2      none of 3 pending players departs
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .schedule import Schedule, build_schedule, format_rational


class AnalysisError(ValueError):
    """Base class for analysis failures."""


class DivergentSeriesError(AnalysisError):
    """Parameters put a series outside its radius of convergence."""


class NoFiniteTruncationError(AnalysisError):
    """No truncation index can satisfy the contraction inequality."""


class InvalidTruncationError(AnalysisError):
    """Truncation index too small: contraction factor >= 1."""


def _as_fraction(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _geom_sum(r: Fraction, n: int) -> Fraction:
    """sum_{i=0}^{n-1} r^i, exact, valid for r == 1 too."""
    if r == 1:
        return Fraction(n)
    return (1 - r**n) / (1 - r)


# --- derived constants and feasibility --------------------------------------

@dataclass(frozen=True)
class DerivedConstants:
    gamma: Fraction
    delta: Fraction
    beta: Fraction

    def to_json(self) -> dict:
        return {
            "gamma": float(self.gamma),
            "delta": float(self.delta),
            "beta": float(self.beta),
        }


def derive_constants(p) -> DerivedConstants:
    """Per-round non-departure probabilities, exactly in p."""
    p = _as_fraction(p)
    if not 0 <= p <= 1:
        raise AnalysisError(f"p must be in [0, 1], got {p}")
    return DerivedConstants(
        gamma=1 - (1 - p) ** 2,
        delta=1 - 2 * p * (1 - p),
        beta=1 - 3 * p * (1 - p) ** 2,
    )


@dataclass(frozen=True)
class FeasibilityReport:
    c: Fraction
    p: Fraction
    thresholds: dict  # name -> Fraction (None when undefined)
    finite_all_P: bool
    persistent_diverges: bool
    feasible: bool

    def to_json(self) -> dict:
        thr = {
            name: None if val is None else {"exact": format_rational(val), "value": float(val)}
            for name, val in self.thresholds.items()
        }
        return {
            "c": format_rational(self.c),
            "p": float(self.p),
            "thresholds": thr,
            "finite_all_P": self.finite_all_P,
            "persistent_diverges": self.persistent_diverges,
            "feasible": self.feasible,
        }


def feasibility(c, p) -> FeasibilityReport:
    """Exact verdict on the parameter region where the protocol works.

    finite_all_P: every player's expected latency is finite when all
    three run the protocol, which needs

        1 < c < min( 1/(1-p), 1/delta, 1/beta, 2 ).

    persistent_diverges: a persistent deviator faces infinite expected
    latency, which needs  1/gamma < c <= 2.  feasible is the conjunction.
    """
    c = _as_fraction(c)
    p = _as_fraction(p)
    if not (0 < p < 1):
        raise AnalysisError(f"p must be in (0, 1), got {p}")
    if c < 1:
        raise AnalysisError(f"c must be >= 1, got {c}")
    consts = derive_constants(p)
    inv_1mp = 1 / (1 - p)
    inv_delta = 1 / consts.delta
    inv_beta = 1 / consts.beta
    persist_lb = None if consts.gamma == 0 else 1 / consts.gamma
    finite_all_P = 1 < c < min(inv_1mp, inv_delta, inv_beta, Fraction(2))
    persistent_diverges = consts.gamma * c > 1 and c <= 2
    return FeasibilityReport(
        c=c,
        p=p,
        thresholds={
            "inv_1mp": inv_1mp,
            "inv_delta": inv_delta,
            "inv_beta": inv_beta,
            "persist_lb": persist_lb,
        },
        finite_all_P=finite_all_P,
        persistent_diverges=persistent_diverges,
        feasible=finite_all_P and persistent_diverges,
    )


# --- closed-form upper bounds ------------------------------------------------

def y1_upper(c, p, k: int) -> float:
    """Closed-form bound on the lone player's scheduled-slot latency tail:

        2cp / ((c-1)(1 - c(1-p))) * (c/(1-p))^k

    Valid for 1 < c < 1/(1-p).
    """
    c = _as_fraction(c)
    p = _as_fraction(p)
    if c == 1:
        raise AnalysisError("c = 1 makes the geometric prefactor 1/(c-1) undefined")
    if c * (1 - p) >= 1:
        raise DivergentSeriesError(f"c(1-p) = {float(c * (1 - p)):.4f} >= 1: series diverges")
    if k < 0:
        raise AnalysisError("k must be >= 0")
    value = 2 * c * p / ((c - 1) * (1 - c * (1 - p))) * (c / (1 - p)) ** k
    return float(value)


def _min_truncation(rate: Fraction, c: Fraction) -> int:
    """Smallest k >= 1 with rate^k c^(k-1) (c+1) < 1."""
    if rate * c >= 1:
        raise NoFiniteTruncationError(
            f"contraction rate {float(rate * c):.4f} >= 1: no finite truncation exists"
        )
    k = 1
    term = rate * (c + 1)
    while term >= 1:
        k += 1
        term *= rate * c
    return k


def min_truncation_k1(c, p) -> int:
    """Smallest truncation making the 2-pending recurrence contract."""
    c = _as_fraction(c)
    consts = derive_constants(p)
    return _min_truncation(consts.delta, c)


def min_truncation_k2(c, p) -> int:
    """Smallest truncation making the 3-pending recurrence contract."""
    c = _as_fraction(c)
    consts = derive_constants(p)
    return _min_truncation(consts.beta, c)


def delta_bound(c, p, k1_prime: int) -> float:
    """Truncated-recurrence upper bound on the 2-pending expected extra
    latency (the quotient with denominator 1 - delta^k1' c^(k1'-1) (c+1)).
    """
    c = _as_fraction(c)
    p = _as_fraction(p)
    if c == 1:
        raise AnalysisError("c = 1 makes the geometric prefactor 1/(c-1) undefined")
    if c * (1 - p) >= 1:
        raise DivergentSeriesError(f"c(1-p) = {float(c * (1 - p)):.4f} >= 1: series diverges")
    if k1_prime < 1:
        raise InvalidTruncationError("truncation index must be >= 1")
    delta = derive_constants(p).delta
    denom = 1 - delta**k1_prime * c ** (k1_prime - 1) * (c + 1)
    if denom <= 0:
        raise InvalidTruncationError(
            f"truncation {k1_prime} too small: contraction factor {float(1 - denom):.4f} >= 1"
        )
    numer = 2 * _geom_sum(delta * c, k1_prime) + (
        2 * c**2 * p**2 / ((c - 1) * (1 - c * (1 - p)))
    ) * _geom_sum(delta * c / (1 - p), k1_prime)
    return float(numer / denom)


def y30_upper(c, p, k1_prime: int) -> float:
    """Closed-form upper bound on a fixed player's expected latency when
    everyone runs the protocol:

        (2 + 2p(1-p)^2 (c+1) Delta) / (1 - beta c).
    """
    c = _as_fraction(c)
    p = _as_fraction(p)
    beta = derive_constants(p).beta
    if beta * c >= 1:
        raise DivergentSeriesError(f"beta*c = {float(beta * c):.4f} >= 1: bound diverges")
    bound2 = Fraction(delta_bound(c, p, k1_prime))
    value = (2 + 2 * p * (1 - p) ** 2 * (c + 1) * bound2) / (1 - beta * c)
    return float(value)


@dataclass(frozen=True)
class BoundReport:
    c: Fraction
    p: Fraction
    k1_min: int
    k1_used: int
    delta_bound: float
    y30_upper: float
    y1k_upper: list  # [(k, bound)]

    def to_json(self) -> dict:
        return {
            "c": format_rational(self.c),
            "p": float(self.p),
            "k1_min": self.k1_min,
            "k1_used": self.k1_used,
            "delta_bound": self.delta_bound,
            "y30_upper": self.y30_upper,
            "y1k_upper": [{"k": k, "bound": b} for k, b in self.y1k_upper],
        }


def bound_report(c, p, k1_prime: int | None = None, k_max: int = 10) -> BoundReport:
    """All closed-form upper bounds in one report."""
    c = _as_fraction(c)
    p = _as_fraction(p)
    k1_min = min_truncation_k1(c, p)
    k1_used = k1_min if k1_prime is None else k1_prime
    return BoundReport(
        c=c,
        p=p,
        k1_min=k1_min,
        k1_used=k1_used,
        delta_bound=delta_bound(c, p, k1_used),
        y30_upper=y30_upper(c, p, k1_used),
        y1k_upper=[(k, y1_upper(c, p, k)) for k in range(k_max + 1)],
    )


# --- recurrence interval solver ----------------------------------------------

SEMANTICS = ("literal", "paper-series")


@dataclass(frozen=True)
class ExpectationInterval:
    lower: float
    upper: float
    truncation_K: int
    semantics: str

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "truncation_K": self.truncation_K,
            "semantics": self.semantics,
        }


@dataclass(frozen=True)
class ExpectationTable:
    c: Fraction
    p: Fraction
    semantics: str
    truncation_K: int
    y1: list
    y2: list
    y3: list

    def to_json(self) -> dict:
        return {
            "c": format_rational(self.c),
            "p": float(self.p),
            "semantics": self.semantics,
            "truncation_K": self.truncation_K,
            "y1": [iv.to_json() for iv in self.y1],
            "y2": [iv.to_json() for iv in self.y2],
            "y3": [iv.to_json() for iv in self.y3],
        }


def _lone_series_interval(sched: Schedule, c: Fraction, p: Fraction, k: int, terms: int = 80) -> tuple:
    """Enclosure of the lone player's expected extra latency after the
    (k-1)-th scheduled slot, under the reading where she departs only at
    scheduled slots: sum over ell >= k of (s_ell - s_{k-1}) p (1-p)^(ell-k),
    truncated with a geometric tail bound."""
    sched.extend_to(k + terms)
    s_prev = sched.s[k - 1] if k >= 1 else 0
    q = 1 - p
    partial = Fraction(0)
    weight = p  # p (1-p)^(ell-k)
    for ell in range(k, k + terms + 1):
        partial += (sched.s[ell] - s_prev) * weight
        weight *= q
    r = c * q
    # terms beyond the cutoff: (s_ell - s_prev) <= 2 c^(ell+1) / (c-1)
    tail = (2 * p * c ** (k + 1) / (c - 1)) * r ** (terms + 1) / (1 - r)
    return partial, partial + tail


def solve_expectations(c, p, semantics: str = "literal", truncation_K: int = 60) -> ExpectationTable:
    """Certified enclosures of the expected extra latencies E[Y_{n,k}]
    for n = 1, 2, 3 pending players and k = 0..truncation_K.

    The tail at k = truncation_K is seeded with [0, closed-form bound
    scaled by the geometric domination factor c^(K-1)(c+1)] and the
    linear recurrences

        E[Y_2,i] = x_i + p(1-p)   E[Y_1,i+1] + delta E[Y_2,i+1]
        E[Y_3,i] = x_i + 2p(1-p)^2 E[Y_2,i+1] + beta  E[Y_3,i+1]

    are propagated down to k = 0 in interval arithmetic (all
    coefficients are nonnegative, so endpoints map to endpoints).

    semantics "literal": a lone player succeeds at the next slot, where
    the protocol transmits with probability 1, so E[Y_1,k] = 1.
    semantics "paper-series": the lone player departs only at scheduled
    slots, giving the dominating series enclosed by _lone_series_interval.
    """
    c = _as_fraction(c)
    p = _as_fraction(p)
    if semantics not in SEMANTICS:
        raise AnalysisError(f"semantics must be one of {SEMANTICS}")
    if truncation_K < 1:
        raise AnalysisError("truncation_K must be >= 1")
    report = feasibility(c, p)
    if not report.finite_all_P:
        raise DivergentSeriesError(
            "parameters outside the finite-latency region; no finite enclosure exists"
        )
    consts = derive_constants(p)
    delta, beta = consts.delta, consts.beta
    K = truncation_K
    sched = build_schedule(c, K)

    if semantics == "literal":
        e1 = [(Fraction(1), Fraction(1)) for _ in range(K + 1)]
    else:
        e1 = [_lone_series_interval(sched, c, p, k) for k in range(K + 1)]

    k1 = min_truncation_k1(c, p)
    bound2 = Fraction(delta_bound(c, p, k1))
    bound3 = Fraction(y30_upper(c, p, k1))
    grow = c ** (K - 1) * (c + 1)
    e2: list = [None] * (K + 1)
    e3: list = [None] * (K + 1)
    e2[K] = (Fraction(0), bound2 * grow)
    e3[K] = (Fraction(0), bound3 * grow)
    a2 = p * (1 - p)
    a3 = 2 * p * (1 - p) ** 2
    for i in range(K - 1, -1, -1):
        x_i = sched.x[i]
        e2[i] = (
            x_i + a2 * e1[i + 1][0] + delta * e2[i + 1][0],
            x_i + a2 * e1[i + 1][1] + delta * e2[i + 1][1],
        )
        e3[i] = (
            x_i + a3 * e2[i + 1][0] + beta * e3[i + 1][0],
            x_i + a3 * e2[i + 1][1] + beta * e3[i + 1][1],
        )

    def pack(rows):
        return [
            ExpectationInterval(lower=float(lo), upper=float(hi), truncation_K=K, semantics=semantics)
            for lo, hi in rows
        ]

    return ExpectationTable(
        c=c, p=p, semantics=semantics, truncation_K=K,
        y1=pack(e1), y2=pack(e2), y3=pack(e3),
    )


# --- persistent deviator ------------------------------------------------------

@dataclass(frozen=True)
class PersistentDistribution:
    c: Fraction
    p: Fraction
    support: list  # s_z, exact ints
    pmf: list  # Fraction: gamma^z (1-p)^2
    partial_expectations: list  # Fraction, cumulative sum of s_z * pmf(z)
    term_ratios: list  # float, growth of consecutive expectation terms
    divergent: bool
    growth_rate: float  # c * gamma, the ratio-test certificate
    expected_rounds: float  # E[Z+1] = 1/(1-p)^2
    jensen_lower: int  # s evaluated at floor(E[Z])

    def to_json(self) -> dict:
        return {
            "c": format_rational(self.c),
            "p": float(self.p),
            "support": list(self.support),
            "pmf": [float(v) for v in self.pmf],
            "partial_expectations": [float(v) for v in self.partial_expectations],
            "term_ratios": list(self.term_ratios),
            "divergent": self.divergent,
            "growth_rate": self.growth_rate,
            "expected_rounds": self.expected_rounds,
            "jensen_lower": self.jensen_lower,
        }


def persistent_distribution(c, p, z_max: int) -> PersistentDistribution:
    """Exact latency law of a persistent deviator against two protocol
    players.

    The deviator transmits every slot, so she can only succeed at a
    scheduled slot, and she does as soon as both others stay quiet
    there: her latency is s_Z with Z + 1 geometric of success (1-p)^2.
    The expectation series has term ratio tending to c*gamma, giving a
    machine-checkable divergence certificate whenever c*gamma > 1.
    """
    c = _as_fraction(c)
    p = _as_fraction(p)
    if not (0 < p < 1):
        raise AnalysisError(f"p must be in (0, 1), got {p}")
    if z_max < 0:
        raise AnalysisError("z_max must be >= 0")
    consts = derive_constants(p)
    gamma = consts.gamma
    success = (1 - p) ** 2
    horizon = max(z_max, int(1 / success) + 1)
    sched = build_schedule(c, horizon)
    support = sched.s[: z_max + 1]
    pmf = []
    partials = []
    weight = success
    total = Fraction(0)
    for z in range(z_max + 1):
        pmf.append(weight)
        total += support[z] * weight
        partials.append(total)
        weight *= gamma
    ratios = [
        float(Fraction(support[z + 1], support[z]) * gamma) for z in range(z_max)
    ]
    expected_rounds = 1 / success
    jensen_k = int(expected_rounds - 1)  # floor of E[Z]
    sched.extend_to(jensen_k)
    return PersistentDistribution(
        c=c,
        p=p,
        support=support,
        pmf=pmf,
        partial_expectations=partials,
        term_ratios=ratios,
        divergent=c * gamma > 1,
        growth_rate=float(c * gamma),
        expected_rounds=float(expected_rounds),
        jensen_lower=sched.s[jensen_k],
    )


# --- deadline deviators --------------------------------------------------------

@dataclass(frozen=True)
class DeadlineComparison:
    c: Fraction
    p: Fraction
    t0: int
    xi: int
    prE_lower: float
    diverges: bool
    truncated_lower_bounds: list  # [(z_max, lower bound on E[latency])]

    def to_json(self) -> dict:
        return {
            "c": format_rational(self.c),
            "p": float(self.p),
            "t0": self.t0,
            "xi": self.xi,
            "prE_lower": self.prE_lower,
            "diverges": self.diverges,
            "truncated_lower_bounds": [
                {"z_max": z, "bound": b} for z, b in self.truncated_lower_bounds
            ],
        }


def deadline_comparison(c, p, t0: int, z_grid: tuple = (25, 50, 100, 200, 400)) -> DeadlineComparison:
    """Lower-bound evidence that a deadline-t0 deviator loses.

    xi counts scheduled slots strictly before the deadline.  With
    probability at least delta^xi neither protocol player departs before
    t0 (event E); conditioned on E the deviator's remaining game
    dominates the persistent one shifted by xi rounds, so for any z_max

        E[latency] >= delta^xi * c^(xi-1) (c-1) * partial_expectation(z_max) - t0^2,

    which is unbounded in z_max exactly when the persistent expectation
    diverges.
    """
    c = _as_fraction(c)
    p = _as_fraction(p)
    if t0 < 1:
        raise AnalysisError("deadline must be >= 1")
    delta = derive_constants(p).delta
    sched = build_schedule(c, 1)
    sched.ensure_covers_time(t0)
    xi = sum(1 for s in sched.s if s < t0)
    pr_lower = delta**xi
    dist = persistent_distribution(c, p, max(z_grid))
    factor = pr_lower * c ** (xi - 1) * (c - 1)
    bounds = [
        (z, float(factor * dist.partial_expectations[z] - t0**2)) for z in z_grid
    ]
    return DeadlineComparison(
        c=c,
        p=p,
        t0=t0,
        xi=xi,
        prE_lower=float(pr_lower),
        diverges=dist.divergent,
        truncated_lower_bounds=bounds,
    )
