"""r-of-s run-rule signaling as an absorbing Markov chain.

A chart signals the first time at least r of the last s plotted points
fall outside the control limit.  The transient states are the binary
histories of the last s-1 points that contain at most r-1 violations;
a new inside point (probability p) shifts the history, a new outside
point either absorbs (if the trailing s-window now holds r violations)
or shifts the history with a violation appended.

States are ordered by descending history value (oldest point most
significant), which puts the all-inside history last; the initial
distribution is the unit mass on that state.  ARL and SDRL follow from
dense solves against the fundamental matrix:

    ARL  = q^T (I - Q)^{-1} 1
    SDRL = sqrt(2 q^T (I - Q)^{-2} Q 1 - ARL^2 + ARL)
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cvdist import cv2_cdf
from .errors import ChainSingularError, DomainError

__all__ = [
    "Direction",
    "RunRule",
    "RuleChain",
    "RunLengthMethod",
    "RunLengthMetrics",
    "build_chain",
    "in_control_prob",
    "arl",
]

# p this close to 1 leaves no numerically meaningful absorption mass.
_P_SINGULAR = 1.0 - 1e-12


class Direction(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


class RunLengthMethod(str, enum.Enum):
    EXACT_MARKOV = "exact_markov"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class RunRule:
    """Signal when r of the last s points fall beyond the control limit."""

    r: int
    s: int
    direction: Direction

    def __post_init__(self) -> None:
        if not (isinstance(self.r, int) and isinstance(self.s, int)):
            raise DomainError("r and s must be integers")
        if not (1 <= self.r <= self.s):
            raise DomainError(f"need 1 <= r <= s, got r={self.r}, s={self.s}")
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def label(self) -> str:
        return f"{self.r}-of-{self.s} {self.direction.value}"


def _states(r: int, s: int) -> list[tuple[int, ...]]:
    width = s - 1
    all_hist = [tuple((v >> (width - 1 - i)) & 1 for i in range(width)) for v in range(2**width)]
    feasible = [h for h in all_hist if sum(h) <= r - 1]
    feasible.sort(reverse=True)
    return feasible


@dataclass(frozen=True)
class RuleChain:
    """Transient structure of a run-rule chart at a fixed inside-probability p."""

    rule: RunRule
    p: float
    states: tuple[tuple[int, ...], ...]
    transition: np.ndarray  # transient-to-transient probabilities
    initial_index: int

    @property
    def absorption(self) -> np.ndarray:
        """Per-state probability of signaling on the next point."""
        return 1.0 - self.transition.sum(axis=1)


def build_chain(rule: RunRule, p: float) -> RuleChain:
    """Construct the transient transition matrix for the rule at inside
    probability p."""
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p}")
    states = _states(rule.r, rule.s)
    index = {h: i for i, h in enumerate(states)}
    m = len(states)
    q_matrix = np.zeros((m, m))
    for i, hist in enumerate(states):
        inside_next = hist[1:] + (0,) if rule.s > 1 else ()
        q_matrix[i, index[inside_next]] += p
        if sum(hist) + 1 < rule.r:
            outside_next = hist[1:] + (1,) if rule.s > 1 else ()
            q_matrix[i, index[outside_next]] += 1.0 - p
        # else: an outside point completes r violations in the window -> absorb
    return RuleChain(
        rule=rule,
        p=p,
        states=tuple(states),
        transition=q_matrix,
        initial_index=m - 1,
    )


def in_control_prob(
    direction: Direction,
    limit: float,
    n: int,
    gamma: float,
    *,
    force: bool = False,
    profile: str = "exact",
) -> float:
    """Probability that a plotted squared sample CV falls inside the
    control region of a one-sided chart with the given limit."""
    direction = Direction(direction)
    if direction is Direction.LOWER:
        if limit <= 0.0:
            return 1.0  # the statistic is nonnegative
        return 1.0 - cv2_cdf(limit, n, gamma, force=force, profile=profile)
    if math.isinf(limit) and limit > 0:
        return 1.0
    return cv2_cdf(limit, n, gamma, force=force, profile=profile)


@dataclass(frozen=True)
class RunLengthMetrics:
    arl: float
    sdrl: float
    method: RunLengthMethod
    stderr: Optional[float] = None
    truncated: int = 0

    def __post_init__(self) -> None:
        if self.method is RunLengthMethod.MONTE_CARLO and self.stderr is None:
            raise DomainError("Monte Carlo metrics require a standard error")
        if self.method is RunLengthMethod.EXACT_MARKOV and self.stderr is not None:
            raise DomainError("exact metrics carry no standard error")


def arl(chain: RuleChain) -> RunLengthMetrics:
    """Exact ARL and SDRL of the chain.

    Raises ChainSingularError when p = 1 (no absorption, infinite run
    length): callers treat that as "limit unreachable", not overflow.
    """
    if chain.p >= _P_SINGULAR:
        raise ChainSingularError(f"no absorption at p={chain.p}; run length is infinite")
    m = chain.transition.shape[0]
    a_matrix = np.eye(m) - chain.transition
    one = np.ones(m)
    try:
        v = np.linalg.solve(a_matrix, one)
        w = np.linalg.solve(a_matrix, chain.transition @ one)
        z = np.linalg.solve(a_matrix, w)
    except np.linalg.LinAlgError as exc:
        raise ChainSingularError(f"chain solve failed at p={chain.p}: {exc}") from exc
    mean_rl = float(v[chain.initial_index])
    if not math.isfinite(mean_rl) or mean_rl < 1.0:
        raise ChainSingularError(f"chain solve lost accuracy at p={chain.p} (ARL={mean_rl})")
    variance = 2.0 * float(z[chain.initial_index]) - mean_rl * mean_rl + mean_rl
    sdrl = math.sqrt(max(variance, 0.0))
    return RunLengthMetrics(arl=mean_rl, sdrl=sdrl, method=RunLengthMethod.EXACT_MARKOV)
