"""Monte Carlo simulation of profiles, the concentration check and a settling diagnostic.

Replication ``r`` draws from ``default_rng(SeedSequence(seed, spawn_key=(r,)))``,
so results do not depend on how replications are scheduled.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .game import R, GameConfig, History, Strategy
from .priors import Prior, sample_theta

Z95 = 1.96


def rep_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep,)))


@dataclass(frozen=True)
class SimTrace:
    theta: float
    actions_A: tuple
    rewards_A: tuple
    actions_B: tuple
    rewards_B: tuple
    seed: int
    rep: int

    def __len__(self) -> int:
        return len(self.actions_A)


@dataclass(frozen=True)
class Estimate:
    mean: float
    half_width: float  # 95% normal-approximation half width

    def to_json(self) -> dict:
        return {"mean": self.mean, "ci95": [self.mean - self.half_width, self.mean + self.half_width],
                "se": self.half_width / Z95}


def estimate(samples) -> Estimate:
    x = np.asarray(samples, dtype=float)
    mean = math.fsum(x) / len(x)
    se = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return Estimate(mean, Z95 * se)


def _choose(q: float, rng: np.random.Generator) -> str:
    if q <= 0.0:
        return "L"
    if q >= 1.0:
        return R
    return R if rng.random() < q else "L"


def simulate_one(config: GameConfig, sA: Strategy, sB: Strategy, horizon: int, seed: int,
                 rep: int) -> SimTrace:
    rng = rep_rng(seed, rep)
    theta = sample_theta(config.prior, rng)
    hA, hB = History(), History()
    aa, ra, ab, rb = [], [], [], []
    for _ in range(horizon):
        a = _choose(sA.prob_right(hA), rng)
        b = _choose(sB.prob_right(hB), rng)
        u = rng.random(2)
        xa = int(u[0] < (theta if a == R else config.p))
        xb = int(u[1] < (theta if b == R else config.p))
        hA = hA.extend(a, xa, b)
        hB = hB.extend(b, xb, a)
        aa.append(a), ra.append(xa), ab.append(b), rb.append(xb)
    return SimTrace(theta, tuple(aa), tuple(ra), tuple(ab), tuple(rb), seed, rep)


def trace_rewards(config: GameConfig, tr: SimTrace) -> tuple[float, float]:
    disc = [config.discount(t) for t in range(len(tr))]
    return (math.fsum(d * r for d, r in zip(disc, tr.rewards_A)),
            math.fsum(d * r for d, r in zip(disc, tr.rewards_B)))


@dataclass
class SimSummary:
    gamma_A: Estimate
    gamma_B: Estimate
    u_A: Estimate
    u_B: Estimate
    reps: int
    horizon: int
    seed: int

    def to_json(self) -> dict:
        return {"gamma_A": self.gamma_A.to_json(), "gamma_B": self.gamma_B.to_json(),
                "u_A": self.u_A.to_json(), "u_B": self.u_B.to_json(),
                "reps": self.reps, "horizon": self.horizon, "seed": self.seed}


def simulate(config: GameConfig, sA: Strategy, sB: Strategy, horizon: int | None = None,
             reps: int = 1000, seed: int = 42) -> tuple[list[SimTrace], SimSummary]:
    """Simulate ``reps`` plays of ``horizon`` rounds (default: the config's rounds).

    Rewards are discounted by ``beta**t`` in discounted mode; tail beyond the
    horizon is not included.
    """
    horizon = config.n_rounds if horizon is None else horizon
    if reps < 1 or horizon < 1:
        raise DomainError("need reps >= 1 and horizon >= 1")
    traces = [simulate_one(config, sA, sB, horizon, seed, r) for r in range(reps)]
    gA, gB = np.array([trace_rewards(config, tr) for tr in traces]).T
    lam = config.lam
    summary = SimSummary(estimate(gA), estimate(gB), estimate(gA + lam * gB), estimate(gB + lam * gA),
                         reps, horizon, seed)
    return traces, summary


def traces_csv(traces) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "action_A", "reward_A", "action_B", "reward_B", "theta", "rep"])
    for tr in traces:
        for t in range(len(tr)):
            w.writerow([t, tr.actions_A[t], tr.rewards_A[t], tr.actions_B[t], tr.rewards_B[t],
                        format(tr.theta, ".9g"), tr.rep])
    return buf.getvalue()


@dataclass(frozen=True)
class ConcentrationReport:
    k: int
    eps: float
    reps: int
    empirical: float
    bound: float
    se: float
    passed: bool

    def to_json(self) -> dict:
        return {"k": self.k, "epsilon": self.eps, "reps": self.reps, "empirical": self.empirical,
                "bound": self.bound, "se": self.se, "pass": self.passed}


def _first_k_successes(prior: Prior, strategy: Strategy, k: int, p: float, horizon: int,
                       rng: np.random.Generator) -> tuple[float, int | None]:
    """Draw theta and play single-player rounds; successes in the first k risky pulls."""
    theta = sample_theta(prior, rng)
    if strategy.name == "right":
        return theta, int(rng.binomial(k, theta))
    h = History()
    wins = pulls = 0
    for _ in range(horizon):
        a = _choose(strategy.prob_right(h), rng)
        bit = int(rng.random() < (theta if a == R else p))
        if a == R:
            pulls += 1
            wins += bit
            if pulls == k:
                return theta, wins
        h = h.extend(a, bit, "L")
    return theta, None


def concentration_check(prior: Prior, strategy: Strategy, k: int, eps: float, reps: int = 10_000,
                        seed: int = 42, p: float = 0.5, horizon: int | None = None) -> ConcentrationReport:
    """Empirical ``P(|w_k - k theta| > k eps and R >= k)`` against ``2 exp(-2 k eps^2)``.

    The strategy plays alone (opponent recorded as always left) for
    ``horizon`` rounds (default ``4k``); runs with fewer than ``k`` risky
    pulls are non-events.
    """
    if k < 1 or not eps > 0 or reps < 1:
        raise DomainError("need k >= 1, eps > 0 and reps >= 1")
    horizon = 4 * k if horizon is None else horizon
    hits = 0
    for r in range(reps):
        theta, w = _first_k_successes(prior, strategy, k, p, horizon, rep_rng(seed, r))
        if w is not None and abs(w - k * theta) > k * eps:
            hits += 1
    freq = hits / reps
    se = math.sqrt(max(freq * (1.0 - freq), 0.0) / reps)
    bound = 2.0 * math.exp(-2.0 * k * eps * eps)
    return ConcentrationReport(k, eps, reps, freq, bound, se, freq <= bound + 3.0 * se)


def settle_diagnostic(traces, window: int) -> Estimate:
    """Fraction of traces where both players pull one identical arm throughout
    the final ``window`` rounds (an illustration; finite traces cannot decide settling)."""
    if not traces:
        raise DomainError("no traces")
    if not 0 < window < len(traces[0]):
        raise DomainError(f"window must lie in (0, horizon), got {window}")
    flags = []
    for tr in traces:
        tail = set(tr.actions_A[-window:]) | set(tr.actions_B[-window:])
        flags.append(1.0 if len(tail) == 1 else 0.0)
    frac = sum(flags) / len(flags)
    hw = Z95 * math.sqrt(frac * (1.0 - frac) / len(flags))
    return Estimate(frac, hw)


def mc_expected_best_mean(prior: Prior, p: float, reps: int = 100_000, seed: int = 42) -> Estimate:
    """Monte Carlo ``E[max(p, theta)]``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if hasattr(prior, "a"):
        draws = rng.beta(prior.a, prior.b, size=reps)
    else:
        draws = rng.choice(prior.xs, p=prior.weights, size=reps)
    return estimate(np.maximum(p, draws))


def summary_json(summary: SimSummary) -> str:
    return json.dumps(summary.to_json(), sort_keys=True)
