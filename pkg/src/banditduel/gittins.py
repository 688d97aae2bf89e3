"""Single-player values and the Gittins indices of the risky arm.

Retiring to the known arm is absorbing for a single player (a left pull
carries no information), so the decision state is the pair of risky-arm
counts ``(s, f)`` and the time is ``s + f``. Values are computed by backward
induction layer by layer, one numpy vector per layer ``n = s + f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .priors import Beta, Prior, exact_atoms, layer_means, moments, posterior_mean


@dataclass(frozen=True)
class ValueResult:
    value: float
    error_bound: float
    depth_used: int


@dataclass(frozen=True)
class IndexResult:
    index: float
    tolerance: float
    mode: str  # "discounted" or "finite"
    parameter: float  # beta or T


def _check_beta(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise DomainError(f"discount must lie in (0, 1), got {beta}")


def depth_for_tol(beta: float, tol: float) -> int:
    """Smallest ``H`` with ``beta**H / (1 - beta) < tol``."""
    _check_beta(beta)
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    h = max(1, math.ceil(math.log(tol * (1.0 - beta)) / math.log(beta)))
    while beta**h / (1.0 - beta) >= tol:
        h += 1
    return h


class _Layers:
    """Posterior-mean vectors for layers ``0..H-1``, shared across bisection steps."""

    def __init__(self, prior: Prior, depth: int):
        self.depth = depth
        self.means = [layer_means(prior, n) for n in range(depth)]


def _backward(layers: _Layers, p: float, beta: float, finite: bool, keep_from: int | None = None):
    """Run the DP; return ``(value_root, q_right_root, kept)``.

    ``kept`` maps layer ``n <= keep_from`` to the vector ``Q_R - retire``
    (explore advantage per state), used to tabulate Gittins decisions.
    Discounted mode continues with retirement after the last layer; finite
    mode has ``depth`` rounds in total.
    """
    H = layers.depth
    disc = 1.0 if finite else beta
    vals = np.zeros(H + 1) if finite else np.full(H + 1, p / (1.0 - beta))
    tmp = np.empty(H + 1)
    kept = {}
    q_root = None
    for n in range(H - 1, -1, -1):
        mu = layers.means[n]
        retire = p * (H - n) if finite else p / (1.0 - beta)
        # q = mu * (1 + disc * (V[s+1] - V[s])) + disc * V[s], computed in place
        d = tmp[: n + 1]
        np.subtract(vals[1 : n + 2], vals[: n + 1], out=d)
        d *= disc
        d += 1.0
        d *= mu
        q = vals[: n + 1]
        q *= disc
        q += d
        if keep_from is not None and n <= keep_from:
            kept[n] = q - retire
        if n == 0:
            q_root = float(q[0])
        np.maximum(q, retire, out=q)
    return float(vals[0]), q_root, kept


def single_player_value(prior: Prior, p: float, beta: float, depth: int) -> ValueResult:
    """Optimal discounted single-player value, truncated after ``depth`` risky pulls.

    The truncated game retires at round ``depth``; the neglected risky tail is
    at most ``beta**depth / (1 - beta)``.
    """
    _check_beta(beta)
    if depth < 1:
        raise DomainError("depth must be at least 1")
    value, _, _ = _backward(_Layers(prior, depth), p, beta, finite=False)
    return ValueResult(value, beta**depth / (1.0 - beta), depth)


def gittins_discounted(prior: Prior, beta: float, tol: float = 1e-6) -> IndexResult:
    """Discounted Gittins index by bisection on the known arm's probability."""
    _check_beta(beta)
    mom = moments(prior)
    mom.require_nondegenerate()
    layers = _Layers(prior, depth_for_tol(beta, tol / 4.0))
    # the index provably lies above the two-step lower bound m + beta w / (1 + m beta)
    lo = min(mom.m + beta * mom.w / (1.0 + mom.m * beta), mom.m_star)
    hi = mom.m_star
    while hi - lo > tol / 2.0:
        mid = 0.5 * (lo + hi)
        _, q_root, _ = _backward(layers, mid, beta, finite=False)
        if q_root > mid / (1.0 - beta):
            lo = mid
        else:
            hi = mid
    return IndexResult(0.5 * (lo + hi), tol, "discounted", beta)


def single_player_value_finite(prior: Prior, p: float, T: int) -> ValueResult:
    """Optimal undiscounted total over rounds ``0..T`` (exact)."""
    if T < 0:
        raise DomainError("horizon must be nonnegative")
    value, _, _ = _backward(_Layers(prior, T + 1), p, 1.0, finite=True)
    return ValueResult(value, 0.0, T + 1)


def gittins_finite(prior: Prior, T: int, tol: float = 1e-9) -> IndexResult:
    """Finite-horizon index ``g_T`` for ``T + 1`` undiscounted rounds."""
    if T < 0:
        raise DomainError("horizon must be nonnegative")
    mom = moments(prior)
    layers = _Layers(prior, T + 1)
    lo, hi = mom.m, mom.m_star
    if T == 0 or mom.degenerate:
        return IndexResult(mom.m, tol, "finite", T)
    while hi - lo > tol / 2.0:
        mid = 0.5 * (lo + hi)
        _, q_root, _ = _backward(layers, mid, 1.0, finite=True)
        if q_root > mid * (T + 1):
            lo = mid
        else:
            hi = mid
    return IndexResult(0.5 * (lo + hi), tol, "finite", T)


def finite_explore_gain(prior: Prior, p, T: int, exact: bool = True):
    """``Q_R(root) - p (T + 1)``: the gain of opening right over always-left.

    With ``exact=True`` the DP runs in rational arithmetic (``p`` and the
    atoms are read as decimal fractions), so ties such as ``p = g_T`` are
    decided exactly. The single player explores iff the gain is positive.
    """
    if T < 0:
        raise DomainError("horizon must be nonnegative")
    if not exact:
        _, q_root, _ = _backward(_Layers(prior, T + 1), float(p), 1.0, finite=True)
        return q_root - float(p) * (T + 1)
    if not isinstance(prior, Beta):
        exact_atoms(prior)  # validates conversion
    pf = Fraction(repr(p)) if isinstance(p, float) else Fraction(p)
    nxt = [Fraction(0)] * (T + 2)
    q_root = None
    for n in range(T, -1, -1):
        cur = []
        for s in range(n + 1):
            mu = posterior_mean(prior, s, n - s, exact=True)
            if mu is None:
                cur.append(Fraction(0))
                continue
            q = mu + mu * nxt[s + 1] + (1 - mu) * nxt[s]
            if n == 0:
                q_root = q
            cur.append(max(q, pf * (T + 1 - n)))
        nxt = cur
    return q_root - pf * (T + 1)


def gittins_decision_table(prior: Prior, beta: float, p: float, max_pulls: int,
                           prefer_right: bool = False, tie_tol: float = 1e-9,
                           margin_tol: float = 1e-13) -> list[np.ndarray]:
    """``table[n][s]`` is True iff the Gittins rule pulls right at ``(s, n - s)``.

    The rule pulls right iff the posterior index exceeds ``p``, decided as
    ``Q_R > p / (1 - beta)``. Values within ``tie_tol`` count as ties, broken
    toward left by default or toward right with ``prefer_right``. The DP is
    run ``depth_for_tol(beta, margin_tol)`` layers past ``max_pulls`` so the
    truncation does not affect tabulated layers.
    """
    _check_beta(beta)
    depth = max_pulls + 1 + depth_for_tol(beta, margin_tol)
    _, _, kept = _backward(_Layers(prior, depth), p, beta, finite=False, keep_from=max_pulls)
    if prefer_right:
        return [kept[n] > -tie_tol for n in range(max_pulls + 1)]
    return [kept[n] > tie_tol for n in range(max_pulls + 1)]
