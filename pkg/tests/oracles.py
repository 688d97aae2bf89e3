"""Independent reference computations used by the tests.

Nothing here imports the game engine or the LP solver: the brute-force
zero-sum oracle enumerates reduced pure strategies directly, evaluates every
pair by its own tree walk and solves the matrix game with scipy.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog


def bits_for(action, x, p):
    """Observable bit distribution of one pull; left bits are not observed."""
    if action == "R":
        return [(1, x), (0, 1.0 - x)]
    return [(None, 1.0)]


def _possible_bits(atoms, own_obs, action):
    """Own risky bits that have positive probability after ``own_obs`` under some atom."""
    if action == "L":
        return [None]
    live = []
    for x, w in atoms:
        lik = w
        for a, b, _ in own_obs:
            if a == "R":
                lik *= x if b == 1 else 1.0 - x
        if lik > 0:
            live.append(x)
    out = []
    if any(x > 0 for x in live):
        out.append(1)
    if any(x < 1 for x in live):
        out.append(0)
    return out


def reduced_strategies(atoms, n_rounds, forced, opp_forced=None):
    """All reduced pure strategies as dicts ``observation tuple -> action``.

    Only information sets reachable under the player's own earlier choices
    (and positive-probability own bits) get an action; forced rounds are
    fixed and create no decision; the opponent's forced rounds are observed
    with certainty.
    """
    opp_forced = opp_forced or {}

    def build(obs, t):
        if t == n_rounds:
            return [{}]
        acts = [forced[t]] if t in forced else ["L", "R"]
        out = []
        for a in acts:
            children = []
            for bit in _possible_bits(atoms, obs, a):
                for opp in [opp_forced[t]] if t in opp_forced else ("L", "R"):
                    children.append(build(obs + ((a, bit, opp),), t + 1))
            for combo in itertools.product(*children):
                plan = {} if t in forced else {obs: a}
                for part in combo:
                    plan.update(part)
                if t in forced:
                    plan[("forced", obs)] = a
                out.append(plan)
        return out

    return build((), 0)


def _act(plan, obs, t, forced):
    return forced[t] if t in forced else plan[obs]


def pair_value(atoms, p, n_rounds, discount, planA, planB, forcedA, forcedB):
    """Expected ``Gamma_A - Gamma_B`` of two pure plans."""
    total = 0.0
    for x, w in atoms:
        stack = [(0, w, (), ())]
        while stack:
            t, prob, oa, ob = stack.pop()
            if t == n_rounds or prob == 0.0:
                continue
            a = _act(planA, oa, t, forcedA)
            b = _act(planB, ob, t, forcedB)
            ra = x if a == "R" else p
            rb = x if b == "R" else p
            total += prob * discount**t * (ra - rb)
            for ba, qa in bits_for(a, x, p):
                for bb, qb in bits_for(b, x, p):
                    q = prob * qa * qb
                    if q > 0.0:
                        stack.append((t + 1, q, oa + ((a, ba, b),), ob + ((b, bb, a),)))
    return total


def matrix_game_value(M):
    """Row player's maximin value of the matrix game ``M`` (row maximises)."""
    M = np.asarray(M, dtype=float)
    n_rows, n_cols = M.shape
    # variables (x_1..x_n, v): maximise v s.t. M^T x >= v, sum x = 1
    c = np.zeros(n_rows + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-M.T, np.ones((n_cols, 1))])
    b_ub = np.zeros(n_cols)
    A_eq = np.concatenate([np.ones(n_rows), [0.0]])[None, :]
    bounds = [(0, None)] * n_rows + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    assert res.status == 0, res.message
    return -res.fun


def brute_force_value(atoms, p, n_rounds, discount=1.0, forced=None):
    """Minimax value of the zero-sum game by normal-form enumeration."""
    forced = forced or {}
    fA, fB = forced.get("A", {}), forced.get("B", {})
    SA = reduced_strategies(atoms, n_rounds, fA, fB)
    SB = reduced_strategies(atoms, n_rounds, fB, fA)
    M = np.array([[pair_value(atoms, p, n_rounds, discount, a, b, fA, fB) for b in SB] for a in SA])
    return matrix_game_value(M), M.shape


def two_point_gittins(beta):
    """Closed-form index of the prior with equal mass on 0 and 1."""
    return 1.0 / (2.0 - beta)


def finite_two_point_index(T):
    return Fraction(T + 1, T + 2)


def quad_moments_beta(a, b, n=200_000):
    """Midpoint-rule moments of a Beta(a, b) density (independent of scipy's closed forms)."""
    from math import lgamma

    xs = (np.arange(n) + 0.5) / n
    logc = lgamma(a + b) - lgamma(a) - lgamma(b)
    dens = np.exp(logc + (a - 1) * np.log(xs) + (b - 1) * np.log1p(-xs))
    mean = float(np.sum(xs * dens) / n)
    second = float(np.sum(xs * xs * dens) / n)
    return mean, second - mean * mean


def single_player_brute(atoms, p, beta, depth):
    """Bellman recursion on explicit posterior weight vectors (dict-memoised)."""
    from functools import lru_cache

    xs = [x for x, _ in atoms]
    w0 = tuple(w for _, w in atoms)

    @lru_cache(maxsize=None)
    def V(s, f):
        if s + f == depth:
            return p / (1 - beta)
        ws = [w * x**s * (1 - x) ** f for x, w in zip(xs, w0)]
        z = sum(ws)
        if z == 0:
            return p / (1 - beta)
        mu = sum(x * w for x, w in zip(xs, ws)) / z
        explore = mu * (1 + beta * V(s + 1, f)) + (1 - mu) * beta * V(s, f + 1)
        return max(p / (1 - beta), explore)

    return V(0, 0)
