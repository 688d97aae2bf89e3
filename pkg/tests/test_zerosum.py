import json
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from banditduel.errors import DomainError, LPError, NodeBudgetExceeded
from banditduel.game import GameConfig, History, evaluate_profile
from banditduel.priors import FiniteSupport, two_point, uniform
from banditduel.zerosum.seqform import (CERT_TOL, GameValue, PlayerSpace, SequenceFormLP,
                                        build_sequence_form, parse_forced, solve, solve_game)
from banditduel.zerosum.simplex import solve_lp, solve_standard
from oracles import brute_force_value


# --- simplex ---------------------------------------------------------------

def _random_lp(rng):
    n, mu, me = int(rng.integers(1, 6)), int(rng.integers(0, 5)), int(rng.integers(0, 3))
    c = rng.integers(-5, 6, n).astype(float)
    A_ub = rng.integers(-4, 5, (mu, n)).astype(float)
    b_ub = rng.integers(-2, 8, mu).astype(float)
    A_eq = rng.integers(-3, 4, (me, n)).astype(float)
    b_eq = rng.integers(-3, 4, me).astype(float)
    free = rng.random(n) < 0.3
    return c, A_ub, b_ub, A_eq, b_eq, free


@pytest.mark.parametrize("exact", [False, True])
def test_simplex_matches_scipy(exact):
    rng = np.random.default_rng(3)
    agree = 0
    for _ in range(150):
        c, A_ub, b_ub, A_eq, b_eq, free = _random_lp(rng)
        bounds = [(None, None) if f else (0, None) for f in free]
        ref = linprog(c, A_ub=A_ub if len(b_ub) else None, b_ub=b_ub if len(b_ub) else None,
                      A_eq=A_eq if len(b_eq) else None, b_eq=b_eq if len(b_eq) else None,
                      bounds=bounds, method="highs")
        if ref.status == 0:
            res = solve_lp(c, A_ub, b_ub, A_eq, b_eq, free=free, exact=exact)
            assert float(res.objective) == pytest.approx(ref.fun, abs=1e-7)
            x = np.array([float(v) for v in res.x])
            if len(b_ub):
                assert np.all(A_ub @ x <= b_ub + 1e-7)
            if len(b_eq):
                assert np.allclose(A_eq @ x, b_eq, atol=1e-7)
            agree += 1
        elif ref.status in (2, 3):
            with pytest.raises(LPError):
                solve_lp(c, A_ub, b_ub, A_eq, b_eq, free=free, exact=exact)
    assert agree > 30


def test_simplex_cycling_example():
    # classic degenerate LP on which largest-coefficient pivoting cycles
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    b = [0, 0, 1]
    for exact in (False, True):
        res = solve_lp(c, A, b, exact=exact)
        assert float(res.objective) == pytest.approx(-0.05, abs=1e-12)


def test_exact_mode_returns_fractions():
    res = solve_lp([Fraction(-1), Fraction(-1)], [[1, 2], [3, 1]], [4, 6], exact=True)
    assert res.objective == Fraction(-14, 5)
    assert all(isinstance(v, Fraction) for v in res.x)


def test_standard_form_infeasible():
    with pytest.raises(LPError):
        solve_standard([1.0, 1.0], [[1.0, 1.0]], [-1.0])


# --- sequence form ---------------------------------------------------------

def zs(p=0.6, prior=None, **kw):
    return GameConfig(p=p, prior=prior or two_point(), lam=-1.0, **kw)


def test_matching_pennies():
    alice, bob = PlayerSpace({}), PlayerSpace({})
    alice.infoset((), 0)
    bob.infoset((), 0)
    sa, sb = alice.seq_of, bob.seq_of
    payoff = {}
    for a in "LR":
        for b in "LR":
            payoff[(sa[(0, a)], sb[(0, b)])] = 1.0 if a == b else -1.0
    lp = SequenceFormLP(zs(T=0), {"A": {}, "B": {}}, alice, bob, payoff, 1)
    gv = solve(lp)
    assert gv.value == pytest.approx(0.0, abs=1e-12)
    assert gv.plan_A[1:] == pytest.approx([0.5, 0.5], abs=1e-12)
    assert gv.plan_B[1:] == pytest.approx([0.5, 0.5], abs=1e-12)
    assert gv.strategy("A").prob_right(History()) == pytest.approx(0.5)


def test_forced_single_round():
    cfg = zs(p=0.55, T=0)
    gv = solve_game(cfg, {"A": {0: "R"}, "B": {0: "L"}})
    assert gv.value == pytest.approx(0.5 - 0.55, abs=1e-12)


def test_unconstrained_symmetric_zero():
    prior = FiniteSupport.from_weights([0.1, 0.5, 0.9], [1, 1, 2])
    for cfg in (zs(p=0.4, T=1), zs(p=0.7, T=2, prior=prior), zs(p=0.55, beta=0.9, H=3)):
        gv = solve_game(cfg)
        assert gv.value == pytest.approx(0.0, abs=1e-9)
        assert gv.gap <= CERT_TOL


def test_one_round_best_mean():
    gv = solve_game(zs(p=0.3, T=0))
    assert gv.strategy("A").prob_right(History()) == 1.0
    assert gv.strategy("B").prob_right(History()) == 1.0


@pytest.mark.parametrize("forced,atoms", [
    ({"A": {0: "R"}, "B": {0: "L"}}, ([0.2, 0.7], [1, 1])),
    ({"A": {0: "L"}, "B": {0: "R"}}, ([0.2, 0.7], [1, 1])),
    # both explore: with atoms at 0 and 1 one bit reveals the arm, keeping the oracle small
    ({"A": {0: "R"}, "B": {0: "R"}}, ([0.0, 1.0], [1, 1])),
])
def test_matches_brute_force(forced, atoms):
    prior = FiniteSupport.from_weights(*atoms)
    cfg = zs(p=0.45, beta=0.9, H=2, prior=prior)
    gv = solve_game(cfg, forced)
    ref, _ = brute_force_value(prior.atoms, 0.45, 3, 0.9, forced)
    assert gv.value == pytest.approx(ref, abs=1e-9)


def test_exact_matches_float():
    prior = FiniteSupport.from_weights([0.1, 0.5, 0.9], [1, 1, 1])
    cfg = zs(p=0.6, T=2, prior=prior)
    forced = {"A": {0: "R"}, "B": {0: "L"}}
    fe = solve_game(cfg, forced, exact=True)
    ff = solve_game(cfg, forced)
    assert isinstance(fe.value, Fraction) and fe.gap == 0
    assert float(fe.value) == pytest.approx(ff.value, abs=1e-12)


def test_plans_satisfy_constraints_and_decode():
    cfg = zs(p=0.55, beta=0.9, H=3, prior=FiniteSupport.from_weights([0.1, 0.5, 0.9], [1, 1, 1]))
    forced = {"A": {0: "R"}, "B": {0: "L"}}
    gv = solve_game(cfg, forced)
    for space, plan in ((gv.lp.alice, gv.plan_A), (gv.lp.bob, gv.plan_B)):
        E, e = space.constraints()
        assert np.allclose(E @ plan.astype(float), e, atol=1e-9)
        assert np.all(plan >= -1e-12)
    sA, sB = gv.strategy("A"), gv.strategy("B")
    res = evaluate_profile(cfg, sA, sB)
    assert res.u_A == pytest.approx(gv.value, abs=1e-9)


def test_value_decreasing_in_p():
    prior = FiniteSupport.from_weights([0.1, 0.5, 0.9], [1, 1, 1])
    values = [solve_game(zs(p=p, beta=0.9, H=2, prior=prior), {"A": {0: "R"}, "B": {0: "L"}}).value
              for p in np.linspace(0.05, 0.95, 10)]
    assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))


def test_exploring_opening_not_losing():
    cfg = zs(p=0.55625, beta=0.9, H=3)
    gv = solve_game(cfg, {"A": {0: "R"}, "B": {0: "R"}})
    assert gv.value >= -cfg.error_bound


def test_high_p_never_opens_right():
    gv = solve_game(zs(p=0.95, beta=0.9, H=3))
    assert gv.strategy("A").prob_right(History()) == 0.0
    assert gv.strategy("B").prob_right(History()) == 0.0


def test_guards():
    with pytest.raises(DomainError):
        build_sequence_form(GameConfig(p=0.5, prior=two_point(), lam=0.0, T=1))
    with pytest.raises(NodeBudgetExceeded):
        build_sequence_form(zs(T=5))
    with pytest.raises(DomainError):
        build_sequence_form(zs(T=1, prior=uniform()))
    with pytest.raises(DomainError):
        parse_forced(["A:0"])
    with pytest.raises(DomainError):
        parse_forced(["C:0:R"])
    with pytest.raises(DomainError):
        parse_forced(["A:0:X"])
    assert parse_forced(["a:0:r", "B:1:L"]) == {"A": {0: "R"}, "B": {1: "L"}}


def test_serialisation_and_tableau():
    gv = solve_game(zs(p=0.6, T=1), {"A": {0: "R"}, "B": {0: "L"}})
    out = json.loads(gv.dumps())
    assert out["value"] == pytest.approx(gv.value)
    assert out["forced"] == {"A": {"0": "R"}, "B": {"0": "L"}}
    text = gv.lp.tableau_text()
    assert text.startswith("# Alice program")
    assert "<=" in text and " = " in text
