import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banditduel import sim
from banditduel import strategies as S
from banditduel.errors import DomainError
from banditduel.game import GameConfig, History, evaluate_profile, first_exploration_stats
from banditduel.gittins import gittins_discounted
from banditduel.priors import two_point


def play(strategy, opp_actions, own_bits=None):
    """Actions of ``strategy`` against a scripted opponent (own bits default to 1)."""
    h, out = History(), []
    for t, b in enumerate(opp_actions):
        a = "R" if strategy.prob_right(h) == 1.0 else "L"
        assert strategy.prob_right(h) in (0.0, 1.0)
        out.append(a)
        bit = (own_bits[t] if own_bits else 1) if a == "R" else None
        h = h.extend(a, bit, b)
    return "".join(out)


def test_copy_examples():
    cp = S.copy_strategy()
    assert play(cp, "L" * 12) == "L" * 12
    opp = "LLLR" + "RLRRLLRL"
    acts = play(cp, opp)
    assert acts[:5] == "LLLLL"
    assert all(acts[t] == opp[t - 1] for t in range(5, len(opp)))
    alt = "RL" * 6
    acts = play(cp, alt)
    assert acts[:2] == "LL"
    assert all(acts[t] == alt[t - 1] for t in range(2, len(alt)))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from("LR"), min_size=0, max_size=12))
def test_copy_never_explores_first(opp):
    acts = play(S.copy_strategy(), opp)
    first = "".join(opp).find("R")
    limit = len(opp) if first < 0 else first + 2
    assert "R" not in acts[:limit]


def test_reveal_and_mixture():
    rv = S.reveal_strategy()
    assert rv.prob_right(History()) == 1.0
    assert rv.prob_right(History(("R",), (1,), ("L",))) == 1.0
    assert rv.prob_right(History(("R",), (0,), ("L",))) == 0.0
    assert rv.prob_right(History(("R", "L"), (0, None), ("L", "R"))) == 0.0
    with pytest.raises(DomainError):
        rv.prob_right(History(("L",), (None,), ("L",)))
    mix = S.mix_rs()
    assert mix.prob_right(History(("R",), (0,), ("L",))) == 0.5
    assert mix.prob_right(History(("R",), (1,), ("L",))) == 1.0
    assert mix.prob_right(History(("R", "R"), (0, 1), ("L", "L"))) == 1.0
    cont = S.reveal_strategy(S.left())
    assert cont.prob_right(History(("R", "R"), (1, 1), ("L", "L"))) == 0.0


def test_grim_trigger():
    g = gittins_discounted(two_point(), 0.9).index
    grim = S.grim_trigger_gittins(two_point(), 0.9, 0.7)
    # opponent leaves the common path at round 2 -> left from round 3 on
    h = History(("R", "R", "R"), (1, 1, 1), ("R", "R", "L"))
    assert grim.prob_right(h) == 0.0
    assert grim.prob_right(History(("R", "R"), (1, 1), ("R", "R"))) == 1.0
    assert S.grim_trigger_gittins(two_point(), 0.9, g + 1e-3).prob_right(History()) == 0.0
    cfg = GameConfig(p=0.7, prior=two_point(), beta=0.9, H=30)
    traces, _ = sim.simulate(cfg, grim, grim, reps=200, seed=1)
    assert all(tr.actions_A == tr.actions_B for tr in traces)


def test_gittins_strategy_ignores_opponent():
    gs = S.gittins(two_point(), 0.9, 0.7)
    assert gs.prob_right(History()) == 1.0
    assert gs.prob_right(History(("R",), (0,), ("R",))) == 0.0
    assert gs.prob_right(History(("R",), (1,), ("L",))) == 1.0
    long = History(("R",) * 150, (1,) * 150, ("L",) * 150)
    assert gs.prob_right(long) == 1.0


def test_oscillation_patterns():
    a, b = S.oscillating_coop(5)
    bob = "".join("R" if b.prob_right(History(("L",) * t, (None,) * t, ("R",) * t)) else "L"
                  for t in range(15))
    assert bob == "LRRRR" * 3
    main = [("L" if t % 5 == 0 else "R") for t in range(7)] + ["L" if 7 % 5 else "R"]
    h = History(("R",) * 8, (1,) * 8, tuple(main))
    assert a.prob_right(h) == 0.0  # Bob deviated at round 7
    h_ok = History(("R",) * 7, (1,) * 7, tuple(main[:7]))
    assert a.prob_right(h_ok) == 1.0
    ca, cb = S.oscillating_comp(4)
    seq = "".join("R" if cb.prob_right(History(
        tuple("R" if s % 4 == 0 else "L" for s in range(t)), (None,) * t, ("L",) * t)) else "L"
        for t in range(12))
    assert seq == "RLLL" * 3
    assert ca.prob_right(History(("L",), (None,), ("R",))) == 0.0
    off = History(("L",), (None,), ("L",))  # Bob skipped his round-0 right pull
    assert ca.prob_right(off) == 1.0
    assert cb.prob_right(History(("L",), (None,), ("R",))) == 1.0  # Alice left the main line


def test_coop_checker():
    c = S.coop_osc_is_nash(0.8, 0.5, 0.9, 1.0, 2)
    assert c.is_nash and c.details["rhs"] == pytest.approx(0.171)
    assert not S.coop_osc_is_nash(0.8, 0.5, 0.9, 1.0, 1).is_nash
    assert not any(S.coop_osc_is_nash(0.8, 0.5, 0.4, 1.0, k).is_nash for k in range(1, 200))
    assert c.u_main == pytest.approx(2 * 0.8 / 0.1 - 0.3 / (1 - 0.81))
    assert c.u_deviation == pytest.approx(8 + 0.8 + 0.9 * 0.5 / 0.1)
    with pytest.raises(DomainError):
        S.coop_osc_is_nash(0.5, 0.5, 0.9, 1.0, 2)
    with pytest.raises(DomainError):
        S.coop_osc_is_nash(0.8, 0.5, 0.9, 0.0, 2)
    with pytest.raises(DomainError):
        S.coop_osc_is_nash(0.8, 0.5, 0.9, 1.0, 0)


def test_comp_checker():
    c = S.comp_osc_is_nash(0.8, 0.5, 0.8, -2.0, 4)
    assert c.is_nash
    assert c.details["geometric_sum"] == pytest.approx(2.952)
    assert c.details["bob_threshold"] == pytest.approx(2.6)
    assert c.details["alice_threshold"] == pytest.approx(8 / 3)
    for k in list(range(1, 2000)) + [10**6]:
        assert not S.comp_osc_is_nash(0.8, 0.5, 0.7, -2.0, k).is_nash
    weak = S.comp_osc_is_nash(0.8, 0.5, 0.4, -2.0, 50)
    assert not weak.is_nash and math.isinf(weak.details["alice_threshold"])
    assert "unreachable" in weak.reason
    for lam in (-1.5, -2.0, -5.0):
        for beta in (0.6, 0.9, 0.99):
            assert not S.comp_osc_is_nash(0.8, 0.5, beta, lam, 1).is_nash
    with pytest.raises(DomainError):
        S.comp_osc_is_nash(0.8, 0.5, 0.8, -1.0, 4)


def test_comp_closed_forms_match_evaluation():
    cfg = S.osc_config(0.8, 0.5, 0.8, -2.0, 80)
    a, b = S.oscillating_comp(4)
    res = evaluate_profile(cfg, a, b)
    c = S.comp_osc_is_nash(0.8, 0.5, 0.8, -2.0, 4)
    assert abs(res.u_A - c.details["u_A"]) <= cfg.error_bound
    assert abs(res.u_B - c.details["u_B"]) <= cfg.error_bound


def test_fixed_arm_deviations():
    cfg = S.osc_config(0.8, 0.5, 0.9, 1.0, 60)
    a, b = S.oscillating_coop(1)
    rep = S.fixed_arm_deviations(cfg, a, b, "B", max_start=3)
    assert rep.profitable and rep.best_arm == "R"
    dev = S.with_fixed_arm_from(S.right(), 2, "L")
    assert [dev.prob_right(History(("R",) * t, (1,) * t, ("L",) * t)) for t in range(4)] == [1, 1, 0, 0]


def test_trigger_zero_sum():
    cfg = GameConfig(p=0.8, prior=two_point(), lam=-1.0, beta=0.9, H=8)
    trig = S.trigger_zero_sum(cfg, depth=4, player="B")
    assert trig.params["value"] >= -1e-9
    assert play(trig, "L" * 10) == "L" * 10
    # same continuation whether the opponent explores at round 0 or round 2
    for bits in ((1, 1, 1, 1), (0, 0, 0, 0)):
        sub = [trig.prob_right(History(("L",) + tuple("L" * t), (None,) * (t + 1), ("R",) + ("R",) * t))
               for t in range(4)]
        shifted = [trig.prob_right(History(("L", "L", "L") + tuple("L" * t), (None,) * (t + 3),
                                           ("L", "L", "R") + ("R",) * t)) for t in range(4)]
        assert sub == shifted
    res = evaluate_profile(cfg, S.right(), trig)
    assert res.u_B >= -cfg.error_bound


def test_parse_strategy():
    cfg = GameConfig(p=0.7, prior=two_point(), lam=-1.0, beta=0.9, H=6)
    for name in S.STRATEGY_NAMES:
        assert S.parse_strategy(name, cfg, "A").prob_right(History()) in (0.0, 0.5, 1.0)
    assert S.parse_strategy("osc-coop:k=3", cfg, "B").params["k"] == 3
    assert S.parse_strategy("gittins:beta=0.5,p_ref=0.9", cfg).params == {
        "beta": 0.5, "p_ref": 0.9, "prefer_right": False}
    assert S.parse_strategy("gittins:ties=right", cfg).params["prefer_right"]
    with pytest.raises(DomainError):
        S.parse_strategy("nonsense", cfg)
    with pytest.raises(DomainError):
        S.parse_strategy("osc-coop:k", cfg)
    with pytest.raises(DomainError):
        S.parse_strategy("osc-coop:k=two", cfg)
    with pytest.raises(DomainError):
        S.parse_strategy("gittins", None)
    with pytest.raises(DomainError):
        S.parse_strategy("gittins", GameConfig(p=0.7, prior=two_point(), T=3))


def _random_histories(n, seed, own_first_right=False):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        t = int(rng.integers(0, 30))
        own = ["R" if v else "L" for v in rng.random(t) < 0.5]
        if own_first_right and t:
            own[0] = "R"
        opp = tuple("R" if v else "L" for v in rng.random(t) < 0.5)
        bits = tuple(int(rng.random() < 0.5) if a == "R" else None for a in own)
        out.append(History(tuple(own), bits, opp))
    return out


def test_every_strategy_is_total():
    cfg = GameConfig(p=0.7, prior=two_point(), lam=-1.0, beta=0.9, H=6)
    coop, comp = S.oscillating_coop(5), S.oscillating_comp(4)
    library = [S.left(), S.right(), S.copy_strategy(), S.right_until_failure(),
               S.gittins(two_point(), 0.9, 0.7), S.grim_trigger_gittins(two_point(), 0.9, 0.7),
               *coop, *comp, S.trigger_zero_sum(cfg, depth=3)]
    hs = _random_histories(100_000, 0)
    for strat in library:
        for h in hs:
            q = strat.prob_right(h)
            assert 0.0 <= q <= 1.0
    # reveal and its mixture are defined after an opening right pull
    hs = _random_histories(100_000, 1, own_first_right=True)
    for strat in (S.reveal_strategy(), S.mix_rs()):
        for h in hs:
            assert 0.0 <= strat.prob_right(h) <= 1.0
