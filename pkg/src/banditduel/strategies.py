"""Named strategies and the closed-form checks for oscillating equilibria.

Every strategy derives its state from the history it is shown (no stored
trigger state), so the objects are immutable and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError
from .game import L, R, GameConfig, History, Strategy, evaluate_profile
from .gittins import gittins_decision_table
from .priors import Prior, point_mass


def _const(q: float):
    return lambda h: q


def left() -> Strategy:
    return Strategy("left", _const(0.0), key=lambda h: None)


def right() -> Strategy:
    return Strategy("right", _const(1.0), key=lambda h: None)


def _copy_key(h: History):
    f = h.first_opp_right()
    if f is None:
        return "wait"
    if h.t <= f + 1:
        return "hold"
    return ("copy", h.opp_actions[-1])


def copy_strategy() -> Strategy:
    """Left until the opponent's first right pull at round ``k``, left at ``k+1``,
    then repeat the opponent's previous action from round ``k+2`` on."""
    def rule(h: History) -> float:
        k = _copy_key(h)
        return 1.0 if isinstance(k, tuple) and k[1] == R else 0.0

    return Strategy("copy", rule, key=_copy_key)


def _round0_check(h: History, name: str) -> None:
    if h.own_actions[0] != R:
        raise DomainError(f"{name} is only defined after an opening right pull")


def reveal_strategy(continuation: Strategy | None = None) -> Strategy:
    """Right in round 0; in round 1 play right iff the round-0 bit was 1.

    From round 2 on the ``continuation`` is consulted on the full history;
    by default the round-1 action is repeated forever.
    """
    def rule(h: History) -> float:
        if h.t == 0:
            return 1.0
        _round0_check(h, "reveal")
        if h.t == 1:
            return 1.0 if h.own_rewards[0] == 1 else 0.0
        if continuation is not None:
            return continuation.prob_right(h)
        return 1.0 if h.own_actions[1] == R else 0.0

    key = None if continuation is not None else (
        lambda h: h.t if h.t == 0 else (h.own_actions[0], h.own_rewards[0] if h.t == 1 else h.own_actions[1]))
    return Strategy("reveal", rule, key=key)


def mix_rs() -> Strategy:
    """Right in round 0, then the even mixture of right-forever and ``reveal``.

    As a behavioural strategy: round 1 is right with probability 1 after a
    success and 1/2 after a failure; later rounds repeat the round-1 action.
    """
    def rule(h: History) -> float:
        if h.t == 0:
            return 1.0
        _round0_check(h, "mix-rs")
        if h.t == 1:
            return 1.0 if h.own_rewards[0] == 1 else 0.5
        return 1.0 if h.own_actions[1] == R else 0.0

    def key(h: History):
        if h.t == 0:
            return None
        return (h.own_actions[0], h.own_rewards[0]) if h.t == 1 else ("commit", h.own_actions[1])

    return Strategy("mix-rs", rule, key=key)


def right_until_failure() -> Strategy:
    """Pull right until the first failure, then left forever (an adaptive explorer)."""
    def key(h: History):
        return any(a == R and r == 0 for a, r in zip(h.own_actions, h.own_rewards))

    return Strategy("stop-on-fail", lambda h: 0.0 if key(h) else 1.0, key=key)


@dataclass
class _GittinsTable:
    prior: Prior
    beta: float
    p_ref: float
    prefer_right: bool
    size: int = 64
    table: list = field(default_factory=list)

    def decide(self, s: int, f: int) -> bool:
        n = s + f
        if n >= len(self.table):
            while self.size <= n:
                self.size *= 2
            self.table = gittins_decision_table(self.prior, self.beta, self.p_ref, self.size,
                                                prefer_right=self.prefer_right)
        return bool(self.table[n][s])


def gittins(prior: Prior, beta: float, p_ref: float, prefer_right: bool = False) -> Strategy:
    """Single-player Gittins rule: right iff the posterior index exceeds ``p_ref``.

    Opponent actions are ignored. A left pull leaves the posterior unchanged,
    so once the rule goes left it stays left. Ties (index equal to ``p_ref``)
    go left unless ``prefer_right``.
    """
    tab = _GittinsTable(prior, beta, p_ref, prefer_right)

    def rule(h: History) -> float:
        return 1.0 if tab.decide(*h.risky_counts()) else 0.0

    return Strategy("gittins", rule, key=History.risky_counts,
                    params={"beta": beta, "p_ref": p_ref, "prefer_right": prefer_right})


def grim_trigger_gittins(prior: Prior, beta: float, p_ref: float, prefer_right: bool = False) -> Strategy:
    """Gittins rule while both players' actions agree; left forever after a mismatch."""
    base = gittins(prior, beta, p_ref, prefer_right)

    def key(h: History):
        if any(a != b for a, b in zip(h.own_actions, h.opp_actions)):
            return "punish"
        return base.state_key(h)

    def rule(h: History) -> float:
        return 0.0 if key(h) == "punish" else base.prob_right(h)

    return Strategy("grim", rule, key=key, params=dict(base.params))


def _check_k(k: int) -> None:
    if not isinstance(k, int) or k < 1:
        raise DomainError(f"oscillation period k must be a positive integer, got {k!r}")


def oscillating_coop(k: int) -> tuple[Strategy, Strategy]:
    """Cooperative oscillation: Bob is left at rounds 0, k, 2k, ... and right otherwise,
    unconditionally; Alice is right until Bob first leaves that pattern,
    then left forever from the next round."""
    _check_k(k)

    def bob_action(t: int) -> str:
        return L if t % k == 0 else R

    def bob_rule(h: History) -> float:
        return 0.0 if h.t % k == 0 else 1.0

    def alice_key(h: History) -> bool:
        return any(b != bob_action(t) for t, b in enumerate(h.opp_actions))

    alice = Strategy("osc-coop-A", lambda h: 0.0 if alice_key(h) else 1.0, key=alice_key,
                     params={"k": k})
    bob = Strategy("osc-coop-B", bob_rule, key=lambda h: h.t % k, params={"k": k})
    return alice, bob


def oscillating_comp(k: int) -> tuple[Strategy, Strategy]:
    """Competitive oscillation: on the main line Alice is left and Bob is right at
    rounds 0, k, 2k, ... and left otherwise; once either leaves the main line
    both play right forever."""
    _check_k(k)

    def main_line(a_hist, b_hist) -> bool:
        return all(a == L for a in a_hist) and all(
            b == (R if t % k == 0 else L) for t, b in enumerate(b_hist))

    def alice_key(h: History):
        return ("main", h.t % k) if main_line(h.own_actions, h.opp_actions) else "off"

    def bob_key(h: History):
        return ("main", h.t % k) if main_line(h.opp_actions, h.own_actions) else "off"

    def alice_rule(h: History) -> float:
        return 0.0 if alice_key(h) != "off" else 1.0

    def bob_rule(h: History) -> float:
        key = bob_key(h)
        if key == "off":
            return 1.0
        return 1.0 if key[1] == 0 else 0.0

    return (Strategy("osc-comp-A", alice_rule, key=alice_key, params={"k": k}),
            Strategy("osc-comp-B", bob_rule, key=bob_key, params={"k": k}))


def with_fixed_arm_from(base: Strategy, start: int, arm: str) -> Strategy:
    """Follow ``base`` before round ``start`` and play ``arm`` forever from then on."""
    q = 1.0 if arm == R else 0.0

    def key(h: History):
        return ("fixed",) if h.t >= start else ("base", base.state_key(h))

    def rule(h: History) -> float:
        return q if h.t >= start else base.prob_right(h)

    return Strategy(f"{base.name}|{arm}@{start}", rule, key=key)


@dataclass(frozen=True)
class OscillationCheck:
    lam: float
    beta: float
    k: int
    m: float
    p: float
    u_main: float
    u_deviation: float
    is_nash: bool
    reason: str = ""
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"lambda": self.lam, "beta": self.beta, "k": self.k, "m": self.m, "p": self.p,
                "u_main": self.u_main, "u_deviation": self.u_deviation, "is_nash": self.is_nash,
                "reason": self.reason, "details": dict(self.details)}


def _check_point_mass_args(m: float, p: float, beta: float, k: int) -> None:
    if not 0.0 < beta < 1.0:
        raise DomainError(f"discount must lie in (0, 1), got {beta}")
    if not 0.0 <= p < m <= 1.0:
        raise DomainError(f"the oscillation constructions need 0 <= p < m <= 1, got m={m}, p={p}")
    _check_k(k)


def coop_osc_is_nash(m: float, p: float, beta: float, lam: float, k: int) -> OscillationCheck:
    """Closed-form check of the cooperative oscillation (point-mass risky arm at ``m``).

    ``u_main`` is Bob's utility on the main line, ``u_deviation`` the cap on his
    best deviation; Nash iff ``1 - beta < beta * lam * (1 - beta**k)``.
    """
    _check_point_mass_args(m, p, beta, k)
    if not lam > 0:
        raise DomainError(f"the cooperative construction needs lambda > 0, got {lam}")
    u_main = (1.0 + lam) * m / (1.0 - beta) - (m - p) / (1.0 - beta**k)
    u_dev = m / (1.0 - beta) + lam * (m + beta * p / (1.0 - beta))
    lhs, rhs = 1.0 - beta, beta * lam * (1.0 - beta**k)
    ok = lhs < rhs
    reason = "" if ok else f"1 - beta = {lhs:.9g} is not below beta*lambda*(1 - beta^k) = {rhs:.9g}"
    gA = m / (1.0 - beta)
    gB = m / (1.0 - beta) - (m - p) / (1.0 - beta**k)
    return OscillationCheck(lam, beta, k, m, p, u_main, u_dev, ok, reason,
                            {"gamma_A": gA, "gamma_B": gB, "lhs": lhs, "rhs": rhs})


def comp_osc_is_nash(m: float, p: float, beta: float, lam: float, k: int) -> OscillationCheck:
    """Closed-form check of the competitive oscillation (``lam < -1``).

    Nash iff ``1 + beta + ... + beta**(k-1)`` exceeds both
    ``(|lam|(1+beta) - 1)/(|lam| - 1)`` (Bob's deviation) and
    ``|lam| beta / (|lam| beta - 1)`` (Alice's deviation, needs ``|lam| beta > 1``).
    ``u_main``/``u_deviation`` are Bob's utilities on the main line and after
    switching to right from round 1.
    """
    _check_point_mass_args(m, p, beta, k)
    if not lam < -1:
        raise DomainError(f"the competitive construction needs lambda < -1, got {lam}")
    a = abs(lam)
    geo = (1.0 - beta**k) / (1.0 - beta)
    bob_thr = (a * (1.0 + beta) - 1.0) / (a - 1.0)
    gA = p / (1.0 - beta)
    gB = (m - p) / (1.0 - beta**k) + p / (1.0 - beta)
    uA = gA + lam * gB
    uB = gB + lam * gA
    uB_dev = (1.0 + lam) * m / (1.0 - beta) + lam * (p - m) * (1.0 + beta)
    uA_tail = p / (1.0 - beta) + lam * p + lam * beta * ((m - p) / (1.0 - beta**k) + p / (1.0 - beta))
    uA_tail_dev = m / (1.0 - beta) + lam * (p + beta * m / (1.0 - beta))
    reasons = []
    if not geo > bob_thr:
        reasons.append(f"geometric sum {geo:.9g} <= Bob threshold {bob_thr:.9g}")
    if a * beta <= 1.0:
        alice_thr = math.inf
        reasons.append("|lambda| beta <= 1: Alice threshold unreachable")
    else:
        alice_thr = a * beta / (a * beta - 1.0)
        if not geo > alice_thr:
            reasons.append(f"geometric sum {geo:.9g} <= Alice threshold {alice_thr:.9g}")
    details = {"geometric_sum": geo, "bob_threshold": bob_thr, "alice_threshold": alice_thr,
               "gamma_A": gA, "gamma_B": gB, "u_A": uA, "u_B": uB,
               "u_A_tail": uA_tail, "u_A_tail_deviation": uA_tail_dev}
    return OscillationCheck(lam, beta, k, m, p, uB, uB_dev, not reasons, "; ".join(reasons), details)


@dataclass(frozen=True)
class DeviationReport:
    player: str
    u_main: float
    best_deviation: float
    best_round: int
    best_arm: str
    error_bound: float

    @property
    def profitable(self) -> bool:
        return self.best_deviation > self.u_main + 2.0 * self.error_bound


def fixed_arm_deviations(config: GameConfig, sA: Strategy, sB: Strategy, player: str,
                         max_start: int | None = None) -> DeviationReport:
    """Best deviation of ``player`` to a fixed arm from some round on, by exact evaluation."""
    base = evaluate_profile(config, sA, sB)
    u_main = base.u_A if player == "A" else base.u_B
    max_start = config.n_rounds - 1 if max_start is None else max_start
    best = (-math.inf, -1, L)
    for start in range(max_start + 1):
        for arm in (L, R):
            if player == "A":
                res = evaluate_profile(config, with_fixed_arm_from(sA, start, arm), sB)
                u = res.u_A
            else:
                res = evaluate_profile(config, sA, with_fixed_arm_from(sB, start, arm))
                u = res.u_B
            if u > best[0]:
                best = (u, start, arm)
    return DeviationReport(player, u_main, best[0], best[1], best[2], config.error_bound)


def osc_config(m: float, p: float, beta: float, lam: float, H: int) -> GameConfig:
    """Game instance with a point-mass risky arm, as the oscillation constructions assume."""
    return GameConfig(p=p, prior=point_mass(m), lam=lam, beta=beta, H=H)


def trigger_zero_sum(config: GameConfig, depth: int = 4, player: str = "B") -> Strategy:
    """Left until the opponent's first right pull at round ``k``; from ``k+1`` on,
    the zero-sum optimal strategy of the game whose round 0 is forced to
    (opponent right, self left), shifted by ``k``. Left beyond the solved depth.
    """
    from .zerosum.seqform import solve_game

    if player not in ("A", "B"):
        raise DomainError(f"player must be 'A' or 'B', got {player!r}")
    other = "A" if player == "B" else "B"
    zs = (config.with_(lam=-1.0, H=depth) if config.discounted
          else config.with_(lam=-1.0, T=depth))
    gv = solve_game(zs, {other: {0: R}, player: {0: L}})
    cont = gv.strategy(player)

    def key(h: History):
        k = h.first_opp_right()
        if k is None or h.t <= k:
            return "wait"
        sub = h.shifted(k)
        return ("play", cont.state_key(sub)) if sub.t <= depth else "done"

    def rule(h: History) -> float:
        k = h.first_opp_right()
        if k is None or h.t <= k:
            return 0.0
        sub = h.shifted(k)
        return cont.prob_right(sub) if sub.t <= depth else 0.0

    strat = Strategy("trigger-zs", rule, key=key,
                     params={"depth": depth, "player": player, "value": -gv.value
                             if player == "B" else gv.value})
    return strat


STRATEGY_NAMES = ("left", "right", "copy", "reveal", "mix-rs", "gittins", "grim", "osc-coop",
                  "osc-comp", "trigger-zs", "stop-on-fail")


def parse_strategy(spec: str, config: GameConfig | None = None, role: str = "A") -> Strategy:
    """Build a strategy from a CLI name such as ``copy`` or ``osc-coop:k=5``.

    ``gittins``/``grim`` need a discount and reference probability (taken from
    ``config`` unless given); ``trigger-zs`` needs a finite-support ``config``.
    Oscillation pairs return the component for ``role``.
    """
    name, _, argtext = spec.partition(":")
    args = {}
    for part in filter(None, argtext.split(",")):
        key, eq, val = part.partition("=")
        if not eq:
            raise DomainError(f"strategy argument must look like key=value, got {part!r}")
        args[key.strip()] = val.strip()
    name = name.strip().lower()
    if name not in STRATEGY_NAMES:
        raise DomainError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGY_NAMES)}")
    try:
        if name == "left":
            return left()
        if name == "right":
            return right()
        if name == "copy":
            return copy_strategy()
        if name == "reveal":
            return reveal_strategy()
        if name == "mix-rs":
            return mix_rs()
        if name == "stop-on-fail":
            return right_until_failure()
        if name in ("gittins", "grim"):
            if config is None:
                raise DomainError(f"{name} needs a game configuration")
            b = float(args.get("beta", config.beta if config.beta is not None else "nan"))
            if not 0.0 < b < 1.0:
                raise DomainError(f"{name} needs a discount in (0, 1); pass beta=... or a discounted game")
            pr = float(args.get("p_ref", config.p))
            tie = args.get("ties", "left") == "right"
            maker = gittins if name == "gittins" else grim_trigger_gittins
            return maker(config.prior, b, pr, prefer_right=tie)
        if name in ("osc-coop", "osc-comp"):
            k = int(args.get("k", 5 if name == "osc-coop" else 4))
            pair = oscillating_coop(k) if name == "osc-coop" else oscillating_comp(k)
            return pair[0] if role == "A" else pair[1]
        if config is None:
            raise DomainError("trigger-zs needs a game configuration")
        return trigger_zero_sum(config, depth=int(args.get("depth", 4)), player=role)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad arguments for strategy {spec!r}: {exc}") from None


__all__ = [
    "left", "right", "copy_strategy", "reveal_strategy", "mix_rs", "right_until_failure",
    "gittins", "grim_trigger_gittins", "oscillating_coop", "oscillating_comp",
    "with_fixed_arm_from", "OscillationCheck", "coop_osc_is_nash", "comp_osc_is_nash",
    "DeviationReport", "fixed_arm_deviations", "osc_config", "trigger_zero_sum",
    "parse_strategy", "STRATEGY_NAMES",
]
