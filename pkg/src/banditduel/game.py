"""The two-player one-armed bandit game: histories, strategies, exact evaluation.

Exact evaluation is a forward pass over nature's atom, both players' actions
and their private reward bits. Nodes are merged when nature's atom and both
strategies' state keys agree; a strategy's ``key`` must be a sufficient
statistic of its history for its future decisions (the default key is the
whole history, i.e. no merging).

A left pull carries no information about the risky arm, so unless a
strategy sets ``observes_left_rewards`` its left-arm bits are not
enumerated: the expected reward ``p`` is credited and the history records
``None`` for that bit.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Hashable, Mapping

from .errors import DomainError, NodeBudgetExceeded
from .gittins import ValueResult
from .priors import FiniteSupport, Prior, to_json

L = "L"
R = "R"
ACTIONS = (L, R)
DEFAULT_NODE_BUDGET = 10**7


@dataclass(frozen=True)
class History:
    """One player's view before round ``t``: own actions and bits, opponent's actions."""

    own_actions: tuple = ()
    own_rewards: tuple = ()
    opp_actions: tuple = ()

    @property
    def t(self) -> int:
        return len(self.own_actions)

    def extend(self, own_action: str, own_reward, opp_action: str) -> History:
        return History(self.own_actions + (own_action,), self.own_rewards + (own_reward,),
                       self.opp_actions + (opp_action,))

    def shifted(self, start: int) -> History:
        """The history seen from round ``start`` on."""
        return History(self.own_actions[start:], self.own_rewards[start:], self.opp_actions[start:])

    def risky_counts(self) -> tuple[int, int]:
        s = f = 0
        for a, r in zip(self.own_actions, self.own_rewards):
            if a == R:
                if r:
                    s += 1
                else:
                    f += 1
        return s, f

    def first_opp_right(self):
        for t, b in enumerate(self.opp_actions):
            if b == R:
                return t
        return None


@dataclass(frozen=True, eq=False)
class Strategy:
    """Behavioural strategy: ``rule(history)`` is the probability of playing right."""

    name: str
    rule: Callable[[History], float]
    key: Callable[[History], Hashable] | None = None
    params: Mapping = field(default_factory=dict)
    observes_left_rewards: bool = False

    def prob_right(self, h: History) -> float:
        q = float(self.rule(h))
        if not 0.0 <= q <= 1.0:
            raise DomainError(f"strategy {self.name} returned probability {q} at round {h.t}")
        return q

    def state_key(self, h: History) -> Hashable:
        return h if self.key is None else self.key(h)

    def __repr__(self) -> str:
        if self.params:
            args = ",".join(f"{k}={v}" for k, v in self.params.items())
            return f"Strategy({self.name}:{args})"
        return f"Strategy({self.name})"


@dataclass(frozen=True)
class GameConfig:
    """A game instance: discounted (``beta`` and truncation ``H``) or finite (``T``).

    The discounted game is evaluated on rounds ``0..H``; the finite game has
    rounds ``0..T`` without discounting.
    """

    p: float
    prior: Prior
    lam: float = 0.0
    beta: float | None = None
    H: int | None = None
    T: int | None = None
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p}")
        discounted = self.beta is not None or self.H is not None
        if discounted == (self.T is not None):
            raise DomainError("choose exactly one mode: discounted (beta, H) or finite (T)")
        if discounted:
            if self.beta is None or self.H is None:
                raise DomainError("discounted mode needs both beta and H")
            if not 0.0 < self.beta < 1.0:
                raise DomainError(f"discount must lie in (0, 1), got {self.beta}")
            if self.H < 0:
                raise DomainError("truncation depth H must be nonnegative")
        elif self.T < 0:
            raise DomainError("horizon T must be nonnegative")

    @property
    def discounted(self) -> bool:
        return self.T is None

    @property
    def n_rounds(self) -> int:
        return self.H + 1 if self.discounted else self.T + 1

    @property
    def step_discount(self) -> float:
        return self.beta if self.discounted else 1.0

    def discount(self, t: int) -> float:
        return self.beta**t if self.discounted else 1.0

    @property
    def error_bound(self) -> float:
        """Bound on the utility mass beyond the truncation."""
        if not self.discounted:
            return 0.0
        return (1.0 + abs(self.lam)) * self.beta ** (self.H + 1) / (1.0 - self.beta)

    def with_(self, **changes) -> GameConfig:
        return replace(self, **changes)

    def finite_prior(self) -> FiniteSupport:
        if not isinstance(self.prior, FiniteSupport):
            raise DomainError("exact game evaluation needs a finite-support prior")
        return self.prior

    def to_json(self) -> dict:
        out = {"p": self.p, "prior": to_json(self.prior), "lambda": self.lam}
        if self.discounted:
            out.update(beta=self.beta, H=self.H)
        else:
            out.update(T=self.T)
        return out


@dataclass(frozen=True)
class EvalResult:
    gamma_A: float
    gamma_B: float
    u_A: float
    u_B: float
    error_bound: float

    @classmethod
    def from_rewards(cls, gamma_A: float, gamma_B: float, lam: float, error_bound: float):
        return cls(gamma_A, gamma_B, gamma_A + lam * gamma_B, gamma_B + lam * gamma_A, error_bound)

    def to_json(self, config: GameConfig | None = None) -> dict:
        out = asdict(self)
        if config is not None:
            out["config"] = config.to_json()
        return out


def _bits(action: str, x: float, p: float, observes_left: bool):
    if action == R:
        prob_one = x
    elif observes_left:
        prob_one = p
    else:
        return ((None, 1.0),)
    return tuple((bit, q) for bit, q in ((1, prob_one), (0, 1.0 - prob_one)) if q > 0.0)


def _action_dist(q: float):
    return tuple((a, w) for a, w in ((L, 1.0 - q), (R, q)) if w > 0.0)


def _forward(config: GameConfig, sA: Strategy, sB: Strategy):
    """Exact forward pass; returns ``(gamma_A, gamma_B, first_exploration)``."""
    prior = config.finite_prior()
    p = config.p
    empty = History()
    nodes: dict = {}
    for i, (x, w) in enumerate(prior.atoms):
        k = (i, sA.state_key(empty), sB.state_key(empty), False)
        nodes[k] = [w, empty, empty]
    gA = gB = 0.0
    first = {}
    budget_used = 0
    last = config.n_rounds - 1
    for t in range(config.n_rounds):
        disc = config.discount(t)
        children: dict = {}
        explored_now = 0.0
        for (i, _, _, explored), (pr, hA, hB) in nodes.items():
            x = prior.atoms[i][0]
            for aA, pa in _action_dist(sA.prob_right(hA)):
                for aB, pb in _action_dist(sB.prob_right(hB)):
                    pj = pr * pa * pb
                    gA += pj * disc * (x if aA == R else p)
                    gB += pj * disc * (x if aB == R else p)
                    now = explored or aA == R or aB == R
                    if now and not explored:
                        explored_now += pj
                    if t == last:
                        continue
                    for bitA, qa in _bits(aA, x, p, sA.observes_left_rewards):
                        hA2 = hA.extend(aA, bitA, aB)
                        kA = sA.state_key(hA2)
                        for bitB, qb in _bits(aB, x, p, sB.observes_left_rewards):
                            hB2 = hB.extend(aB, bitB, aA)
                            key = (i, kA, sB.state_key(hB2), now)
                            budget_used += 1
                            node = children.get(key)
                            if node is None:
                                children[key] = [pj * qa * qb, hA2, hB2]
                            else:
                                node[0] += pj * qa * qb
                    if budget_used > config.node_budget:
                        raise NodeBudgetExceeded(
                            f"enumeration exceeded {config.node_budget} nodes at round {t}")
        if explored_now > 0.0:
            first[t] = explored_now
        nodes = children
    first["never"] = max(0.0, 1.0 - sum(first.values()))
    return gA, gB, first


def evaluate_profile(config: GameConfig, sA: Strategy, sB: Strategy) -> EvalResult:
    """Exact expected rewards and utilities of the profile on the truncated game."""
    gA, gB, _ = _forward(config, sA, sB)
    return EvalResult.from_rewards(gA, gB, config.lam, config.error_bound)


def first_exploration_stats(config: GameConfig, sA: Strategy, sB: Strategy) -> dict:
    """Distribution of the first round in which either player pulls right.

    Keys are round numbers plus ``"never"`` (no exploration within the
    truncated horizon).
    """
    _, _, first = _forward(config, sA, sB)
    return first


class _BeliefSolver:
    """Backward induction over the responder's beliefs.

    A belief is a normalised distribution over ``(atom, opponent key)`` with
    a representative opponent history for each support point. Values are
    memoised on ``(t, rounded belief)``, which is a sufficient statistic for
    the continuation problem.
    """

    def __init__(self, config: GameConfig, opponent: Strategy, forced: Mapping[int, str] | None,
                 tol: float):
        self.config = config
        self.prior = config.finite_prior()
        self.opp = opponent
        self.forced = dict(forced or {})
        for t, a in self.forced.items():
            if a not in ACTIONS:
                raise DomainError(f"forced action must be L or R, got {a!r} at round {t}")
        self.tol = tol
        self.memo: dict = {}
        self.last = config.n_rounds - 1
        self.expanded = 0
        self._filter_cache: dict = {}

    def root(self) -> dict:
        empty = History()
        return {(i, self.opp.state_key(empty)): [w, empty] for i, (_, w) in enumerate(self.prior.atoms)}

    @staticmethod
    def _normalise(belief: dict) -> tuple[float, dict]:
        z = sum(v[0] for v in belief.values())
        return z, {k: [v[0] / z, v[1]] for k, v in belief.items()}

    @staticmethod
    def _bkey(belief: dict):
        return frozenset((k, round(v[0], 12)) for k, v in belief.items())

    def step(self, t: int, belief: dict, a: str):
        """Immediate utility and unnormalised child beliefs for responder action ``a``."""
        p, lam = self.config.p, self.config.lam
        immediate = 0.0
        children: dict = {}
        for (i, _), (w, oh) in belief.items():
            x = self.prior.atoms[i][0]
            r_self = x if a == R else p
            for b, pb in _action_dist(self.opp.prob_right(oh)):
                immediate += w * pb * (r_self + lam * (x if b == R else p))
                if t == self.last:
                    continue
                for own_bit, q_own in _bits(a, x, p, False):
                    child = children.setdefault((own_bit, b), {})
                    for opp_bit, q_opp in _bits(b, x, p, self.opp.observes_left_rewards):
                        oh2 = oh.extend(b, opp_bit, a)
                        k = (i, self.opp.state_key(oh2))
                        self.expanded += 1
                        entry = child.get(k)
                        if entry is None:
                            child[k] = [w * pb * q_own * q_opp, oh2]
                        else:
                            entry[0] += w * pb * q_own * q_opp
        if self.expanded > self.config.node_budget:
            raise NodeBudgetExceeded(f"best response exceeded {self.config.node_budget} nodes")
        return immediate, children

    def value(self, t: int, belief: dict) -> tuple[float, str]:
        key = (t, self._bkey(belief))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        actions = (self.forced[t],) if t in self.forced else ACTIONS
        q = {}
        for a in actions:
            total, children = self.step(t, belief, a)
            for child in children.values():
                z, nb = self._normalise(child)
                total += self.config.step_discount * z * self.value(t + 1, nb)[0]
            q[a] = total
        if len(q) == 1:
            best = actions[0]
        else:
            best = R if q[R] > q[L] + self.tol * max(1.0, abs(q[L])) else L
        self.memo[key] = (q[best], best)
        return self.memo[key]

    def belief_at(self, h: History):
        """Filtered belief after the responder's history ``h``; ``None`` if impossible."""
        if h.t == 0:
            return self._normalise(self.root())[1]
        hit = self._filter_cache.get(h)
        if hit is not None or h in self._filter_cache:
            return hit
        prev = self.belief_at(History(h.own_actions[:-1], h.own_rewards[:-1], h.opp_actions[:-1]))
        out = None
        if prev is not None:
            a, b = h.own_actions[-1], h.opp_actions[-1]
            own_bit = h.own_rewards[-1] if a == R else None
            _, children = self.step(h.t - 1, prev, a)
            child = children.get((own_bit, b))
            if child:
                out = self._normalise(child)[1]
        self._filter_cache[h] = out
        return out

    def decide(self, h: History) -> float:
        if h.t > self.last:
            return 0.0
        belief = self.belief_at(h)
        if belief is None:
            return 1.0 if self.forced.get(h.t) == R else 0.0
        return 1.0 if self.value(h.t, belief)[1] == R else 0.0

    def key(self, h: History):
        belief = self.belief_at(h)
        return None if belief is None else self._bkey(belief)


def best_response(config: GameConfig, opponent: Strategy, responder: str = "A",
                  forced: Mapping[int, str] | None = None,
                  tol: float = 1e-12) -> tuple[Strategy, ValueResult]:
    """Exact best response on the truncated game.

    ``forced`` pins the responder's action in the given rounds (on every
    path); the remaining decisions are optimised. Ties go to left. The
    returned strategy re-derives the belief from any history it is shown, so
    it is total; its value is the responder's utility ``u = own + lam * other``.
    """
    if responder not in ("A", "B"):
        raise DomainError(f"responder must be 'A' or 'B', got {responder!r}")
    solver = _BeliefSolver(config, opponent, forced, tol)
    value, _ = solver.value(0, solver._normalise(solver.root())[1])
    strat = Strategy(f"best-response[{opponent.name}]", solver.decide, key=solver.key,
                     params={"responder": responder})
    return strat, ValueResult(value, config.error_bound, config.n_rounds)


def profile_json(config: GameConfig, result: EvalResult) -> str:
    return json.dumps(result.to_json(config), sort_keys=True)
