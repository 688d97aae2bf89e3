"""Sequence-form LP for the truncated zero-sum game.

Each player's information set at round ``t`` is the tuple of their own
observations ``(own action, own risky bit or None, opponent action)`` for
rounds ``0..t-1``. Sequences are (information set, action) pairs; the
empty sequence has index 0. Utilities are Alice's ``Gamma_A - Gamma_B``:
Alice maximises the value, Bob minimises it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from ..errors import DomainError, LPError, NodeBudgetExceeded
from ..game import ACTIONS, L, R, GameConfig, History, Strategy
from .simplex import FEAS_TOL, solve_lp, tableau_text

DEFAULT_MAX_DEPTH = 4
CERT_TOL = 1e-9


def observation_key(h: History) -> tuple:
    """Information-set key of a history (left-arm bits are not part of it)."""
    return tuple((a, r if a == R else None, b)
                 for a, r, b in zip(h.own_actions, h.own_rewards, h.opp_actions))


@dataclass
class PlayerSpace:
    """Information sets and sequences of one player."""

    forced: dict
    infosets: list = field(default_factory=list)  # key per infoset
    infoset_parent: list = field(default_factory=list)  # parent sequence per infoset
    seq_of: dict = field(default_factory=dict)  # (infoset index, action) -> sequence
    index: dict = field(default_factory=dict)  # key -> infoset index
    n_seqs: int = 1

    def infoset(self, key, parent_seq: int) -> int:
        i = self.index.get(key)
        if i is None:
            i = len(self.infosets)
            self.index[key] = i
            self.infosets.append(key)
            self.infoset_parent.append(parent_seq)
            for a in ACTIONS:
                self.seq_of[(i, a)] = self.n_seqs
                self.n_seqs += 1
        return i

    def constraints(self) -> tuple[np.ndarray, np.ndarray]:
        """``E x = e``: root row plus one row per information set."""
        E = np.zeros((len(self.infosets) + 1, self.n_seqs))
        E[0, 0] = 1.0
        for i, parent in enumerate(self.infoset_parent):
            E[i + 1, parent] = -1.0
            for a in ACTIONS:
                E[i + 1, self.seq_of[(i, a)]] = 1.0
        e = np.zeros(len(self.infosets) + 1)
        e[0] = 1.0
        return E, e


def _check_forced(forced: Mapping | None) -> dict:
    out = {"A": {}, "B": {}}
    for who, moves in (forced or {}).items():
        if who not in out:
            raise DomainError(f"forced moves are keyed by 'A' or 'B', got {who!r}")
        for t, a in moves.items():
            if a not in ACTIONS:
                raise DomainError(f"forced action must be L or R, got {a!r}")
            out[who][int(t)] = a
    return out


@dataclass
class SequenceFormLP:
    config: GameConfig
    forced: dict
    alice: PlayerSpace
    bob: PlayerSpace
    payoff: dict  # (seqA, seqB) -> expected contribution to Gamma_A - Gamma_B
    nodes: int

    def payoff_matrix(self) -> np.ndarray:
        A = np.zeros((self.alice.n_seqs, self.bob.n_seqs))
        for (i, j), v in self.payoff.items():
            A[i, j] += v
        return A

    def _alice_program(self, exact: bool):
        A = self.payoff_matrix()
        E, e = self.alice.constraints()
        F, f = self.bob.constraints()
        nx, nq = A.shape[0], F.shape[0]
        # variables (x, q): max f.q  s.t.  F^T q - A^T x <= 0,  E x = e,  x >= 0, q free
        c = np.concatenate([np.zeros(nx), f])
        A_ub = np.hstack([-A.T, F.T])
        b_ub = np.zeros(A_ub.shape[0])
        A_eq = np.hstack([E, np.zeros((E.shape[0], nq))])
        free = np.concatenate([np.zeros(nx, bool), np.ones(nq, bool)])
        return c, A_ub, b_ub, A_eq, e, free, nx

    def _bob_program(self, exact: bool):
        A = self.payoff_matrix()
        E, e = self.alice.constraints()
        F, f = self.bob.constraints()
        ny, np_ = A.shape[1], E.shape[0]
        # variables (y, p): min e.p  s.t.  A y - E^T p <= 0,  F y = f,  y >= 0, p free
        c = np.concatenate([np.zeros(ny), e])
        A_ub = np.hstack([A, -E.T])
        b_ub = np.zeros(A_ub.shape[0])
        A_eq = np.hstack([F, np.zeros((F.shape[0], np_))])
        free = np.concatenate([np.zeros(ny, bool), np.ones(np_, bool)])
        return c, A_ub, b_ub, A_eq, f, free, ny

    def tableau_text(self) -> str:
        c, A_ub, b_ub, A_eq, b_eq, _, nx = self._alice_program(False)
        names = [f"x{j}" for j in range(nx)] + [f"q{j}" for j in range(len(c) - nx)]
        head = (f"# Alice program: maximise q0; {A_ub.shape[0]} inequality rows, "
                f"{A_eq.shape[0]} equality rows\n")
        return head + tableau_text(-c, A_ub, b_ub, A_eq, b_eq, names)

    def size(self) -> dict:
        return {"alice_sequences": self.alice.n_seqs, "bob_sequences": self.bob.n_seqs,
                "alice_infosets": len(self.alice.infosets), "bob_infosets": len(self.bob.infosets),
                "nodes": self.nodes}


def build_sequence_form(config: GameConfig, forced: Mapping | None = None,
                        max_depth: int = DEFAULT_MAX_DEPTH) -> SequenceFormLP:
    """Sequence form of the truncated zero-sum game with optional forced moves.

    ``forced`` maps a player (``"A"`` or ``"B"``) to ``{round: action}``. The
    game has ``config.n_rounds`` rounds; at most ``max_depth + 1`` are allowed.
    """
    if config.lam != -1.0:
        raise DomainError(f"the zero-sum solver needs lambda = -1, got {config.lam}")
    if config.n_rounds - 1 > max_depth:
        raise NodeBudgetExceeded(
            f"{config.n_rounds} rounds exceed the solver depth budget of {max_depth + 1}")
    prior = config.finite_prior()
    forced = _check_forced(forced)
    alice, bob = PlayerSpace(forced["A"]), PlayerSpace(forced["B"])
    p = config.p
    payoff: dict = {}
    # node: (atom, chance, obsA, obsB, seqA, seqB)
    frontier = [(i, w, (), (), 0, 0) for i, (_, w) in enumerate(prior.atoms)]
    total = len(frontier)
    last = config.n_rounds - 1
    for t in range(config.n_rounds):
        disc = config.discount(t)
        nxt = []
        for i, chance, obsA, obsB, sA, sB in frontier:
            x = prior.atoms[i][0]
            if t in alice.forced:
                optsA = [(alice.forced[t], sA)]
            else:
                ia = alice.infoset(obsA, sA)
                optsA = [(a, alice.seq_of[(ia, a)]) for a in ACTIONS]
            if t in bob.forced:
                optsB = [(bob.forced[t], sB)]
            else:
                ib = bob.infoset(obsB, sB)
                optsB = [(b, bob.seq_of[(ib, b)]) for b in ACTIONS]
            for a, sa in optsA:
                for b, sb in optsB:
                    gain = (x if a == R else p) - (x if b == R else p)
                    if gain != 0.0:
                        payoff[(sa, sb)] = payoff.get((sa, sb), 0.0) + chance * disc * gain
                    if t == last:
                        continue
                    bitsA = ((1, x), (0, 1.0 - x)) if a == R else ((None, 1.0),)
                    bitsB = ((1, x), (0, 1.0 - x)) if b == R else ((None, 1.0),)
                    for ba, qa in bitsA:
                        for bb, qb in bitsB:
                            q = chance * qa * qb
                            if q > 0.0:
                                nxt.append((i, q, obsA + ((a, ba, b),), obsB + ((b, bb, a),), sa, sb))
        total += len(nxt)
        if total > config.node_budget:
            raise NodeBudgetExceeded(f"sequence form exceeded {config.node_budget} nodes")
        frontier = nxt
    return SequenceFormLP(config, forced, alice, bob, payoff, total)


@dataclass
class GameValue:
    """Maximin value for Alice with realization plans and the primal/dual gap."""

    value: float
    alice_value: float
    bob_value: float
    gap: float
    plan_A: np.ndarray
    plan_B: np.ndarray
    lp: SequenceFormLP
    exact: bool = False

    def strategy(self, who: str) -> Strategy:
        """Behavioural strategy decoded from ``who``'s realization plan."""
        space = self.lp.alice if who == "A" else self.lp.bob
        plan = self.plan_A if who == "A" else self.plan_B
        forced = dict(space.forced)
        probs = {}
        for i, key in enumerate(space.infosets):
            reach = float(plan[space.infoset_parent[i]])
            right = float(plan[space.seq_of[(i, R)]])
            probs[key] = min(1.0, max(0.0, right / reach)) if reach > FEAS_TOL else 0.0

        def rule(h: History) -> float:
            if h.t in forced:
                return 1.0 if forced[h.t] == R else 0.0
            return probs.get(observation_key(h), 0.0)

        return Strategy(f"zero-sum-{who}", rule, key=observation_key,
                        params={"rounds": self.lp.config.n_rounds})

    def to_json(self) -> dict:
        return {
            "value": float(self.value),
            "alice_value": float(self.alice_value),
            "bob_value": float(self.bob_value),
            "gap": float(self.gap),
            "exact": self.exact,
            "plan_A": [float(v) for v in self.plan_A],
            "plan_B": [float(v) for v in self.plan_B],
            "size": self.lp.size(),
            "config": self.lp.config.to_json(),
            "forced": {k: {str(t): a for t, a in v.items()} for k, v in self.lp.forced.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def solve(lp: SequenceFormLP, exact: bool = False, tol: float = FEAS_TOL) -> GameValue:
    """Solve Alice's and Bob's programs; both optima must agree within 1e-9."""
    c, A_ub, b_ub, A_eq, b_eq, free, nx = lp._alice_program(exact)
    ra = solve_lp(c, A_ub, b_ub, A_eq, b_eq, free=free, maximize=True, exact=exact, tol=tol)
    c, A_ub, b_ub, A_eq, b_eq, free, ny = lp._bob_program(exact)
    rb = solve_lp(c, A_ub, b_ub, A_eq, b_eq, free=free, maximize=False, exact=exact, tol=tol)
    va, vb = ra.objective, rb.objective
    gap = abs(va - vb)
    if exact:
        if gap != 0:
            raise LPError(f"exact primal and dual values differ: {va} vs {vb}")
    elif gap > CERT_TOL:
        raise LPError(f"primal/dual gap {gap:.3g} exceeds {CERT_TOL}")
    convert = (lambda v: v) if exact else float
    return GameValue(convert(va), convert(va), convert(vb), convert(gap),
                     ra.x[:nx], rb.x[:ny], lp, exact)


def solve_game(config: GameConfig, forced: Mapping | None = None, exact: bool = False,
               max_depth: int = DEFAULT_MAX_DEPTH) -> GameValue:
    return solve(build_sequence_form(config, forced, max_depth), exact=exact)


def parse_forced(specs) -> dict:
    """Parse ``["A:0:R", "B:0:L"]`` into ``{"A": {0: "R"}, "B": {0: "L"}}``."""
    out = {"A": {}, "B": {}}
    for s in specs or ():
        try:
            who, t, a = s.split(":")
            out[who.upper()][int(t)] = a.upper()
        except (ValueError, KeyError):
            raise DomainError(f"forced move must look like A:0:R, got {s!r}") from None
    return _check_forced(out)
