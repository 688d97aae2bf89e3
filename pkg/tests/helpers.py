"""Shared fixtures-as-functions and hypothesis generators."""

import numpy as np
from hypothesis import strategies as st

from banditduel.priors import FiniteSupport


@st.composite
def finite_priors(draw, min_atoms=2, max_atoms=5, nondegenerate=True):
    n = draw(st.integers(min_atoms, max_atoms))
    xs = draw(st.lists(st.integers(0, 1000), min_size=n, max_size=n, unique=True))
    ws = draw(st.lists(st.integers(1, 100), min_size=n, max_size=n))
    return FiniteSupport.from_weights([x / 1000 for x in xs], ws)


def random_finite_prior(rng: np.random.Generator, max_atoms=5) -> FiniteSupport:
    n = int(rng.integers(2, max_atoms + 1))
    xs = rng.choice(np.arange(1001), size=n, replace=False) / 1000
    ws = rng.uniform(0.05, 1.0, size=n)
    return FiniteSupport.from_weights(xs, ws)


def random_prior_sweep(n=100, seed=2024):
    rng = np.random.default_rng(seed)
    return [random_finite_prior(rng) for _ in range(n)]


def observation(h):
    return tuple(zip(h.own_actions, h.own_rewards, h.opp_actions))


def random_strategy(seed, pure=False, opening=None):
    """A reproducible random behavioural strategy over full observations.

    ``opening`` (a string over {L, R}) pins the first rounds.
    """
    import random

    from banditduel.game import Strategy

    rng = random.Random(seed)
    table = {}

    def rule(h):
        if opening is not None and h.t < len(opening):
            return 1.0 if opening[h.t] == "R" else 0.0
        key = observation(h)
        if key not in table:
            table[key] = float(rng.random() < 0.5) if pure else rng.choice([0.0, 1.0, rng.random()])
        return table[key]

    return Strategy(f"random-{seed}", rule, key=observation)
