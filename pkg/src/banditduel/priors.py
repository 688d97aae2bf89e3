"""Priors over the risky arm's success probability.

Two representations are supported: a finite support (needed for exact game
enumeration) and the Beta family (conjugate updates, uniform prior as
``Beta(1, 1)``). Every posterior reachable from a prior is determined by the
number of observed successes and failures, so most helpers take ``(s, f)``
counts instead of materialised posteriors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Union

import numpy as np
from scipy import special

from .errors import DegeneratePriorError, DomainError, ImpossibleEvidenceError

NORMALIZATION_TOL = 1e-12
_INPUT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class FiniteSupport:
    """Prior with finitely many atoms ``(x, weight)``, sorted by ``x``."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple(sorted((float(x), float(w)) for x, w in self.atoms))
        if not atoms:
            raise DomainError("finite prior needs at least one atom")
        xs = [x for x, _ in atoms]
        if any(not 0.0 <= x <= 1.0 for x in xs):
            raise DomainError(f"atoms must lie in [0, 1], got {xs}")
        if len(set(xs)) != len(xs):
            raise DomainError(f"atoms must be distinct, got {xs}")
        ws = [w for _, w in atoms]
        if any(not w > 0.0 for w in ws):
            raise DomainError(f"atom weights must be strictly positive, got {ws}")
        total = math.fsum(ws)
        if abs(total - 1.0) > _INPUT_SUM_TOL:
            raise DomainError(f"atom weights must sum to 1, got {total!r}")
        atoms = tuple((x, w / total) for x, w in atoms)
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_weights(cls, xs, ws) -> FiniteSupport:
        """Build from unnormalised weights, dropping zero-weight atoms."""
        xs = np.asarray(xs, dtype=float)
        ws = np.asarray(ws, dtype=float)
        total = ws.sum()
        if not total > 0:
            raise ImpossibleEvidenceError("all posterior weight vanished")
        keep = ws > 0
        return cls(tuple(zip(xs[keep].tolist(), (ws[keep] / total).tolist())))

    @property
    def xs(self) -> np.ndarray:
        return np.array([x for x, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms])

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class Beta:
    """Beta(a, b) prior; ``Beta(1, 1)`` is the uniform prior."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Beta parameters must be positive, got ({self.a}, {self.b})")


Prior = Union[FiniteSupport, Beta]


def uniform() -> Beta:
    return Beta(1.0, 1.0)


def two_point(lo: float = 0.0, hi: float = 1.0, w_hi: float = 0.5) -> FiniteSupport:
    return FiniteSupport(((lo, 1.0 - w_hi), (hi, w_hi)))


def point_mass(x: float) -> FiniteSupport:
    return FiniteSupport(((x, 1.0),))


@dataclass(frozen=True)
class Moments:
    """Mean ``m``, variance ``w``, one-step posterior means and sup of support."""

    m: float
    w: float
    m1: float
    m0: float
    m_star: float

    @property
    def degenerate(self) -> bool:
        return self.w <= 0.0

    def require_nondegenerate(self) -> None:
        if self.degenerate:
            raise DegeneratePriorError("prior is a point mass (variance 0)")


def moments(prior: Prior) -> Moments:
    """Exact moments of ``prior``.

    For a point mass the one-step posterior means are the atom itself (the
    impossible branch is reported at its limit) and ``degenerate`` is set.
    """
    if isinstance(prior, Beta):
        a, b = prior.a, prior.b
        n = a + b
        m = a / n
        w = a * b / (n * n * (n + 1.0))
        return Moments(m=m, w=w, m1=(a + 1.0) / (n + 1.0), m0=a / (n + 1.0), m_star=1.0)
    xs, ws = prior.xs, prior.weights
    m = math.fsum(xs * ws)
    second = math.fsum(xs * xs * ws)
    w = max(math.fsum(ws * (xs - m) ** 2), 0.0)
    m1 = second / m if m > 0 else float(xs[0])
    m0 = (m - second) / (1.0 - m) if m < 1 else float(xs[-1])
    return Moments(m=m, w=w, m1=m1, m0=m0, m_star=float(xs[-1]))


def update(prior: Prior, outcome: int) -> Prior:
    """Posterior after one pull of the risky arm that returned ``outcome``."""
    if outcome not in (0, 1):
        raise DomainError(f"outcome must be 0 or 1, got {outcome!r}")
    if isinstance(prior, Beta):
        if outcome:
            return Beta(prior.a + 1.0, prior.b)
        return Beta(prior.a, prior.b + 1.0)
    xs, ws = prior.xs, prior.weights
    lik = xs if outcome else 1.0 - xs
    if not np.any(lik * ws > 0):
        raise ImpossibleEvidenceError(
            f"outcome {outcome} has probability zero under atoms {xs.tolist()}")
    return FiniteSupport.from_weights(xs, ws * lik)


def posterior(prior: Prior, s: int, f: int) -> Prior:
    """Posterior after ``s`` successes and ``f`` failures."""
    if isinstance(prior, Beta):
        return Beta(prior.a + s, prior.b + f)
    logw = _log_posterior_weights(prior, np.array([s]), np.array([f]))[0]
    if np.all(np.isneginf(logw)):
        raise ImpossibleEvidenceError(f"({s}, {f}) has probability zero")
    ws = np.exp(logw - logw.max())
    return FiniteSupport.from_weights(prior.xs, ws)


def _log_posterior_weights(prior: FiniteSupport, s: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Unnormalised log posterior weights, one row per ``(s, f)`` pair.

    ``0 * log 0`` counts as 0, so atoms at 0 or 1 are handled exactly.
    """
    xs = prior.xs
    s = np.asarray(s, dtype=float)
    f = np.asarray(f, dtype=float)
    with np.errstate(divide="ignore"):
        lx = np.where(xs > 0, np.log(np.where(xs > 0, xs, 1.0)), 0.0)
        l1 = np.where(xs < 1, np.log1p(-np.where(xs < 1, xs, 0.0)), 0.0)
    out = np.log(prior.weights)[None, :] + np.outer(s, lx) + np.outer(f, l1)
    dead0, dead1 = xs <= 0, xs >= 1
    if dead0.any():
        out[np.ix_(s > 0, dead0)] = -np.inf
    if dead1.any():
        out[np.ix_(f > 0, dead1)] = -np.inf
    return out


def layer_means(prior: Prior, n: int) -> np.ndarray:
    """Posterior means for every ``(s, n - s)``, ``s = 0..n``.

    States of probability zero (possible with atoms at 0 or 1) get mean 0;
    callers always weight them by zero.
    """
    s = np.arange(n + 1)
    if isinstance(prior, Beta):
        return (prior.a + s) / (prior.a + prior.b + n)
    logw = _log_posterior_weights(prior, s, n - s)
    top = logw.max(axis=1, keepdims=True)
    possible = np.isfinite(top[:, 0])
    out = np.zeros(n + 1)
    if possible.any():
        w = np.exp(logw[possible] - top[possible])
        out[possible] = (w @ prior.xs) / w.sum(axis=1)
    return out


def exact_atoms(prior: FiniteSupport) -> list[tuple[Fraction, Fraction]]:
    """Atoms as decimal-exact fractions, weights renormalised exactly."""
    raw = [(Fraction(repr(x)), Fraction(repr(w))) for x, w in prior.atoms]
    total = sum(w for _, w in raw)
    return [(x, w / total) for x, w in raw]


def posterior_mean(prior: Prior, s: int, f: int, exact: bool = False):
    """Posterior mean after ``(s, f)``; ``None`` if the state is impossible.

    With ``exact=True`` (finite support only) the result is a ``Fraction``.
    """
    if isinstance(prior, Beta):
        if exact:
            a, b = Fraction(repr(prior.a)), Fraction(repr(prior.b))
            return (a + s) / (a + b + s + f)
        return (prior.a + s) / (prior.a + prior.b + s + f)
    if exact:
        num = den = Fraction(0)
        for x, w in exact_atoms(prior):
            lik = w * x**s * (1 - x) ** f
            num += lik * x
            den += lik
        return num / den if den else None
    m = layer_means(prior, s + f)[s]
    logw = _log_posterior_weights(prior, np.array([s]), np.array([f]))[0]
    return None if np.all(np.isneginf(logw)) else float(m)


def expected_best_mean(prior: Prior, p: float) -> float:
    """``E[max(p, theta)]`` under ``prior``.

    An atom exactly at ``p`` is counted at value ``p`` (ties go to the known
    arm), which leaves the expectation unchanged.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if isinstance(prior, Beta):
        a, b = prior.a, prior.b
        m = a / (a + b)
        below = special.betainc(a, b, p)
        mean_above = m * (1.0 - special.betainc(a + 1.0, b, p))
        return float(p * below + mean_above)
    return math.fsum(w * max(p, x) for x, w in prior.atoms)


def sample_theta(prior: Prior, rng: np.random.Generator) -> float:
    if isinstance(prior, Beta):
        return float(rng.beta(prior.a, prior.b))
    idx = rng.choice(len(prior.atoms), p=prior.weights)
    return float(prior.atoms[idx][0])


def to_json(prior: Prior) -> dict:
    if isinstance(prior, Beta):
        return {"type": "beta", "a": prior.a, "b": prior.b}
    return {"type": "finite", "atoms": [[x, w] for x, w in prior.atoms]}


def from_json(obj) -> Prior:
    """Parse ``{"type": "finite", "atoms": [[x, w], ...]}`` or ``{"type": "beta", ...}``."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise DomainError(f"prior must be an object with a 'type' field, got {obj!r}")
    kind = obj["type"]
    if kind == "finite":
        try:
            atoms = tuple((float(x), float(w)) for x, w in obj["atoms"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"bad finite prior atoms: {exc}") from None
        return FiniteSupport(atoms)
    if kind == "beta":
        try:
            return Beta(float(obj["a"]), float(obj["b"]))
        except KeyError as exc:
            raise DomainError(f"beta prior missing field {exc}") from None
    if kind == "uniform":
        return uniform()
    raise DomainError(f"unknown prior type {kind!r}")


def load_prior(spec: str) -> Prior:
    """Parse an inline JSON string or read it from a file path."""
    text = spec.strip()
    if not text.startswith("{"):
        path = Path(spec)
        if not path.exists():
            raise DomainError(f"prior is neither inline JSON nor a file: {spec!r}")
        text = path.read_text()
    try:
        return from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise DomainError(f"prior JSON does not parse: {exc}") from None
