"""Closed-form exploration thresholds and bounds, and the region table."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Sequence

from .errors import DomainError
from .gittins import gittins_discounted
from .priors import Prior, moments

CSV_COLUMNS = ("prior_id", "beta", "m", "p_tilde_lb", "p_star_ub", "g", "p_hat_lb",
               "p_circ", "m_star", "finite_competing", "gittins_lb")


@dataclass(frozen=True)
class ThresholdSet:
    m: float
    p_tilde_lb: float  # competitors explore below this (m + beta w / 2)
    p_star_ub: float  # competitors never explore above this
    g: float
    p_hat_lb: float  # cooperators still explore below this
    p_circ: float  # cooperators never explore above this
    m_star: float
    finite_competing: float  # finite-horizon competitors never explore above this
    gittins_lb: float

    def ordering_violations(self, g_tol: float = 0.0) -> list[str]:
        """Names of the region-ordering inequalities that fail.

        ``g_tol`` is the absolute accuracy of ``g``; comparisons involving it
        are granted that slack.
        """
        checks = [
            ("m < p_tilde_lb", self.m < self.p_tilde_lb),
            ("p_tilde_lb <= gittins_lb", self.p_tilde_lb <= self.gittins_lb),
            ("gittins_lb <= g", self.gittins_lb <= self.g + g_tol),
            ("p_tilde_lb <= p_star_ub", self.p_tilde_lb <= self.p_star_ub + g_tol),
            ("p_star_ub < g", self.p_star_ub < self.g),
            ("g < p_hat_lb", self.g < self.p_hat_lb),
            ("p_circ < m_star", self.p_circ < self.m_star),
        ]
        return [name for name, ok in checks if not ok]


def thresholds(prior: Prior, beta: float, tol: float = 1e-6) -> ThresholdSet:
    """Every threshold of the region diagram for ``(prior, beta)``."""
    mom = moments(prior)
    mom.require_nondegenerate()
    m, w, ms = mom.m, mom.w, mom.m_star
    g = gittins_discounted(prior, beta, tol).index
    return ThresholdSet(
        m=m,
        p_tilde_lb=m + beta * w / 2.0,
        p_star_ub=(m * beta + g) / (1.0 + beta),
        g=g,
        p_hat_lb=g + beta**2 * w * (1.0 - beta) / 4.0,
        p_circ=((1.0 - beta) * m + 2.0 * beta * ms) / (1.0 + beta),
        m_star=ms,
        finite_competing=(m + ms) / 2.0,
        gittins_lb=m + beta * w / (1.0 + m * beta),
    )


def neutral_decay_bound(alpha: float, p: float, beta: float, t: int) -> tuple[int, float]:
    """Block length ``k`` and the bound on P(no one explored by round ``t``).

    ``k`` is the smallest integer with ``beta**k <= (alpha - p) / 2``; the bound
    is ``(1 - (alpha - p) / 2) ** floor(t / k)``.
    """
    if not alpha > p:
        raise DomainError(f"need alpha > p for a nonvacuous bound, got alpha={alpha}, p={p}")
    if alpha > 1.0 or not 0.0 < beta < 1.0 or t < 0:
        raise DomainError("need alpha <= 1, beta in (0, 1) and t >= 0")
    gap = (alpha - p) / 2.0
    k = max(1, math.ceil(math.log(gap) / math.log(beta)))
    while k > 1 and beta ** (k - 1) <= gap:
        k -= 1
    while beta**k > gap:
        k += 1
    return k, (1.0 - gap) ** (t // k)


def uniform_net_gain_bounds(p: float) -> tuple[float, float]:
    """Bounds on the forced explorer's net gain under a uniform prior (beta -> 1).

    Returns ``(lb, ub)`` with ``lb = min(1/6 + p^3/6 - p^2/2, 5/6 - 3p/2)`` and
    ``ub = p^2/2 + 1 - 2p``.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    lb = min(1.0 / 6.0 + p**3 / 6.0 - p**2 / 2.0, 5.0 / 6.0 - 1.5 * p)
    ub = p**2 / 2.0 + 1.0 - 2.0 * p
    return lb, ub


@dataclass
class RegionRow:
    prior_id: str
    beta: float
    values: ThresholdSet | None
    flag: str = ""


def region_table(priors: Sequence[Prior], betas: Sequence[float],
                 prior_ids: Sequence[str] | None = None, tol: float = 1e-6) -> list[RegionRow]:
    """One row per ``(prior, beta)``, in input order.

    A cell that fails (e.g. a degenerate prior) or breaks the ordering
    invariants is kept and flagged instead of aborting the sweep.
    """
    if not priors or not betas:
        raise DomainError("region table needs nonempty prior and beta grids")
    ids = list(prior_ids) if prior_ids is not None else [str(i) for i in range(len(priors))]
    rows = []
    for pid, prior in zip(ids, priors):
        for beta in betas:
            try:
                ts = thresholds(prior, beta, tol)
            except (DomainError, ValueError) as exc:
                rows.append(RegionRow(pid, beta, None, f"error: {exc}"))
                continue
            bad = ts.ordering_violations(g_tol=tol)
            rows.append(RegionRow(pid, beta, ts, "; ".join(bad)))
    return rows


def fmt(x: float) -> str:
    return format(x, ".9g")


def region_csv(rows: Sequence[RegionRow]) -> str:
    """CSV text with the documented columns plus a trailing ``flag`` column."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS + ("flag",))
    for row in rows:
        if row.values is None:
            cells = [""] * (len(CSV_COLUMNS) - 2)
        else:
            d = asdict(row.values)
            cells = [fmt(d[c]) for c in CSV_COLUMNS[2:]]
        writer.writerow([row.prior_id, fmt(row.beta), *cells, row.flag])
    return buf.getvalue()
