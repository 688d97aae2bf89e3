"""Dense two-phase tableau simplex.

Floating mode enters the steepest reduced cost and switches to Bland's
smallest-index rule during long degenerate runs; exact mode is pure Bland.

The same code runs in floating point (``numpy`` float64) or exactly
(object arrays of ``Fraction``); in exact mode the tolerance is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import LPError

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-7
STALL_FACTOR = 10
MAX_PIVOTS = 200_000


@dataclass
class LPResult:
    x: np.ndarray
    objective: object
    pivots: int


def _to_array(a, exact: bool, shape=None):
    if a is None:
        return np.zeros(shape, dtype=object if exact else float) if shape is not None else None
    if exact:
        arr = np.asarray(a, dtype=object)
        return np.vectorize(lambda v: v if isinstance(v, Fraction) else Fraction(v),
                            otypes=[object])(arr) if arr.size else arr
    return np.asarray(a, dtype=float)


class Tableau:
    """Standard-form tableau ``min c.x, A x = b, x >= 0`` with ``b >= 0``."""

    def __init__(self, A, b, exact: bool, tol: float, slack_rows=None):
        m, n = A.shape
        slack_rows = slack_rows or {}
        need = [i for i in range(m) if i not in slack_rows]
        self.m, self.n, self.n_art = m, n, len(need)
        self.exact = exact
        self.tol = 0 if exact else tol
        dtype = object if exact else float
        zero = Fraction(0) if exact else 0.0
        one = Fraction(1) if exact else 1.0
        T = np.full((m + 1, n + len(need) + 1), zero, dtype=dtype)
        T[:m, :n] = A
        T[:m, -1] = b
        self.basis = [slack_rows.get(i, -1) for i in range(m)]
        for k, i in enumerate(need):
            T[i, n + k] = one  # artificial variable
            self.basis[i] = n + k
        self.T = T
        self.pivots = 0

    def pivot(self, r: int, c: int) -> None:
        T = self.T
        T[r] = T[r] / T[r, c]
        col = T[:, c].copy()
        col[r] = 0
        nz = np.nonzero(col != 0)[0] if self.exact else np.nonzero(col)[0]
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        self.basis[r] = c
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise LPError("simplex exceeded the pivot limit")

    def set_objective(self, cost) -> None:
        """Load ``cost`` and price out the current basis."""
        T = self.T
        T[-1, :-1] = cost
        T[-1, -1] = 0
        for r, j in enumerate(self.basis):
            if T[-1, j] != 0:
                T[-1] -= T[-1, j] * T[r]

    def run(self, allowed: int) -> None:
        """Pivot over columns ``0..allowed-1`` until optimal.

        Exact mode uses Bland's smallest-index rule throughout. Floating
        mode enters the most-negative reduced cost and falls back to Bland's
        rule after ``STALL_FACTOR * m`` consecutive degenerate pivots, until a
        pivot makes progress again; cycling needs an unbroken degenerate run,
        which Bland's rule cannot sustain. Leaving-row ties always go to the
        smallest basic index, and pivot elements below ``PIVOT_TOL`` are
        never used in floating mode.
        """
        T, tol = self.T, self.tol
        piv_tol = 0 if self.exact else PIVOT_TOL
        stall = 0
        while True:
            bland = self.exact or stall >= STALL_FACTOR * self.m
            reduced = T[-1, :allowed]
            cand = np.nonzero(reduced < -tol)[0]
            if cand.size == 0:
                return
            order = cand if bland else cand[np.argsort(reduced[cand], kind="stable")]
            for c in order:
                column = T[:-1, c]
                rows = np.nonzero(column > piv_tol)[0]
                if rows.size:
                    break
                if np.all(column <= tol):
                    raise LPError("linear program is unbounded")
            else:
                raise LPError("no admissible pivot element (numerically singular tableau)")
            c = int(c)
            ratios = T[rows, -1] / column[rows]
            best = min(ratios)
            ties = [int(r) for r, q in zip(rows, ratios) if q - best <= tol]
            r = min(ties, key=lambda i: self.basis[i])
            stall = stall + 1 if best <= tol else 0
            self.pivot(r, c)

    def drive_out_artificials(self) -> None:
        """Pivot zero-level artificials out of the basis; drop redundant rows."""
        keep = []
        for r in range(self.m):
            if self.basis[r] < self.n:
                keep.append(r)
                continue
            row = self.T[r, : self.n]
            nz = np.nonzero(np.abs(row) > self.tol)[0] if not self.exact else np.nonzero(row != 0)[0]
            if nz.size:
                self.pivot(r, int(nz[0]))
                keep.append(r)
        if len(keep) < self.m:
            self.T = np.vstack([self.T[keep], self.T[-1:]])
            self.basis = [self.basis[r] for r in keep]
            self.m = len(keep)

    def solution(self) -> np.ndarray:
        zero = Fraction(0) if self.exact else 0.0
        x = np.full(self.n, zero, dtype=object if self.exact else float)
        for r, j in enumerate(self.basis):
            if j < self.n:
                x[j] = self.T[r, -1]
        return x


def solve_standard(c, A, b, exact: bool = False, tol: float = FEAS_TOL,
                   slack_rows=None) -> LPResult:
    """Minimise ``c.x`` subject to ``A x = b``, ``x >= 0``.

    ``slack_rows`` maps a row to a unit column of ``A`` (coefficient +1 in
    that row only) usable as its starting basic variable when ``b >= 0``;
    the other rows start from artificial variables.
    """
    A = _to_array(A, exact)
    b = _to_array(b, exact)
    c = _to_array(c, exact)
    m, n = A.shape
    neg = b < 0
    A = A.copy()
    b = b.copy()
    A[neg] = -A[neg]
    b[neg] = -b[neg]
    slack_rows = {i: j for i, j in (slack_rows or {}).items() if not neg[i]}
    tab = Tableau(A, b, exact, tol, slack_rows)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    k = tab.n_art
    phase1 = np.array([zero] * n + [one] * k, dtype=object if exact else float)
    tab.set_objective(phase1)
    tab.run(n + k)
    infeas = -tab.T[-1, -1]
    if infeas > (0 if exact else tol * max(1.0, float(np.max(np.abs(b)) if m else 1.0))):
        raise LPError(f"linear program is infeasible (phase-one residual {float(infeas):.3g})")
    tab.drive_out_artificials()
    tab.T = np.hstack([tab.T[:, :n], tab.T[:, -1:]])  # artificials are out for good
    tab.set_objective(c)
    tab.run(n)
    x = tab.solution()
    return LPResult(x, -tab.T[-1, -1], tab.pivots)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, free=None, maximize: bool = False,
             exact: bool = False, tol: float = FEAS_TOL) -> LPResult:
    """General LP: ``min`` (or ``max``) ``c.x`` with ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are nonnegative except those flagged in ``free``, which are
    split into positive and negative parts.
    """
    c = _to_array(c, exact)
    n = c.shape[0]
    free = np.zeros(n, dtype=bool) if free is None else np.asarray(free, dtype=bool)
    A_ub = _to_array(A_ub, exact, (0, n))
    A_eq = _to_array(A_eq, exact, (0, n))
    b_ub = _to_array(b_ub, exact, (0,))
    b_eq = _to_array(b_eq, exact, (0,))
    nf = int(free.sum())
    mu = A_ub.shape[0]
    dtype = object if exact else float
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    def widen(M):
        # columns: x, negative parts of free vars
        return np.hstack([M, -M[:, free]]) if nf else M

    Au = widen(A_ub)
    Ae = widen(A_eq)
    slack_u = np.full((mu, mu), zero, dtype=dtype)
    for i in range(mu):
        slack_u[i, i] = one
    A_std = np.vstack([
        np.hstack([Au, slack_u]),
        np.hstack([Ae, np.full((Ae.shape[0], mu), zero, dtype=dtype)]),
    ])
    b_std = np.concatenate([b_ub, b_eq])
    cc = -c if maximize else c
    c_std = np.concatenate([cc, -cc[free], np.full(mu, zero, dtype=dtype)])
    n_cols = Au.shape[1]
    res = solve_standard(c_std, A_std, b_std, exact=exact, tol=tol,
                         slack_rows={i: n_cols + i for i in range(mu)})
    x = res.x[:n].copy()
    if nf:
        x[free] = x[free] - res.x[n : n + nf]
    obj = -res.objective if maximize else res.objective
    return LPResult(x, obj, res.pivots)


def tableau_text(c, A_ub, b_ub, A_eq, b_eq, names=None) -> str:
    """Plain-text dump of an LP in ``min c.x`` row form, one constraint per line."""
    n = len(c)
    names = names or [f"x{j}" for j in range(n)]

    def row(coefs):
        return " ".join(f"{float(v):+.6g}*{names[j]}" for j, v in enumerate(coefs) if v != 0) or "0"

    lines = [f"min: {row(c)}"]
    for coefs, rhs in zip(A_ub, b_ub):
        lines.append(f"  {row(coefs)} <= {float(rhs):.6g}")
    for coefs, rhs in zip(A_eq, b_eq):
        lines.append(f"  {row(coefs)} = {float(rhs):.6g}")
    return "\n".join(lines) + "\n"
