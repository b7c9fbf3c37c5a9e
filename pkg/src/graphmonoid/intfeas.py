"""Small integer feasibility problems over finitely generated abelian groups.

The question is always: can ``target`` be written as ``sum n_i c_i`` with
integers ``n_i >= lower_i``, inside a group ``Z^f + Z_{d_1} + ...``?

The answer is one of three outcomes. *feasible* comes with a verified
witness. *infeasible* is only reported when it is proven: either the
equations have no integer solution at all, or the real relaxation is empty,
or the relaxation is bounded inside the search box and the box holds no
integer point. Anything else is *inconclusive*.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import LinearConstraint, linprog, milp, Bounds

from .fgab import FGAbelianGroup, IntMatrix, solve_integer

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Feasibility:
    status: str
    solution: tuple[int, ...] | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == FEASIBLE


def default_bound(target: Sequence[int]) -> int:
    return max(64, 4 * sum(abs(int(t)) for t in target))


def nat_span_member(group: FGAbelianGroup, vectors: Sequence[Sequence[int]], target: Sequence[int],
                    lower: Sequence[int] | None = None, bound: int | None = None) -> Feasibility:
    """Decide ``target = sum n_i vectors_i`` with ``lower_i <= n_i``."""
    k = len(vectors)
    lower = [0] * k if lower is None else [int(x) for x in lower]
    if bound is None:
        bound = default_bound(target)
    f, tors = group.rank, group.torsion
    t = len(tors)
    dim = group.dim
    rows = []
    for r in range(dim):
        row = [int(v[r]) for v in vectors]
        slack = [0] * t
        if r >= f:
            slack[r - f] = -tors[r - f]
        rows.append(row + slack)
    A = IntMatrix.from_rows(rows, k + t)
    b = [int(x) for x in target]

    if solve_integer(A, b) is None:
        return Feasibility(INFEASIBLE, reason="no integer solution of the linear system")
    if k == 0:
        return Feasibility(FEASIBLE, ())
    if any(lo > bound for lo in lower):
        return Feasibility(INCONCLUSIVE, reason="lower bound exceeds search bound")

    Af = np.array(rows, dtype=float).reshape(dim, k + t)
    bf = np.array(b, dtype=float)
    c = np.concatenate([np.ones(k), np.zeros(t)])
    lo = np.array(lower + [-np.inf] * t, dtype=float)
    hi = np.array([bound] * k + [np.inf] * t, dtype=float)
    cons = [LinearConstraint(Af, bf, bf)] if dim else []
    res = milp(c, constraints=cons, integrality=np.ones(k + t), bounds=Bounds(lo, hi))
    if res.status == 0 and res.x is not None:
        x = [int(round(v)) for v in res.x]
        if A.apply(x) == tuple(b) and all(lower[i] <= x[i] <= bound for i in range(k)):
            return Feasibility(FEASIBLE, tuple(x[:k]))
        return Feasibility(INCONCLUSIVE, reason="solver witness failed exact check")

    # No integer point inside the box. Decide whether that settles it.
    free_bounds = [(lower[i], None) for i in range(k)] + [(None, None)] * t
    kw = dict(A_eq=Af, b_eq=bf) if dim else {}
    lp = linprog(np.zeros(k + t), bounds=free_bounds, method="highs", **kw)
    if lp.status == 2:
        return Feasibility(INFEASIBLE, reason="real relaxation is empty")
    for i in range(k):
        obj = np.zeros(k + t)
        obj[i] = -1.0
        lp = linprog(obj, bounds=free_bounds, method="highs", **kw)
        if lp.status != 0 or -lp.fun > bound + 1e-7:
            return Feasibility(INCONCLUSIVE, reason=f"no solution with coefficients <= {bound}")
    return Feasibility(INFEASIBLE, reason="relaxation bounded inside the search box")
