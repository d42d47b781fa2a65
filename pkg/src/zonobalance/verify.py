"""Independent oracles and empirical probes: exhaustive sign search,
the polar-identity cross-check, and Monte-Carlo width estimates."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .coloring import BalanceReport
from .convex import Polyhedron, lp_solve
from .errors import InputError
from .lewis import LewisPosition
from .zonotope import VectorFamily, Zonotope, zonotope_norm

ORACLE_CAP = 22


@dataclass(frozen=True)
class OracleResult:
    best_signs: np.ndarray
    opt: float
    evaluations: int


def brute_force_min_discrepancy(Z: Zonotope, V: VectorFamily) -> OracleResult:
    """Exact minimum discrepancy over all sign vectors.

    Enumerates half the sign cube (x and -x give the same norm) and
    evaluates every signed sum with the norm LP.  Ties resolve to the
    lexicographically smallest sign vector, counting -1 < +1.
    """
    n = V.n
    if n > ORACLE_CAP:
        raise InputError(f"oracle capped at n <= {ORACLE_CAP}, got n = {n}")
    Vt = V.V.T
    best_val = math.inf
    minimizers_max: tuple[float, ...] | None = None
    evaluations = 0
    for rest in itertools.product((-1.0, 1.0), repeat=n - 1):
        x = np.array((1.0,) + rest)
        val = zonotope_norm(Z, Vt @ x).value
        evaluations += 1
        key = tuple(x)
        if val < best_val:
            best_val = val
            minimizers_max = key
        elif val == best_val and key > minimizers_max:
            minimizers_max = key
    # Every minimizer found starts with +1; its negation starts with -1 and
    # is therefore lexicographically smaller.  The smallest negation is the
    # negation of the largest minimizer.
    best = -np.array(minimizers_max)
    return OracleResult(best_signs=best.astype(int), opt=best_val,
                        evaluations=evaluations)


def _l1_section_max_lp(span_basis: np.ndarray, objective: np.ndarray) -> float:
    """max <objective, b> over b in the l1 ball intersected with a subspace.

    `span_basis` has orthonormal columns spanning the subspace; b = B z is
    lifted with split positives b = p - q, sum(p + q) <= 1.
    """
    m, r = span_basis.shape
    nv = r + 2 * m + 1  # z, p, q, slack
    E = np.zeros((m + 1, nv))
    E[:m, :r] = span_basis
    E[:m, r:r + m] = -np.eye(m)
    E[:m, r + m:r + 2 * m] = np.eye(m)
    E[m, r:r + 2 * m] = 1.0
    E[m, r + 2 * m] = 1.0
    e = np.zeros(m + 1)
    e[m] = 1.0
    lower = np.concatenate([np.full(r, -np.inf), np.zeros(2 * m + 1)])
    upper = np.full(nv, np.inf)
    c = np.zeros(nv)
    c[:r] = span_basis.T @ objective
    sol = lp_solve(c, Polyhedron(nv, E, e, lower, upper), sense="max")
    if not sol.is_optimal:
        raise InputError("l1-section LP unexpectedly " + sol.status)
    return sol.objective


def polar_identity_check(Z: Zonotope, V: VectorFamily, S, trials: int,
                         rng) -> float:
    """Largest gap between the two sides of the coordinate-body duality.

    For random y the gauge of sum_{i in S} y_i v_i must equal the maximum
    of <sum y_i u_i, b> over the l1 ball restricted to the generator
    column span, computed by an independent LP over that section.
    Requires cube preimages on the family.
    """
    if V.U is None:
        raise InputError(
            "polar identity check needs cube preimages; "
            "construct them with ensure_preimages() (one norm LP per vector)"
        )
    S = sorted(int(i) for i in S)
    if not S:
        raise InputError("index set must be nonempty")
    # Orthonormal basis of the column span of A, computed once.
    span_basis, _ = np.linalg.qr(Z.A)
    V_S = V.V[S]
    U_S = V.U[S]
    max_gap = 0.0
    for _ in range(trials):
        y = rng.standard_normal(len(S))
        lhs = zonotope_norm(Z, V_S.T @ y).value
        rhs = _l1_section_max_lp(span_basis, U_S.T @ y)
        max_gap = max(max_gap, abs(lhs - rhs))
    return max_gap


@dataclass(frozen=True)
class WidthEstimate:
    mean: float
    stderr: float
    samples: int
    d: int


def width_estimate(LP: LewisPosition, samples: int, rng) -> WidthEstimate:
    """Monte-Carlo Gaussian width of the normalized polar body.

    Each sample maximizes <g, x> subject to sum_i c_i |<x, u_i>| <= 1,
    linearized with split variables, and the mean over draws estimates
    the width.
    """
    if samples < 2:
        raise InputError("need at least two samples for a standard error")
    d, m = LP.d, LP.m
    rows = LP.U_dirs * LP.c[:, None]  # constraint sum |rows @ x| <= 1
    nv = d + 2 * m + 1
    E = np.zeros((m + 1, nv))
    E[:m, :d] = rows
    E[:m, d:d + m] = -np.eye(m)
    E[:m, d + m:d + 2 * m] = np.eye(m)
    E[m, d:d + 2 * m] = 1.0
    E[m, d + 2 * m] = 1.0
    e = np.zeros(m + 1)
    e[m] = 1.0
    lower = np.concatenate([np.full(d, -np.inf), np.zeros(2 * m + 1)])
    upper = np.full(nv, np.inf)
    P = Polyhedron(nv, E, e, lower, upper)
    vals = np.empty(samples)
    for i in range(samples):
        g = rng.standard_normal(d)
        c = np.zeros(nv)
        c[:d] = g
        sol = lp_solve(c, P, sense="max")
        if not sol.is_optimal:
            raise InputError("width LP unexpectedly " + sol.status)
        vals[i] = sol.objective
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(samples))
    return WidthEstimate(mean=mean, stderr=stderr, samples=samples, d=d)


CSV_COLUMNS = ("kind", "d", "m", "n", "seed", "c0", "discrepancy", "bound",
               "ratio", "rounds", "c_final", "opt")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(float(x))  # plain float repr even for numpy scalars
    return str(x)


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def csv_row(kind: str, report: BalanceReport, opt: float | None = None) -> str:
    """One benchmark row in the fixed column order."""
    cells = [kind, report.d, report.m, report.n, report.seed, report.c0,
             report.discrepancy, report.bound, report.ratio, report.rounds,
             report.c_final, "" if opt is None else opt]
    return ",".join(_fmt(c) for c in cells)


def bound_report(report: BalanceReport, oracle: OracleResult | None = None,
                 kind: str = "", fmt: str = "text") -> str:
    """Human- or machine-readable summary of a balancing run."""
    if fmt == "csv":
        return csv_header() + "\n" + csv_row(
            kind, report, None if oracle is None else oracle.opt)
    lines = [
        f"n: {report.n}",
        f"d: {report.d}",
        f"m: {report.m}",
        f"seed: {report.seed}",
        f"c0: {_fmt(report.c0)}",
        f"signs: {' '.join(str(int(s)) for s in report.signs)}",
        f"discrepancy: {_fmt(report.discrepancy)}",
        f"bound: {_fmt(report.bound)}",
        f"ratio: {_fmt(report.ratio)}",
        f"rounds: {report.rounds}",
        f"c_final: {_fmt(report.c_final)}",
    ]
    if oracle is not None:
        lines.append(f"opt: {_fmt(oracle.opt)}")
        if oracle.opt > 1e-12:
            lines.append(f"discrepancy/opt: {_fmt(report.discrepancy / oracle.opt)}")
        else:
            lines.append("discrepancy/opt: NA")
    return "\n".join(lines)
