"""Zonotope data model and its norm, polar-norm, and membership oracles.

A zonotope is stored through its generator matrix A (one generator per
row); the body is the set of all combinations sum_i u_i a_i with
|u_i| <= 1.  Its gauge ||x|| is the smallest t such that x lies in the
t-scaled body, computed by a single LP; the polar gauge is the plain
l1 expression ||A y||_1 and needs no LP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .convex import TOL_FEAS, Polyhedron, lp_solve
from .errors import InputError, MembershipError, SpanError

TOL_SPAN = 1e-8


class Zonotope:
    """Immutable zonotope A^T [-1,1]^m; rows of A are the generators."""

    def __init__(self, A):
        A = np.array(A, dtype=float)
        if A.ndim != 2:
            raise InputError("generator matrix must be two-dimensional")
        m, d = A.shape
        if d < 1 or m < d:
            raise InputError(f"need m >= d >= 1 generators, got m={m}, d={d}")
        if not np.all(np.isfinite(A)):
            raise InputError("generator matrix contains NaN or infinity")
        row_zero = ~np.any(A != 0.0, axis=1)
        if np.any(row_zero):
            raise InputError(
                f"generator row {int(np.flatnonzero(row_zero)[0])} is zero; "
                "run preprocess() first"
            )
        if np.linalg.matrix_rank(A) < d:
            raise InputError("generator matrix is rank deficient; run preprocess() first")
        A.setflags(write=False)
        self.A = A

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    def __repr__(self) -> str:
        return f"Zonotope(m={self.m}, d={self.d})"


class VectorFamily:
    """Vectors to balance, stacked as rows of V; optional cube preimages U
    with v_i = A^T u_i."""

    def __init__(self, V, U=None):
        V = np.array(V, dtype=float)
        if V.ndim != 2 or V.shape[0] < 1:
            raise InputError("V must be a nonempty matrix with one vector per row")
        if not np.all(np.isfinite(V)):
            raise InputError("V contains NaN or infinity")
        V.setflags(write=False)
        self.V = V
        if U is not None:
            U = np.array(U, dtype=float)
            if U.shape[0] != V.shape[0]:
                raise InputError("U must have one preimage row per vector")
            if not np.all(np.isfinite(U)):
                raise InputError("U contains NaN or infinity")
            U.setflags(write=False)
        self.U = U

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def d(self) -> int:
        return self.V.shape[1]

    def restrict(self, indices) -> "VectorFamily":
        idx = np.asarray(indices, dtype=int)
        return VectorFamily(self.V[idx], None if self.U is None else self.U[idx])

    def __repr__(self) -> str:
        return f"VectorFamily(n={self.n}, d={self.d}, preimages={self.U is not None})"


class NormResult(NamedTuple):
    value: float
    preimage: np.ndarray  # u with A^T u = x and max|u_i| = value


def zonotope_norm(Z: Zonotope, x) -> NormResult:
    """Gauge of x in Z: the least t with x in tZ, plus a minimizing preimage.

    Solved as max lambda subject to A^T u = lambda x, |u_i| <= 1; the
    norm is 1/lambda and u/lambda attains it.  This keeps the LP at d
    equality rows regardless of the generator count.
    """
    x = np.asarray(x, dtype=float)
    m, d = Z.m, Z.d
    if x.shape != (d,):
        raise InputError(f"x must have dimension {d}")
    nonzero = np.flatnonzero(x)
    if nonzero.size == 0:
        return NormResult(0.0, np.zeros(m))
    # Canonicalize the sign so that x and -x solve the identical LP and
    # the gauge is exactly symmetric.
    flip = x[nonzero[0]] < 0.0
    if flip:
        x = -x
    E = np.hstack([Z.A.T, -x[:, None]])
    P = Polyhedron(
        m + 1, E, np.zeros(d),
        np.concatenate([-np.ones(m), [0.0]]),
        np.concatenate([np.ones(m), [np.inf]]),
    )
    c = np.zeros(m + 1)
    c[m] = 1.0
    sol = lp_solve(c, P, sense="max")
    if sol.status != "optimal" or sol.objective <= 1e-14:
        raise SpanError("x does not lie in the span of the generators")
    lam = sol.objective
    u = sol.point[:m] / lam
    return NormResult(1.0 / lam, -u if flip else u)


def polar_norm(Z: Zonotope, y) -> float:
    """Gauge of the polar body: sum_i |<a_i, y>|, evaluated directly."""
    y = np.asarray(y, dtype=float)
    if y.shape != (Z.d,):
        raise InputError(f"y must have dimension {Z.d}")
    return float(np.abs(Z.A @ y).sum())


def membership(Z: Zonotope, x, t: float) -> bool:
    """True iff x lies in tZ, up to the feasibility tolerance."""
    if t < 0:
        raise InputError("scale t must be nonnegative")
    return zonotope_norm(Z, x).value <= t + TOL_FEAS


@dataclass(frozen=True)
class BasisChange:
    """Record of the preprocessing basis change and dropped generators.

    Reduced coordinates relate to the originals by x_orig = Q x_red.
    """

    Q: np.ndarray  # (original_d, reduced_d), orthonormal columns
    dropped_generators: tuple[int, ...]
    original_d: int

    @property
    def reduced_d(self) -> int:
        return self.Q.shape[1]

    def to_original(self, x_red) -> np.ndarray:
        return self.Q @ np.asarray(x_red, dtype=float)

    def to_reduced(self, x_orig) -> np.ndarray:
        return self.Q.T @ np.asarray(x_orig, dtype=float)


def preprocess(A_raw, V_raw, U_raw=None, *, rescale: bool = False,
               tol_feas: float = TOL_FEAS):
    """Normalize a raw instance into a valid (Zonotope, VectorFamily) pair.

    Drops zero generator rows, reduces to the span of the generators when
    A is rank deficient, and certifies that every vector lies in the
    zonotope (via stored preimages when available, else by the norm LP).
    Vectors outside the span are rejected; vectors outside the body are
    rejected unless `rescale` pulls them back to the boundary.

    Returns (Zonotope, VectorFamily, BasisChange).
    """
    A = np.array(A_raw, dtype=float)
    V = np.array(V_raw, dtype=float)
    if A.ndim != 2 or V.ndim != 2:
        raise InputError("A and V must be matrices")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(V))):
        raise InputError("instance contains NaN or infinity")
    if V.shape[1] != A.shape[1]:
        raise InputError("A and V must share the ambient dimension")
    if V.shape[0] < 1:
        raise InputError("need at least one vector")
    U = None
    if U_raw is not None:
        U = np.array(U_raw, dtype=float)
        if U.shape != (V.shape[0], A.shape[0]):
            raise InputError("U must be n x m")

    keep = np.any(A != 0.0, axis=1)
    dropped = tuple(int(i) for i in np.flatnonzero(~keep))
    A = A[keep]
    if U is not None:
        U = U[:, keep]
    if A.shape[0] == 0:
        raise InputError("all generators are zero")

    d0 = A.shape[1]
    _, svals, vt = np.linalg.svd(A, full_matrices=False)
    rank_tol = max(A.shape) * np.finfo(float).eps * (svals[0] if svals.size else 0.0)
    r = int(np.sum(svals > rank_tol))
    if r < d0:
        Q = vt[:r].T  # orthonormal basis of the generator span
        for i in range(V.shape[0]):
            resid = np.linalg.norm(V[i] - Q @ (Q.T @ V[i]))
            if resid > TOL_SPAN * (1.0 + np.linalg.norm(V[i])):
                raise SpanError(
                    f"vector {i} lies outside the span of the generators "
                    f"(residual {resid:.3e})"
                )
        A = A @ Q
        V = V @ Q
    else:
        Q = np.eye(d0)

    if V.shape[0] > r:
        raise InputError(
            f"more vectors ({V.shape[0]}) than the zonotope dimension ({r}); "
            "the n > d case is out of scope"
        )

    Z = Zonotope(A)
    V = V.copy()
    if U is not None:
        U = U.copy()
    for i in range(V.shape[0]):
        if U is not None:
            certified = (
                np.max(np.abs(U[i]), initial=0.0) <= 1.0 + tol_feas
                and np.linalg.norm(Z.A.T @ U[i] - V[i]) <= 1e-8
            )
            if certified:
                continue
        value, pre = zonotope_norm(Z, V[i])
        if value <= 1.0 + tol_feas:
            if U is not None:
                U[i] = pre
            continue
        if rescale:
            V[i] /= value
            if U is not None:
                U[i] = pre / value
            continue
        raise MembershipError(i, value)

    return Z, VectorFamily(V, U), BasisChange(Q, dropped, d0)


def ensure_preimages(Z: Zonotope, V: VectorFamily) -> VectorFamily:
    """Return a family carrying cube preimages, solving norm LPs as needed."""
    if V.U is not None:
        return V
    U = np.empty((V.n, Z.m))
    for i in range(V.n):
        U[i] = zonotope_norm(Z, V.V[i]).preimage
    return VectorFamily(V.V, U)
