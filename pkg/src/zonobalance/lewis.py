"""Lewis position of the polar body: weights, directions, and the
isotropy transform.

The l1 Lewis weights are the positive fixed point of
w_i = (a_i^T M(w)^{-1} a_i)^{1/2} with M(w) = A^T diag(w)^{-1} A.  The
plain fixed-point iteration contracts for this exponent, so no
safeguarding is needed beyond an iteration cap.  From converged weights
the transform T = M(w)^{1/2} yields unit directions u_i = T^{-1}a_i /
|T^{-1}a_i| and weights c_i = |T^{-1}a_i| = w_i satisfying
sum_i c_i u_i u_i^T = I.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex import psd_sqrt
from .errors import NumericalError
from .zonotope import Zonotope

TOL_LEWIS = 1e-8
MAX_ITER_LEWIS = 200


@dataclass(frozen=True)
class LewisPosition:
    w: np.ndarray       # Lewis weights, length m
    T: np.ndarray       # d x d symmetric positive definite transform
    c: np.ndarray       # weights of the isotropy identity (= w at the fixed point)
    U_dirs: np.ndarray  # m x d, unit rows
    residual: float     # Frobenius norm of sum_i c_i u_i u_i^T - I
    iterations: int

    @property
    def d(self) -> int:
        return self.T.shape[0]

    @property
    def m(self) -> int:
        return self.w.shape[0]


def _weight_map(A: np.ndarray, w: np.ndarray) -> np.ndarray:
    """One fixed-point step: w -> (a_i^T M(w)^{-1} a_i)^{1/2}."""
    M = A.T @ (A / w[:, None])
    try:
        X = np.linalg.solve(M, A.T)
    except np.linalg.LinAlgError:
        raise NumericalError("weighted Gram matrix is numerically singular")
    q = np.einsum("ij,ji->i", A, X)
    if np.any(q <= 0.0):
        raise NumericalError("nonpositive leverage value; matrix is degenerate")
    return np.sqrt(q)


def _dagger_residual(A: np.ndarray, w: np.ndarray) -> float:
    """Frobenius distance of the candidate Lewis decomposition from isotropy."""
    M = A.T @ (A / w[:, None])
    T = psd_sqrt(M)
    X = np.linalg.solve(T, A.T)        # columns T^{-1} a_i
    norms = np.linalg.norm(X, axis=0)
    S = (X * (1.0 / norms)) @ X.T      # sum_i c_i u_i u_i^T with c_i = |T^{-1}a_i|
    return float(np.linalg.norm(S - np.eye(A.shape[1])))


def lewis_weights_history(A, tol_lewis: float = TOL_LEWIS,
                          max_iter: int = MAX_ITER_LEWIS):
    """Run the fixed-point iteration, returning (w, residual_history, iters).

    residual_history[t] is the max relative change of the weights at
    iteration t.  Convergence requires both a small relative change and
    an isotropy residual below tol_lewis.
    """
    A = np.asarray(A, dtype=float)
    m, d = A.shape
    w = np.full(m, d / m)
    history: list[float] = []
    for it in range(1, max_iter + 1):
        w_new = _weight_map(A, w)
        rel = float(np.max(np.abs(w_new - w) / w))
        history.append(rel)
        w = w_new
        if rel <= tol_lewis * 1e-2 and _dagger_residual(A, w) <= tol_lewis:
            return w, history, it
    raise NumericalError(
        "Lewis weight iteration did not converge",
        residual=history[-1] if history else None,
    )


def lewis_weights(A, tol_lewis: float = TOL_LEWIS,
                  max_iter: int = MAX_ITER_LEWIS) -> np.ndarray:
    """l1 Lewis weights of the generator matrix A (one row per generator)."""
    w, _, _ = lewis_weights_history(A, tol_lewis, max_iter)
    return w


def lewis_transform(A, w, iterations: int = 0) -> LewisPosition:
    """Assemble the Lewis position from converged weights."""
    A = np.asarray(A, dtype=float)
    w = np.asarray(w, dtype=float)
    M = A.T @ (A / w[:, None])
    T = psd_sqrt(M)
    X = np.linalg.solve(T, A.T)  # columns are T^{-1} a_i
    c = np.linalg.norm(X, axis=0)
    if np.any(c <= 0.0):
        raise NumericalError("zero direction in the Lewis decomposition")
    U_dirs = (X / c).T
    S = (X * (1.0 / c)) @ X.T
    residual = float(np.linalg.norm(S - np.eye(A.shape[1])))
    return LewisPosition(w=w, T=T, c=c, U_dirs=U_dirs,
                         residual=residual, iterations=iterations)


def lewis_position(Z: Zonotope | np.ndarray, tol_lewis: float = TOL_LEWIS,
                   max_iter: int = MAX_ITER_LEWIS) -> LewisPosition:
    """Weights plus transform in one call."""
    A = Z.A if isinstance(Z, Zonotope) else np.asarray(Z, dtype=float)
    w, _, iters = lewis_weights_history(A, tol_lewis, max_iter)
    return lewis_transform(A, w, iterations=iters)


def k1_norm(LP: LewisPosition, x) -> float:
    """Gauge of the normalized polar body: sum_i c_i |<x, u_i>|."""
    x = np.asarray(x, dtype=float)
    return float(np.dot(LP.c, np.abs(LP.U_dirs @ x)))


@dataclass(frozen=True)
class InclusionReport:
    samples: int
    max_violation: float
    worst_direction: np.ndarray | None
    passed: bool


def check_inclusions(LP: LewisPosition, samples: int, rng,
                     tol: float = 1e-6) -> InclusionReport:
    """Sampled check of the ball sandwich around the normalized polar body.

    For unit directions x the gauge must satisfy
    ||x||_2 <= gauge(x) <= sqrt(d) ||x||_2.  Returns the largest violation
    seen; the report fails beyond `tol` and records the offending
    direction.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = LP.d
    sqrt_d = np.sqrt(d)
    worst = 0.0
    worst_dir = None
    for _ in range(samples):
        x = rng.standard_normal(d)
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            continue
        x /= nrm
        val = k1_norm(LP, x)
        violation = max(1.0 - val, val - sqrt_d)
        if violation > worst:
            worst = violation
            worst_dir = x.copy()
    return InclusionReport(samples=samples, max_violation=worst,
                           worst_direction=worst_dir, passed=worst <= tol)
