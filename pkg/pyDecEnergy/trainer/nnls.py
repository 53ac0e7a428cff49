import numpy as np
import numpy.typing as npt

from scipy.linalg import lstsq
from scipy.optimize import lsq_linear
from typing import NamedTuple


class NNLSResult(NamedTuple):
    x: npt.NDArray[np.float64]
    converged: bool
    iterations: int
    kkt_residual: float
    rnorm: float


def kkt_residual(A: npt.NDArray[np.float64], b: npt.NDArray[np.float64], x: npt.NDArray[np.float64]) -> float:
    """Largest violation of the optimality conditions of min ||Ax - b|| s.t. x >= 0.

    With w = A^T (b - Ax), free variables (x > 0) need w = 0 and variables at the
    bound need w <= 0. The violation is relative to ||b||.

    :returns: max(|w_j| for x_j > 0, max(w_j, 0) for x_j = 0) / ||b||
    """

    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0 or x.size == 0:
        return 0.0

    w = A.T @ (b - A @ x)
    free = x > 0
    viol = np.concatenate([np.abs(w[free]), np.maximum(w[~free], 0.0)])
    return float(viol.max()) / bnorm


def _solve_passive(A: npt.NDArray[np.float64], b: npt.NDArray[np.float64],
                   passive: npt.NDArray[np.bool_]) -> npt.NDArray[np.float64]:
    z = np.zeros(A.shape[1], dtype=np.float64)
    if passive.any():
        z[passive] = lstsq(A[:, passive], b, check_finite=False)[0]
    return z


def active_set_nnls(A: npt.NDArray[np.float64],
                    b: npt.NDArray[np.float64],
                    max_iterations: int,
                    tol: float,
                    seed: int = 0) -> NNLSResult:
    """Solve argmin ||Ax - b|| subject to x >= 0 with the Lawson-Hanson active-set method.

    Least-squares subproblems are solved with scipy.linalg.lstsq. A variable enters
    the passive set when its gradient component exceeds tol * ||b||; among variables
    sharing the largest gradient one is drawn at random from seed. Variables outside
    the passive set are exactly zero.

    :param A: (m, n) matrix; columns should be scaled to comparable norms
    :param b: (m, ) right-hand side
    :param max_iterations: Cap on outer plus inner iterations
    :param tol: Relative optimality tolerance
    :param seed: Seed of the tie-breaking draws

    :returns: NNLSResult; on reaching the cap, the current (feasible) iterate with converged=False
    """

    A = np.asarray_chkfinite(A, dtype=np.float64)
    b = np.asarray_chkfinite(b, dtype=np.float64)

    if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.size:
        raise ValueError(f'Incompatible shapes: A {A.shape}, b {b.shape}')

    nvar = A.shape[1]
    x = np.zeros(nvar, dtype=np.float64)
    passive = np.zeros(nvar, dtype=bool)
    blocked = np.zeros(nvar, dtype=bool)

    enter_tol = tol * float(np.linalg.norm(b))
    iterations = 0
    converged = False

    rng = np.random.default_rng(seed)
    w = A.T @ b

    while True:
        candidates = ~passive & ~blocked & (w > enter_tol)
        if not candidates.any():
            converged = True
            break
        if iterations >= max_iterations:
            break
        iterations += 1

        wc = np.where(candidates, w, -np.inf)
        tied = np.flatnonzero(wc == wc.max())
        kk = int(tied[0]) if tied.size == 1 else int(rng.choice(tied))
        passive[kk] = True
        z = _solve_passive(A, b, passive)

        if z[kk] <= 0.0:
            # Rounding made the entering variable nonpositive
            passive[kk] = False
            blocked[kk] = True
            continue

        while (z[passive] <= 0.0).any():
            if iterations >= max_iterations:
                break
            iterations += 1

            neg = np.flatnonzero(passive & (z <= 0.0))
            ratios = x[neg] / (x[neg] - z[neg])
            jj = int(np.argmin(ratios))
            x = x + ratios[jj] * (z - x)
            x[neg[jj]] = 0.0

            passive &= x > 0.0
            x[~passive] = 0.0
            z = _solve_passive(A, b, passive)
        else:
            x = z
            x[~passive] = 0.0
            blocked[:] = False
            w = A.T @ (b - A @ x)
            continue

        # Iteration cap reached inside the inner loop; keep the last feasible iterate
        break

    return NNLSResult(x=x, converged=converged, iterations=iterations,
                      kkt_residual=kkt_residual(A, b, x),
                      rnorm=float(np.linalg.norm(A @ x - b)))


def trf_nnls(A: npt.NDArray[np.float64],
             b: npt.NDArray[np.float64],
             max_iterations: int,
             tol: float,
             seed: int = 0) -> NNLSResult:
    """Solve argmin ||Ax - b|| subject to x >= 0 with scipy's trust-region-reflective lsq_linear.

    The method is deterministic; seed is accepted for a common solver signature.
    """

    res = lsq_linear(A, b, bounds=(0.0, np.inf), method='trf', tol=tol,
                     lsq_solver='exact', max_iter=max_iterations)
    x = np.maximum(res.x, 0.0)

    return NNLSResult(x=x, converged=res.status > 0, iterations=int(res.nit),
                      kkt_residual=kkt_residual(A, b, x),
                      rnorm=float(np.linalg.norm(A @ x - b)))
