"""Principal eigenpairs of the weighted pencil ``A u = lam B u``.

``B = diag(rho * cell_measure)``. Working with ``mu = 1 / lam`` turns the
problem into ``B u = mu A u``; after the Cholesky factorization
``A = L L^T`` this is the symmetric eigenproblem for
``M = L^-1 B L^-T``, whose largest eigenvalue is ``mu_1``.
Eigenfunctions are normalized so that ``u^T A u = 1`` and ``sum(u) > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .nonlocal_form import StiffnessOperator

__all__ = [
    "ConvergenceError",
    "InconsistentSpectrumError",
    "NotDifferentiableError",
    "EigenResult",
    "DenseSpectrum",
    "solve_mu1",
    "solve_lambda_neg1",
    "mu1_tilde",
    "dense_spectrum",
    "gateaux_differential",
    "rayleigh_quotient",
]

DENSE_CAP = 512


class ConvergenceError(RuntimeError):
    def __init__(self, message, best_residual=np.inf):
        super().__init__(message)
        self.best_residual = best_residual


class InconsistentSpectrumError(RuntimeError):
    """Positive weight part present but no positive pencil eigenvalue found."""


class NotDifferentiableError(ValueError):
    pass


@dataclass(frozen=True)
class EigenResult:
    """Outcome of a principal-eigenvalue solve.

    ``mu`` is the extended eigenvalue (0 when the branch is empty) and
    ``eigenvalue`` its reciprocal, or None. For the positive branch these are
    ``mu_1~`` and ``lambda_1``; for the negative branch ``mu = -mu_1~(-rho)``
    and ``eigenvalue = lambda_-1``. The eigenfunction is always the positive
    one of the underlying positive problem.
    """

    mu: float
    eigenvalue: float | None
    eigenfunction: np.ndarray
    residual: float
    iterations: int
    branch: int = 1

    @property
    def mu1_tilde(self) -> float:
        return abs(self.mu)

    @property
    def lambda1(self) -> float | None:
        return self.eigenvalue if self.branch == 1 else None


def _weights(op: StiffnessOperator, rho) -> np.ndarray:
    return op.grid.check(rho) * op.grid.cell_measure


def _zero(op: StiffnessOperator, branch: int = 1) -> EigenResult:
    return EigenResult(0.0, None, np.zeros(op.n), 0.0, 0, branch)


def _residual(op: StiffnessOperator, b: np.ndarray, mu: float, u: np.ndarray) -> float:
    bu = b * u
    scale = np.max(np.abs(bu))
    r = np.max(np.abs(bu - mu * (op.matrix @ u)))
    return float(r / scale) if scale > 0 else float(r)


def solve_mu1(
    op: StiffnessOperator, rho, tol: float = 1e-10, max_iter: int = 10_000
) -> EigenResult:
    """Largest eigenvalue ``mu_1`` of ``B u = mu A u`` and its positive eigenvector.

    Returns the zero result when ``rho <= 0`` everywhere. Raises
    :class:`ConvergenceError` when the residual bound
    ``|B u - mu A u|_inf <= tol |B u|_inf`` cannot be met.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    b = _weights(op, rho)
    if not np.any(b > 0):
        return _zero(op)
    n = op.n
    L = op.cholesky
    count = [0]

    def matvec(y):
        count[0] += 1
        x = linalg.solve_triangular(L, np.ravel(y), lower=True, trans="T")
        return linalg.solve_triangular(L, b * x, lower=True)

    if n <= 2:
        # Lanczos needs n > k + 1; the reduced matrix is tiny here
        Linv = linalg.solve_triangular(L, np.eye(n), lower=True)
        M = Linv @ (b[:, None] * Linv.T)
        vals, vecs = linalg.eigh(M)
        mu, y = float(vals[-1]), vecs[:, -1]
        count[0] = 1
    else:
        Mop = LinearOperator((n, n), matvec=matvec, dtype=float)
        # start from L^T 1: the positive vector in the reduced coordinates
        v0 = L.T @ np.ones(n)
        try:
            vals, vecs = eigsh(
                Mop,
                k=1,
                which="LA",
                v0=v0,
                tol=0.0,
                maxiter=max_iter,
                ncv=min(n, 40),
            )
        except ArpackNoConvergence as exc:
            best = np.inf
            if len(exc.eigenvalues):
                y = exc.eigenvectors[:, -1]
                u = linalg.solve_triangular(L, y, lower=True, trans="T")
                best = _residual(op, b, float(exc.eigenvalues[-1]), u)
            raise ConvergenceError(
                f"principal eigenpair not converged in {max_iter} iterations", best
            ) from None
        mu, y = float(vals[-1]), vecs[:, -1]

    if mu <= 0.0:
        raise InconsistentSpectrumError(
            f"weight has a positive part but the largest pencil eigenvalue is {mu:g}"
        )
    u = linalg.solve_triangular(L, y / np.linalg.norm(y), lower=True, trans="T")
    if u.sum() < 0:
        u = -u
    res = _residual(op, b, mu, u)
    if res > tol:
        raise ConvergenceError(f"residual {res:.3e} exceeds tolerance {tol:.1e}", res)
    return EigenResult(mu, 1.0 / mu, u, res, count[0])


def mu1_tilde(op: StiffnessOperator, rho, tol: float = 1e-10) -> float:
    return solve_mu1(op, rho, tol).mu


def solve_lambda_neg1(
    op: StiffnessOperator, rho, tol: float = 1e-10, max_iter: int = 10_000
) -> EigenResult:
    """First negative eigenvalue ``lambda_-1(rho) = -lambda_1(-rho)``."""
    pos = solve_mu1(op, -op.grid.check(rho), tol, max_iter)
    if pos.eigenvalue is None:
        return _zero(op, branch=-1)
    return EigenResult(
        -pos.mu, -pos.eigenvalue, pos.eigenfunction, pos.residual, pos.iterations, -1
    )


@dataclass(frozen=True)
class DenseSpectrum:
    """All pencil eigenvalues ``mu`` from a dense generalized solve.

    ``positive`` is decreasing (mu_1 >= mu_2 >= ...), ``negative`` increasing
    (mu_-1 <= mu_-2 <= ...); vectors are columns normalized by ``v^T A v = 1``
    and oriented with positive sum.
    """

    positive: np.ndarray
    positive_vectors: np.ndarray
    negative: np.ndarray
    negative_vectors: np.ndarray
    n_zero: int

    @property
    def gap(self) -> float:
        """``mu_1 - mu_2`` (inf when fewer than two positive eigenvalues)."""
        if len(self.positive) < 2:
            return np.inf
        return float(self.positive[0] - self.positive[1])

    def pairs(self) -> list:
        return [(float(m), v) for m, v in zip(self.positive, self.positive_vectors.T)] + [
            (float(m), v) for m, v in zip(self.negative, self.negative_vectors.T)
        ]


def dense_spectrum(op: StiffnessOperator, rho, k: int | None = None) -> DenseSpectrum:
    """Dense reference solve of ``B v = mu A v`` (LAPACK generalized driver)."""
    if op.n > DENSE_CAP:
        raise ValueError(f"dense spectrum limited to {DENSE_CAP} cells, got {op.n}")
    b = _weights(op, rho)
    vals, vecs = linalg.eigh(np.diag(b), op.matrix)
    signs = np.where(vecs.sum(axis=0) < 0, -1.0, 1.0)
    vecs = vecs * signs
    zero_tol = 1e-13 * max(np.max(np.abs(vals)), 1e-300)
    pos = np.flatnonzero(vals > zero_tol)[::-1]
    neg = np.flatnonzero(vals < -zero_tol)
    n_zero = len(vals) - len(pos) - len(neg)
    if k is not None:
        pos, neg = pos[:k], neg[:k]
    return DenseSpectrum(vals[pos], vecs[:, pos], vals[neg], vecs[:, neg], n_zero)


def gateaux_differential(op: StiffnessOperator, rho, v, tol: float = 1e-10) -> float:
    """Directional derivative of ``mu_1~`` at ``rho``: ``sum(u_rho^2 v) * cell_measure``."""
    v = op.grid.check(v)
    res = solve_mu1(op, rho, tol)
    if res.mu <= 0:
        raise NotDifferentiableError("mu_1~(rho) = 0: differentiability only holds where it is positive")
    return float(np.dot(res.eigenfunction**2, v)) * op.grid.cell_measure


def rayleigh_quotient(op: StiffnessOperator, rho, w) -> float:
    """``norm_sq(w) / sum(rho w^2) m``; inf when the denominator is not positive."""
    w = op.grid.check(w)
    den = float(np.dot(_weights(op, rho), w * w))
    return op.norm_sq(w) / den if den > 0 else np.inf
