"""Small dense symmetric linear algebra: Kronecker expansion by the identity,
a cyclic-Jacobi symmetric eigensolver, and positive-definiteness tests.

The certificate matrices have the structure ``M (x) I_n``; their spectra equal
the spectrum of the small factor with each eigenvalue repeated ``n`` times, so
all eigenvalue work happens on the small blocks.  The expansion exists mainly
so that this identity can be tested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Sweep-level convergence: all off-diagonal magnitudes must drop below this
# factor times the largest diagonal magnitude.
JACOBI_CONV_FACTOR = 1e-14
JACOBI_MAX_SWEEPS = 100


class JacobiConvergenceError(RuntimeError):
    """Raised when the rotation sweeps exhaust their budget before converging."""

    def __init__(self, sweeps: int, off_residual: float):
        self.sweeps = sweeps
        self.off_residual = off_residual
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal residual {off_residual:.3e})"
        )


@dataclass(frozen=True)
class SymMatrix:
    """A real symmetric matrix; symmetry is exact after construction."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("matrix order must be >= 1")
        if not np.array_equal(a, a.T):
            raise ValueError(
                "entries are not exactly symmetric; use SymMatrix.from_array "
                "to symmetrize nearly-symmetric input"
            )
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def from_array(cls, arr, rel_tol: float = 1e-8) -> "SymMatrix":
        """Build from a nearly-symmetric array, rejecting gross asymmetry."""
        a = np.asarray(arr, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.abs(a).max(initial=0.0)))
        if float(np.abs(a - a.T).max(initial=0.0)) > rel_tol * scale:
            raise ValueError("matrix is not symmetric within tolerance")
        return cls((a + a.T) / 2.0)

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenSummary:
    """Sorted spectrum of a symmetric matrix with its extreme eigenvalues."""

    lambda_min: float
    lambda_max: float
    spectrum: tuple[float, ...]


def kron_with_identity(base: SymMatrix, n: int) -> SymMatrix:
    """Return ``base (x) I_n``, order ``base.order * n``."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"identity factor must be a positive integer, got {n!r}")
    return SymMatrix(np.kron(base.entries, np.eye(int(n))))


def jacobi_eigh(matrix, *, max_sweeps: int = JACOBI_MAX_SWEEPS,
                conv_factor: float = JACOBI_CONV_FACTOR):
    """Cyclic-Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(values, vectors)`` with eigenvalues ascending and eigenvectors
    as matching columns.  Fails loudly on non-convergence.
    """
    a = matrix.entries if isinstance(matrix, SymMatrix) else np.asarray(matrix, dtype=float)
    a = a.astype(float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    iu = np.triu_indices(n, 1)

    converged = False
    off = 0.0
    for _ in range(max_sweeps):
        off = float(np.abs(a[iu]).max()) if n > 1 else 0.0
        diag_scale = float(np.abs(np.diagonal(a)).max())
        if off <= conv_factor * diag_scale:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e154:
                    # avoid overflow in theta**2 for extreme ratios
                    t = 1.0 / (2.0 * theta)
                else:
                    t = np.sign(theta) if theta != 0.0 else 1.0
                    t /= abs(theta) + np.sqrt(theta * theta + 1.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    if not converged:
        raise JacobiConvergenceError(max_sweeps, off)

    values = np.diagonal(a).copy()
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


def eig_sym(mat: SymMatrix, *, max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigenSummary:
    """Spectrum of a symmetric matrix via the Jacobi solver."""
    values, _ = jacobi_eigh(mat, max_sweeps=max_sweeps)
    spectrum = tuple(float(x) for x in values)
    return EigenSummary(lambda_min=spectrum[0], lambda_max=spectrum[-1], spectrum=spectrum)


def is_positive_definite(mat: SymMatrix, tol: float | None = None) -> bool:
    """True iff the smallest eigenvalue exceeds ``tol``.

    ``tol=None`` uses ``1e-12 * |lambda_max|`` to absorb rounding.
    """
    summary = eig_sym(mat)
    if tol is None:
        tol = 1e-12 * abs(summary.lambda_max)
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    return summary.lambda_min > tol
