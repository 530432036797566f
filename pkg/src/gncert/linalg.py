"""Dense real linear algebra in the spectral norm.

Everything here works on small dense ``numpy`` arrays. The operator norm is the
2-norm throughout, so ``||A^+|| = 1 / sigma_min(A)`` for full column rank ``A``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import RankDeficient

EPS = np.finfo(float).eps


def as_matrix(A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def singular_values(A):
    """Singular values of ``A`` in descending order."""
    return scipy.linalg.svdvals(as_matrix(A))


def spectral_norm(A):
    """Largest singular value of ``A`` (0 for the zero matrix)."""
    return float(singular_values(A)[0])


def min_singular_value(A):
    """Smallest singular value of a tall (m >= n) matrix."""
    A = as_matrix(A)
    m, n = A.shape
    if m < n:
        raise ValueError(f"min_singular_value needs m >= n, got {m}x{n}")
    return float(singular_values(A)[-1])


def rank_tolerance(A, sigma_max=None):
    """Numerical rank threshold ``max(m, n) * eps * sigma_max``."""
    A = as_matrix(A)
    if sigma_max is None:
        sigma_max = spectral_norm(A)
    return max(A.shape) * EPS * sigma_max


def has_full_column_rank(A):
    A = as_matrix(A)
    if A.shape[0] < A.shape[1]:
        return False
    s = singular_values(A)
    return bool(s[-1] > rank_tolerance(A, s[0]))


def _check_full_column_rank(A):
    m, n = A.shape
    if m < n:
        raise ValueError(f"need m >= n, got {m}x{n}")
    s = singular_values(A)
    if not s[-1] > rank_tolerance(A, s[0]):
        raise RankDeficient(
            f"matrix is numerically rank deficient (sigma_min={s[-1]:.3e}, sigma_max={s[0]:.3e})",
            sigma_min=float(s[-1]),
            sigma_max=float(s[0]),
        )
    return s


def pseudoinverse(A):
    """Moore-Penrose inverse of a full-column-rank ``A`` via thin QR.

    With ``A = QR``, ``A^+ = R^{-1} Q^T``; ``A^T A`` is never formed.

    Raises
    ------
    RankDeficient
        If ``sigma_min(A) <= max(m, n) * eps * sigma_max(A)``.
    """
    A = as_matrix(A)
    _check_full_column_rank(A)
    Q, R = scipy.linalg.qr(A, mode="economic")
    return scipy.linalg.solve_triangular(R, Q.T)


def lstsq_solve(A, b):
    """Least-squares solution of ``A x ~= b`` for full-column-rank ``A`` (QR based)."""
    A = as_matrix(A)
    b = np.asarray(b, dtype=float).reshape(A.shape[0])
    _check_full_column_rank(A)
    Q, R = scipy.linalg.qr(A, mode="economic")
    return scipy.linalg.solve_triangular(R, Q.T @ b)


@dataclass
class BoundReport:
    """Outcome of checking the pseudo-inverse perturbation bounds for ``B = A + E``.

    ``status`` is ``"ok"`` when the bounds were evaluated and ``"not_applicable"`` when
    ``||A^+|| ||E|| >= 1``; in the latter case the numeric fields are ``nan``.
    """

    status: str
    product: float
    norm_bound_lhs: float = float("nan")
    norm_bound_rhs: float = float("nan")
    diff_bound_lhs: float = float("nan")
    diff_bound_rhs: float = float("nan")
    rank_preserved: bool = False
    norm_bound_ok: bool = False
    diff_bound_ok: bool = False

    @property
    def satisfied(self):
        return self.status == "ok" and self.rank_preserved and self.norm_bound_ok and self.diff_bound_ok


def check_perturbation_bounds(A, E, rtol=1e-10):
    """Evaluate both pseudo-inverse perturbation inequalities for ``B = A + E``.

    Checks ``||B^+|| <= ||A^+|| / (1 - ||A^+|| ||E||)`` and
    ``||B^+ - A^+|| <= sqrt(2) ||A^+||^2 ||E|| / (1 - ||A^+|| ||E||)``, plus
    ``rank(B) = n`` whenever ``||E A^+|| < 1``. A relative slack ``rtol`` (and the
    same amount in absolute terms, scaled by ``||A^+||``) absorbs roundoff.
    """
    A = as_matrix(A)
    E = as_matrix(E)
    if A.shape != E.shape:
        raise ValueError(f"shape mismatch: A is {A.shape}, E is {E.shape}")
    A_pinv = pseudoinverse(A)
    a = spectral_norm(A_pinv)
    e = spectral_norm(E)
    product = a * e
    if not product < 1.0:
        return BoundReport(status="not_applicable", product=product)

    B = A + E
    # ||E A^+|| <= ||E|| ||A^+|| < 1 here, so rank must be preserved
    rank_preserved = has_full_column_rank(B)
    if not rank_preserved:
        raise RankDeficient("A + E lost full column rank although ||A^+|| ||E|| < 1")
    B_pinv = pseudoinverse(B)

    norm_lhs = spectral_norm(B_pinv)
    norm_rhs = a / (1.0 - product)
    diff_lhs = spectral_norm(B_pinv - A_pinv)
    diff_rhs = np.sqrt(2.0) * a * a * e / (1.0 - product)
    atol = rtol * a
    return BoundReport(
        status="ok",
        product=product,
        norm_bound_lhs=norm_lhs,
        norm_bound_rhs=norm_rhs,
        diff_bound_lhs=diff_lhs,
        diff_bound_rhs=diff_rhs,
        rank_preserved=rank_preserved,
        norm_bound_ok=bool(norm_lhs <= norm_rhs * (1 + rtol) + atol),
        diff_bound_ok=bool(diff_lhs <= diff_rhs * (1 + rtol) + atol),
    )


def multilinear_norm(T, n_starts=8, max_iter=500, rng=None):
    """Operator norm of a vector-valued multilinear map.

    ``T`` has shape ``(m, n, ..., n)`` with ``k`` trailing slots and represents
    ``(u_1, ..., u_k) -> T[:, u_1, ..., u_k]``. The norm is
    ``sup ||T(u_1, ..., u_k)||`` over unit vectors, i.e. the max over unit ``w`` in
    R^m of the tensor's multilinear form. Computed by alternating maximisation
    from several seeded starts; exact when every slot is one-dimensional.
    """
    T = np.asarray(T, dtype=float)
    if T.ndim < 2:
        raise ValueError("tensor needs at least one input slot")
    if T.ndim == 2:
        return spectral_norm(T)
    if all(d == 1 for d in T.shape[1:]):
        return float(np.linalg.norm(T.reshape(-1)))
    rng = np.random.default_rng(0) if rng is None else rng
    k = T.ndim - 1
    best = 0.0
    for _ in range(n_starts):
        us = [_unit(rng.standard_normal(d)) for d in T.shape[1:]]
        value = 0.0
        for _ in range(max_iter):
            for slot in range(k):
                # contract every slot except `slot`, leaving an m x n_slot matrix
                M = np.moveaxis(T, slot + 1, 1)
                others = [u for j, u in enumerate(us) if j != slot]
                for u in reversed(others):
                    M = M @ u
                # maximise ||M u|| over unit u: top right singular vector
                _, s, vt = np.linalg.svd(M)
                us[slot] = vt[0]
                new_value = s[0]
            if abs(new_value - value) <= 1e-15 * max(1.0, new_value):
                value = new_value
                break
            value = new_value
        best = max(best, float(value))
    return best


def _unit(v):
    nrm = np.linalg.norm(v)
    return v / nrm if nrm > 0 else np.eye(len(v))[0]
