"""Small dense complex linear algebra.

Matrices and kets are plain ``numpy`` complex arrays. Storage is row-major and
tensor products always put player 1's factor first, so the joint basis index
of ``|r>_1 |s>_2`` is ``r * m2 + s``.
"""

from __future__ import annotations

import math

import numpy as np

from qnewcomb.errors import ValidationError

STRUCT_TOL = 1e-12
PAYOFF_TOL = 1e-6

_MAX_JACOBI_DIM = 64


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array (a copy)."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValidationError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def as_ket(k) -> np.ndarray:
    v = np.array(k, dtype=complex)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValidationError(f"expected a non-empty 1-D ket, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("ket has non-finite amplitudes")
    return v


def normalized(k) -> np.ndarray:
    v = as_ket(k)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValidationError("cannot normalize the zero ket")
    return v / n


def is_normalized(k, tol: float = STRUCT_TOL) -> bool:
    v = as_ket(k)
    return abs(float(np.vdot(v, v).real) - 1.0) <= tol


def basis_ket(m: int, i: int) -> np.ndarray:
    if not 0 <= i < m:
        raise ValidationError(f"basis index {i} out of range for dimension {m}")
    v = np.zeros(m, dtype=complex)
    v[i] = 1.0
    return v


def mat_mul(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValidationError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    """Kronecker product, entry ``(i*b.rows + k, j*b.cols + l) = a[i,j] * b[k,l]``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2:
        raise ValidationError("kron needs 2-D operands")
    # np.kron is general-purpose and several times slower on 2x2 inputs
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(
        a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    )


def adjoint(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def trace(a) -> complex:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"trace needs a square matrix, got shape {a.shape}")
    return complex(np.trace(a))


def outer(k, b) -> np.ndarray:
    """``|k><b|``."""
    return np.outer(as_ket(k), np.conj(as_ket(b)))


def identity(m: int) -> np.ndarray:
    return np.eye(m, dtype=complex)


def _max_dev_from_identity(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - np.eye(a.shape[0]))))


def is_unitary(a, tol: float = STRUCT_TOL) -> bool:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"unitarity needs a square matrix, got shape {a.shape}")
    return _max_dev_from_identity(adjoint(a) @ a) <= tol


def is_hermitian(a, tol: float = STRUCT_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return float(np.max(np.abs(a - adjoint(a)))) <= tol


def hadamard() -> np.ndarray:
    return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)


def negation() -> np.ndarray:
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def dft_matrix(m: int) -> np.ndarray:
    """Unitary DFT, entry ``(s, d) = exp(2 pi i s d / m) / sqrt(m)``."""
    if m < 1:
        raise ValidationError(f"DFT dimension must be >= 1, got {m}")
    if m == 2:
        # exact; the generic path leaves a 1e-16 imaginary residue on e^{i pi}
        return hadamard()
    sd = np.outer(np.arange(m), np.arange(m)) % m
    return np.exp(2j * np.pi * sd / m) / math.sqrt(m)


def partial_trace_second(rho, m1: int, m2: int) -> np.ndarray:
    """Trace out player 2's factor of a ``(m1*m2)``-square operator."""
    r = np.asarray(rho).reshape(m1, m2, m1, m2)
    return np.einsum("ikjk->ij", r)


def partial_trace_first(rho, m1: int, m2: int) -> np.ndarray:
    r = np.asarray(rho).reshape(m1, m2, m1, m2)
    return np.einsum("kikj->ij", r)


def jacobi_eigh(
    a, tol: float = 1e-15, max_sweeps: int = 50, vectors: bool = False
) -> tuple[np.ndarray, np.ndarray | None]:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the classical real Jacobi rotation, so the working matrix stays
    Hermitian throughout. Sweeps stop once the off-diagonal Frobenius mass
    falls below ``tol`` times the full Frobenius norm.

    Returns eigenvalues sorted ascending and, when ``vectors`` is set, the
    matching unitary of column eigenvectors.
    """
    m = as_matrix(a)
    n = m.shape[0]
    if m.shape[1] != n:
        raise ValidationError(f"eigensolver needs a square matrix, got shape {m.shape}")
    if n > _MAX_JACOBI_DIM:
        raise ValidationError(f"Jacobi eigensolver is limited to dim <= {_MAX_JACOBI_DIM}")
    if not is_hermitian(m, 1e-9 * max(1.0, float(np.max(np.abs(m))))):
        raise ValidationError("matrix is not Hermitian")

    # plain Python lists: numpy call overhead dominates at these sizes
    A = [[complex(x) for x in row] for row in m.tolist()]
    V = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)] if vectors else None
    for i in range(n):
        A[i][i] = complex(A[i][i].real, 0.0)
    total = sum(abs(x) ** 2 for row in A for x in row)
    thresh = (tol * math.sqrt(total)) ** 2 if total > 0 else 0.0

    for _ in range(max_sweeps):
        off = sum(abs(A[i][j]) ** 2 for i in range(n) for j in range(n) if i != j)
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p][q]
                mag = abs(b)
                if mag == 0.0:
                    continue
                ph = b / mag
                theta = (A[q][q].real - A[p][p].real) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ph_c = ph.conjugate()
                # A <- A G with G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q)
                for k in range(n):
                    akp, akq = A[k][p], A[k][q]
                    A[k][p] = c * akp - s * ph_c * akq
                    A[k][q] = s * akp + c * ph_c * akq
                # A <- G^H A
                for k in range(n):
                    apk, aqk = A[p][k], A[q][k]
                    A[p][k] = c * apk - s * ph * aqk
                    A[q][k] = s * apk + c * ph * aqk
                A[p][q] = A[q][p] = 0j
                A[p][p] = complex(A[p][p].real, 0.0)
                A[q][q] = complex(A[q][q].real, 0.0)
                if V is not None:
                    for k in range(n):
                        vkp, vkq = V[k][p], V[k][q]
                        V[k][p] = c * vkp - s * ph_c * vkq
                        V[k][q] = s * vkp + c * ph_c * vkq

    w = np.array([A[i][i].real for i in range(n)])
    order = np.argsort(w, kind="stable")
    if V is None:
        return w[order], None
    return w[order], np.array(V, dtype=complex)[:, order]


def min_eigenvalue(a) -> float:
    w, _ = jacobi_eigh(a)
    return float(w[0])


def is_psd(a, tol: float = 1e-10) -> bool:
    """True iff the smallest eigenvalue of Hermitian ``a`` is >= ``-tol``.

    Gershgorin discs are tried first; they settle most density operators
    built from a handful of projectors without running Jacobi.
    """
    m = np.asarray(a, dtype=complex)
    radii = np.sum(np.abs(m), axis=1) - np.abs(m.diagonal())
    if float(np.min(m.diagonal().real - radii)) >= -tol:
        return True
    return min_eigenvalue(m) >= -tol
