"""Dense complex-matrix primitives and PSD-cone utilities.

Everything downstream (measurements, protocol trees, deficit counting)
funnels through the handful of operations here: spectral norms, PSD square
roots, polar decompositions, pseudo-inverses, and ray-proportionality
tests.  Matrices are plain ``numpy`` arrays of complex128; dimensions stay
small (<= ~16x16), so dense eigen/SVD routines are always appropriate.
"""

from __future__ import annotations

import numpy as np

# Default tolerances.  Two orders of magnitude above accumulated round-off
# at the dimensions we work with, far below any constructed spectral gap.
TOL_HERMITIAN = 1e-10
TOL_PSD = 1e-9
TOL_RAY = 1e-8
TOL_RANK = 1e-10


class RayAmbiguityError(ValueError):
    """Raised when a proportionality decision falls inside the unsafe band."""


def as_matrix(entries, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce input to a 2-D complex array, optionally checking its shape."""
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if rows is not None and m.shape != (rows, cols):
        raise ValueError(f"expected shape {(rows, cols)}, got {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix entries must be finite")
    return m


def dagger(x: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return x.conj().T


def is_hermitian(x: np.ndarray, tol: float = TOL_HERMITIAN) -> bool:
    """Max-entry check of ``x == x``-dagger."""
    return bool(np.max(np.abs(x - dagger(x))) <= tol)


def assert_psd(x: np.ndarray, tol_herm: float = TOL_HERMITIAN, tol_psd: float = TOL_PSD) -> np.ndarray:
    """Validate that ``x`` is Hermitian within ``tol_herm`` with eigenvalues >= -``tol_psd``.

    Returns the exactly-Hermitized copy ``(x + x†)/2`` used by downstream
    eigenroutines.
    """
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise ValueError("PSD operator must be square")
    if not is_hermitian(x, tol_herm):
        raise ValueError(f"operator not Hermitian within {tol_herm}")
    h = (x + dagger(x)) / 2.0
    w = np.linalg.eigvalsh(h)
    if w.size and w[0] < -tol_psd:
        raise ValueError(f"operator has eigenvalue {w[0]:.3e} below -{tol_psd}")
    return h


def is_psd(x: np.ndarray, tol_herm: float = TOL_HERMITIAN, tol_psd: float = TOL_PSD) -> bool:
    """Non-raising version of :func:`assert_psd`."""
    try:
        assert_psd(x, tol_herm, tol_psd)
    except ValueError:
        return False
    return True


def spectral_norm(x: np.ndarray) -> float:
    """Largest singular value of ``x`` (the operator 2-norm)."""
    x = as_matrix(x)
    if x.size == 0 or not np.any(x):
        return 0.0
    return float(np.linalg.norm(x, 2))


def psd_sqrt(p: np.ndarray, tol_herm: float = TOL_HERMITIAN, tol_psd: float = TOL_PSD) -> np.ndarray:
    """Unique PSD square root of a PSD operator.

    Small negative eigenvalues within ``tol_psd`` are clipped to zero so
    that round-off on the input never leaks into the output.
    """
    h = assert_psd(p, tol_herm, tol_psd)
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def polar_decompose(k: np.ndarray, tol_rank: float = TOL_RANK) -> tuple[np.ndarray, np.ndarray]:
    """Decompose a square ``k`` as ``k = u @ p`` with ``p = sqrt(k† k)`` PSD.

    ``u`` maps the support of ``p`` isometrically (``u† u`` restricted to
    ``range(p)`` is the identity) and, by convention, acts as the identity
    on the kernel of ``p`` so the decomposition is deterministic.
    """
    k = as_matrix(k)
    if k.shape[0] != k.shape[1]:
        raise ValueError("polar decomposition implemented for square operators")
    w, s, vh = np.linalg.svd(k)
    v = dagger(vh)
    support = s > tol_rank
    p = (v * np.clip(s, 0.0, None)) @ dagger(v)
    u = w[:, support] @ dagger(v[:, support])
    kernel = ~support
    if np.any(kernel):
        u = u + v[:, kernel] @ dagger(v[:, kernel])
    return u, p


def pseudo_inverse(x: np.ndarray, tol_rank: float = TOL_RANK) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with an absolute singular-value cutoff."""
    x = as_matrix(x)
    if not np.any(x):
        return np.zeros_like(dagger(x))
    w, s, vh = np.linalg.svd(x)
    inv = np.where(s > tol_rank, 1.0 / np.where(s > tol_rank, s, 1.0), 0.0)
    return dagger(vh) @ (inv[:, None] * dagger(w))


def support_projector(x: np.ndarray, tol_rank: float = TOL_RANK) -> np.ndarray:
    """Orthogonal projector onto the column space of ``x``."""
    x = as_matrix(x)
    if not np.any(x):
        return np.zeros((x.shape[0], x.shape[0]), dtype=complex)
    w, s, _ = np.linalg.svd(x)
    cols = w[:, s > tol_rank]
    return cols @ dagger(cols)


def normalized_ray_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Frobenius distance between trace-normalized PSD representatives."""
    tx = np.trace(x).real
    ty = np.trace(y).real
    if tx <= 0 or ty <= 0:
        raise ValueError("ray comparison requires nonzero PSD operators")
    return float(np.linalg.norm(x / tx - y / ty))


def proportional(x: np.ndarray, y: np.ndarray, tol_ray: float = TOL_RAY) -> bool:
    """Whether two nonzero PSD operators generate the same ray.

    PSD operators carry no phase freedom, so trace normalization followed
    by a Frobenius comparison decides proportionality.
    """
    x = as_matrix(x)
    y = as_matrix(y)
    if x.shape != y.shape:
        raise ValueError("operators must share dimensions")
    return normalized_ray_distance(x, y) <= tol_ray


def kraus_proportional(x: np.ndarray, y: np.ndarray, tol_ray: float = TOL_RAY) -> bool:
    """Phase-insensitive proportionality for general (non-PSD) operators.

    Tests Cauchy-Schwarz saturation ``|<x, y>_HS| >= (1 - tol) |x| |y|``;
    zero operators are proportional only to other zero operators.
    """
    x = as_matrix(x)
    y = as_matrix(y)
    if x.shape != y.shape:
        raise ValueError("operators must share dimensions")
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return nx == ny
    overlap = abs(np.vdot(x, y))
    return bool(overlap >= (1.0 - tol_ray) * nx * ny)


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices."""
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def ket(index: int, dim: int) -> np.ndarray:
    """Computational basis column vector |index> of dimension ``dim``."""
    v = np.zeros((dim, 1), dtype=complex)
    v[index, 0] = 1.0
    return v


def ketbra(i: int, j: int, dim: int) -> np.ndarray:
    """Matrix unit |i><j| of dimension ``dim``."""
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def projector(index: int, dim: int) -> np.ndarray:
    """Basis projector |index><index|."""
    return ketbra(index, index, dim)


def random_psd(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Generic full-rank-almost-surely PSD matrix ``G G†``."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return g @ dagger(g)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def haar_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random pure state as a column vector."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return (v / np.linalg.norm(v)).reshape(dim, 1)


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator so seeded runs reproduce across platforms."""
    return np.random.Generator(np.random.Philox(seed))
