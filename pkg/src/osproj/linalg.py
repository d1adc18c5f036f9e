"""Dense complex linear algebra substrate.

Matrices are plain ``numpy.ndarray`` values with ``dtype=complex128``; every
function returns fresh arrays and never mutates its inputs.

vec convention (fixed, used everywhere in this package): **column stacking**,

    vec(A) = A.ravel(order="F"),            vec(x y^T) = y (x) kron x,
    vec(A X B) = (B^T kron A) vec(X).

The matrix text format is: first line ``rows cols``, then ``rows`` lines of
``cols`` whitespace-separated entries written as ``a+bi`` (the ``i`` suffix is
mandatory, ``b`` may be negative).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMatrixError, NotHermitianError, ShapeError

# Relative tolerance used for rank decisions throughout the package.
# Override per call via the `tol`/`rank_tol` arguments, or globally here.
DEFAULT_RANK_TOL = 1e-9


def set_default_rank_tol(tol: float) -> None:
    """Set the global relative tolerance for rank decisions."""
    global DEFAULT_RANK_TOL
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    DEFAULT_RANK_TOL = tol


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a 2-D complex128 array and reject non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix has non-finite entries")
    return m


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(a, dtype=complex).ravel(order="F")


def unvec(v: np.ndarray, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Inverse of :func:`vec`; square by default."""
    v = np.asarray(v, dtype=complex).ravel()
    if shape is None:
        n = int(round(np.sqrt(v.size)))
        if n * n != v.size:
            raise ShapeError(f"cannot unvec length {v.size} into a square matrix")
        shape = (n, n)
    return v.reshape(shape, order="F")


def op_norm(a) -> float:
    """Largest singular value; 0.0 for the zero matrix."""
    m = as_cmatrix(a)
    if m.size == 0:
        raise EmptyMatrixError("empty matrix")
    if not m.any():
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def herm_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector columns V) with
    a = V diag(w) V^H. Raises NotHermitianError when the input deviates from
    Hermitian by more than 1e-12 relative.
    """
    m = as_cmatrix(a)
    if m.size == 0:
        raise EmptyMatrixError("empty matrix")
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected square matrix, got {m.shape}")
    scale = op_norm(m)
    if scale > 0 and op_norm(m - m.conj().T) > 1e-12 * scale:
        raise NotHermitianError("not Hermitian")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return w.astype(float), v


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD a = U diag(s) V^H with s nonincreasing.

    Returns (U, s, V); note V, not V^H, so columns of V are right singular
    vectors.
    """
    m = as_cmatrix(a)
    if m.size == 0:
        raise EmptyMatrixError("empty matrix")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return u, s.astype(float), vh.conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product; realizes id_n (x) phi on vectorized matrices."""
    return np.kron(as_cmatrix(a), as_cmatrix(b))


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of a subspace of C^ambient_dim.

    `vectors` has shape (ambient_dim, dim) with orthonormal columns; dim may
    be zero (the zero subspace). For subspaces of M_d the ambient vectors are
    vec'd matrices (ambient_dim = d^2).
    """

    ambient_dim: int
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != self.ambient_dim:
            raise ShapeError(
                f"basis vectors must be ({self.ambient_dim}, k), got {v.shape}"
            )
        if v.shape[1] > 0:
            gram = v.conj().T @ v
            if op_norm(gram - np.eye(v.shape[1])) > 1e-10:
                raise ValueError("basis is not orthonormal within 1e-10")
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of an ambient vector onto the subspace."""
        if self.dim == 0:
            return np.zeros(self.ambient_dim, dtype=complex)
        return self.vectors @ (self.vectors.conj().T @ np.asarray(x, dtype=complex))

    def matrices(self, shape: tuple[int, int] | None = None) -> list[np.ndarray]:
        """Basis vectors unvec'd back to matrices."""
        return [unvec(self.vectors[:, j], shape) for j in range(self.dim)]


def null_space(a, tol: float | None = None) -> SubspaceBasis:
    """Orthonormal basis of the numerical kernel of `a`.

    Singular vectors with sigma <= tol * sigma_max are kept (all of them when
    a = 0). `tol` defaults to the global rank tolerance.
    """
    if tol is None:
        tol = DEFAULT_RANK_TOL
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_cmatrix(a)
    if m.size == 0:
        raise EmptyMatrixError("empty matrix")
    if not m.any():
        return SubspaceBasis(m.shape[1], np.eye(m.shape[1], dtype=complex))
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    v = vh.conj().T
    # Columns of v beyond min(rows, cols) have no singular value: treat as 0.
    sigmas = np.zeros(m.shape[1])
    sigmas[: s.size] = s
    return SubspaceBasis(m.shape[1], v[:, sigmas <= tol * s[0]])


def column_space(a, tol: float | None = None) -> SubspaceBasis:
    """Orthonormal basis of the numerical range of `a`."""
    if tol is None:
        tol = DEFAULT_RANK_TOL
    m = as_cmatrix(a)
    if m.size == 0:
        raise EmptyMatrixError("empty matrix")
    if not m.any():
        return SubspaceBasis(m.shape[0], np.zeros((m.shape[0], 0), dtype=complex))
    u, s, _ = svd(m)
    return SubspaceBasis(m.shape[0], u[:, s > tol * s[0]])


def random_complex(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Standard complex Gaussian matrix (Ginibre), deterministic given rng state."""
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


# ---------------------------------------------------------------------------
# Matrix text format
# ---------------------------------------------------------------------------

def format_complex(z: complex) -> str:
    """Render one entry as ``a+bi`` (i suffix mandatory, repr floats)."""
    re, im = float(np.real(z)), float(np.imag(z))
    sign = "+" if (im >= 0 or np.isnan(im)) else "-"
    return f"{re!r}{sign}{abs(im)!r}i"


def parse_complex(token: str) -> complex:
    """Parse one ``a+bi`` entry; the i suffix is mandatory."""
    t = token.strip()
    if not t.endswith("i"):
        raise ValueError(f"malformed complex entry {token!r}: missing 'i' suffix")
    body = t[:-1]
    # split at the last +/- that is not an exponent sign and not leading
    split = -1
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE":
            split = k
            break
    if split <= 0:
        raise ValueError(f"malformed complex entry {token!r}: expected a+bi form")
    try:
        return complex(float(body[:split]), float(body[split:]))
    except ValueError as exc:
        raise ValueError(f"malformed complex entry {token!r}: {exc}") from None


def write_matrix_text(a) -> str:
    """Serialize a matrix in the text format (header then rows)."""
    m = as_cmatrix(a)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    for r in range(m.shape[0]):
        lines.append(" ".join(format_complex(z) for z in m[r]))
    return "\n".join(lines) + "\n"


def read_matrix_text(text: str) -> np.ndarray:
    """Parse the matrix text format back into an array."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"bad header {lines[0]!r}: expected 'rows cols'")
    rows, cols = int(header[0]), int(header[1])
    if rows <= 0 or cols <= 0:
        raise ValueError("rows and cols must be positive")
    if len(lines) != rows + 1:
        raise ValueError(f"expected {rows} data lines, got {len(lines) - 1}")
    out = np.zeros((rows, cols), dtype=complex)
    for r in range(rows):
        tokens = lines[r + 1].split()
        if len(tokens) != cols:
            raise ValueError(f"row {r}: expected {cols} entries, got {len(tokens)}")
        out[r] = [parse_complex(tok) for tok in tokens]
    return out
