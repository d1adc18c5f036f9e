"""Completely bounded linear maps Phi: M_d -> M_k as first-class values.

A map is stored through its *natural representation*: the k^2 x d^2 matrix K
with vec(Phi(x)) = K vec(x) under the package-wide column-stacking vec. For
Phi(x) = sum_i A_i x B_i this gives K = sum_i B_i^T (x) A_i.

The Choi matrix is J(Phi) = sum_ij E_ij (x) Phi(E_ij), a dk x dk matrix with
J[(i*k + a), (j*k + b)] = Phi(E_ij)[a, b]; it is cached lazily and is PSD
exactly when Phi is completely positive.

Duality is taken with respect to the *bilinear* trace pairing
<y, x> = tr(y^T x), which makes dual_of a plain transpose of the natural
matrix. The sesquilinear (Hilbert-Schmidt) adjoint is `adjoint()`, the
conjugate transpose; the two differ by entrywise conjugation of the argument.

File format: header line ``superop d k repr`` with repr in
{natural, choi, kraus}; then matrices in the linalg text format (for kraus, a
line with the operator count comes first).
"""

from __future__ import annotations

import numpy as np

from .errors import NotCompletelyPositiveError, ShapeError
from .linalg import (
    as_cmatrix,
    herm_eig,
    kron,
    op_norm,
    read_matrix_text,
    unvec,
    vec,
    write_matrix_text,
)


class SuperOp:
    """Immutable linear map on matrix spaces, M_d -> M_k."""

    __slots__ = ("in_dim", "out_dim", "natural", "_choi")

    def __init__(self, natural, in_dim: int | None = None, out_dim: int | None = None):
        m = as_cmatrix(natural)
        rows, cols = m.shape
        k = int(round(np.sqrt(rows)))
        d = int(round(np.sqrt(cols)))
        if k * k != rows or d * d != cols:
            raise ShapeError(f"natural matrix shape {m.shape} is not (k^2, d^2)")
        if in_dim is not None and in_dim != d:
            raise ShapeError(f"in_dim {in_dim} inconsistent with natural matrix")
        if out_dim is not None and out_dim != k:
            raise ShapeError(f"out_dim {out_dim} inconsistent with natural matrix")
        object.__setattr__(self, "in_dim", d)
        object.__setattr__(self, "out_dim", k)
        m.setflags(write=False)
        object.__setattr__(self, "natural", m)
        object.__setattr__(self, "_choi", None)

    def __setattr__(self, *_):
        raise AttributeError("SuperOp is immutable")

    def __repr__(self):
        return f"SuperOp(M_{self.in_dim} -> M_{self.out_dim})"

    # -- evaluation and algebra ------------------------------------------

    def apply(self, x) -> np.ndarray:
        """Evaluate the map on a d x d matrix."""
        xm = as_cmatrix(x)
        if xm.shape != (self.in_dim, self.in_dim):
            raise ShapeError(
                f"expected {self.in_dim}x{self.in_dim} input, got {xm.shape}"
            )
        return unvec(self.natural @ vec(xm), (self.out_dim, self.out_dim))

    def __call__(self, x) -> np.ndarray:
        return self.apply(x)

    def compose(self, other: "SuperOp") -> "SuperOp":
        """self after other (natural matrices multiply)."""
        if other.out_dim != self.in_dim:
            raise ShapeError(
                f"cannot compose M_{other.in_dim}->M_{other.out_dim} "
                f"into M_{self.in_dim}->M_{self.out_dim}"
            )
        return SuperOp(self.natural @ other.natural)

    def __matmul__(self, other: "SuperOp") -> "SuperOp":
        return self.compose(other)

    def __add__(self, other: "SuperOp") -> "SuperOp":
        if (other.in_dim, other.out_dim) != (self.in_dim, self.out_dim):
            raise ShapeError("superop dimension mismatch in addition")
        return SuperOp(self.natural + other.natural)

    def __sub__(self, other: "SuperOp") -> "SuperOp":
        if (other.in_dim, other.out_dim) != (self.in_dim, self.out_dim):
            raise ShapeError("superop dimension mismatch in subtraction")
        return SuperOp(self.natural - other.natural)

    def __mul__(self, c) -> "SuperOp":
        return SuperOp(complex(c) * self.natural)

    __rmul__ = __mul__

    # -- representations ---------------------------------------------------

    @property
    def choi(self) -> np.ndarray:
        """Choi matrix J = sum_ij E_ij (x) Phi(E_ij) (cached)."""
        if self._choi is None:
            j = natural_to_choi(self.natural, self.in_dim, self.out_dim)
            j.setflags(write=False)
            object.__setattr__(self, "_choi", j)
        return self._choi

    def kraus(self, tol: float = 1e-9) -> list[np.ndarray]:
        """Kraus decomposition Phi(x) = sum_i A_i x A_i^H of a CP map.

        Kraus count equals the Choi rank at relative tolerance `tol`.
        Raises NotCompletelyPositiveError when the Choi matrix is not PSD
        within tol (message "Choi not PSD", minimum eigenvalue attached).
        """
        j = self.choi
        scale = op_norm(j) if j.any() else 0.0
        if scale == 0.0:
            return []
        herm_defect = op_norm(j - j.conj().T)
        w, v = np.linalg.eigh(0.5 * (j + j.conj().T))
        if herm_defect > tol * scale or w[0] < -tol * scale:
            raise NotCompletelyPositiveError(
                f"Choi not PSD (min eigenvalue {w[0]:.3e}, "
                f"hermiticity defect {herm_defect:.3e})",
                min_eigenvalue=float(w[0]),
            )
        ops = []
        for m in range(w.size - 1, -1, -1):  # largest eigenvalue first
            if w[m] <= tol * scale:
                break
            ops.append(
                np.sqrt(w[m]) * v[:, m].reshape(self.in_dim, self.out_dim).T
            )
        return ops

    def amplify(self, n: int) -> "SuperOp":
        """id_n (x) Phi acting on M_n(M_d) = M_{nd} blockwise."""
        if n < 1:
            raise ValueError("amplification level must be >= 1")
        if n == 1:
            return self
        d, k = self.in_dim, self.out_dim
        t = self.natural.reshape((k, k, d, d), order="F")  # axes [a, b, i, j]
        eye = np.eye(n)
        t6 = np.einsum("pP,qQ,abij->paqbPiQj", eye, eye, t)
        t4 = t6.reshape(n * k, n * k, n * d, n * d)  # axes [A, B, I, J]
        return SuperOp(
            t4.transpose(1, 0, 3, 2).reshape((n * k) ** 2, (n * d) ** 2)
        )

    def dual(self) -> "SuperOp":
        """Dual under the bilinear pairing <y,x> = tr(y^T x): M_k* -> M_d*.

        Contract: tr(dual(Phi)(y)^T x) = tr(y^T Phi(x)) for all x, y.
        """
        return SuperOp(self.natural.T.copy())

    def adjoint(self) -> "SuperOp":
        """Hilbert-Schmidt adjoint (sesquilinear pairing tr(y^H x))."""
        return SuperOp(self.natural.conj().T.copy())


# ---------------------------------------------------------------------------
# Free functions mirroring the operation surface
# ---------------------------------------------------------------------------

def apply(phi: SuperOp, x) -> np.ndarray:
    return phi.apply(x)


def compose(phi: SuperOp, psi: SuperOp) -> SuperOp:
    return phi.compose(psi)


def choi_of(phi: SuperOp) -> np.ndarray:
    return phi.choi.copy()


def kraus_of(phi: SuperOp, tol: float = 1e-9) -> list[np.ndarray]:
    return phi.kraus(tol)


def amplify(phi: SuperOp, n: int) -> SuperOp:
    return phi.amplify(n)


def dual_of(phi: SuperOp) -> SuperOp:
    return phi.dual()


# ---------------------------------------------------------------------------
# Representation conversions and constructors
# ---------------------------------------------------------------------------

def natural_to_choi(natural: np.ndarray, d: int, k: int) -> np.ndarray:
    t = natural.reshape((k, k, d, d), order="F")  # [a, b, i, j]
    return np.ascontiguousarray(
        t.transpose(2, 0, 3, 1).reshape(d * k, d * k)  # [(i,a), (j,b)]
    )


def choi_to_natural(choi: np.ndarray, d: int, k: int) -> np.ndarray:
    j4 = choi.reshape(d, k, d, k)  # [i, a, j, b]
    return np.ascontiguousarray(
        j4.transpose(3, 1, 2, 0).reshape(k * k, d * d)  # [(b,a) -> row a+kb]
    )


def from_choi(choi, d: int, k: int) -> SuperOp:
    j = as_cmatrix(choi)
    if j.shape != (d * k, d * k):
        raise ShapeError(f"Choi matrix must be {d * k}x{d * k}, got {j.shape}")
    return SuperOp(choi_to_natural(j, d, k))


def from_kraus(ops, right_ops=None) -> SuperOp:
    """Phi(x) = sum_i A_i x B_i^H (B defaults to A, the CP case)."""
    left = [as_cmatrix(a) for a in ops]
    right = left if right_ops is None else [as_cmatrix(b) for b in right_ops]
    if len(left) != len(right) or not left:
        raise ShapeError("need matching, nonempty Kraus lists")
    k, d = left[0].shape
    nat = np.zeros((k * k, d * d), dtype=complex)
    for a, b in zip(left, right):
        if a.shape != (k, d) or b.shape != (k, d):
            raise ShapeError("all Kraus operators must share one shape")
        nat += kron(b.conj(), a)
    return SuperOp(nat)


def from_matrix_pair(a, b) -> SuperOp:
    """Phi(x) = a x b for fixed matrices (no conjugation on b)."""
    am, bm = as_cmatrix(a), as_cmatrix(b)
    return SuperOp(kron(bm.T, am))


def identity(d: int) -> SuperOp:
    return SuperOp(np.eye(d * d, dtype=complex))


def zero(d: int, k: int | None = None) -> SuperOp:
    k = d if k is None else k
    return SuperOp(np.zeros((k * k, d * d), dtype=complex))


def conjugation(u) -> SuperOp:
    """x -> u x u^H (CP for any u; an automorphism for unitary u)."""
    um = as_cmatrix(u)
    return from_kraus([um])


def similarity(r) -> SuperOp:
    """x -> r x r^{-1} for invertible r."""
    rm = as_cmatrix(r)
    return from_matrix_pair(rm, np.linalg.inv(rm))


def transpose_map(d: int) -> SuperOp:
    """x -> x^T; its Choi matrix is the swap and is not PSD for d >= 2."""
    nat = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            nat[i + d * j, j + d * i] = 1.0
    return SuperOp(nat)


def pinching(d: int) -> SuperOp:
    """x -> sum_i E_ii x E_ii (keep the diagonal)."""
    return from_kraus([np.diag(np.eye(d, dtype=complex)[i]) for i in range(d)])


def trace_to(state, in_dim: int | None = None) -> SuperOp:
    """x -> tr(x) * state, with x in M_in_dim (defaults to the state's dim)."""
    s = as_cmatrix(state)
    if s.shape[0] != s.shape[1]:
        raise ShapeError("state must be square")
    d = s.shape[0] if in_dim is None else in_dim
    return SuperOp(np.outer(vec(s), vec(np.eye(d))))


def is_cp(phi: SuperOp, tol: float = 1e-9) -> bool:
    """True when the Choi matrix is PSD within tol (relative)."""
    j = phi.choi
    if not j.any():
        return True
    scale = op_norm(j)
    if op_norm(j - j.conj().T) > tol * scale:
        return False
    w = np.linalg.eigvalsh(0.5 * (j + j.conj().T))
    return bool(w[0] >= -tol * scale)


def choi_min_eig(phi: SuperOp) -> float:
    """Smallest eigenvalue of the Hermitian part of the Choi matrix."""
    j = phi.choi
    return float(np.linalg.eigvalsh(0.5 * (j + j.conj().T))[0])


def is_unital(phi: SuperOp, tol: float = 1e-10) -> bool:
    d = phi.in_dim
    return op_norm(phi.apply(np.eye(d)) - np.eye(phi.out_dim)) <= tol * np.sqrt(d)


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

def write_superop_text(phi: SuperOp, repr_kind: str = "natural") -> str:
    """Serialize in the superop file format."""
    header = f"superop {phi.in_dim} {phi.out_dim} {repr_kind}"
    if repr_kind == "natural":
        return header + "\n" + write_matrix_text(phi.natural)
    if repr_kind == "choi":
        return header + "\n" + write_matrix_text(phi.choi)
    if repr_kind == "kraus":
        ops = phi.kraus()
        chunks = [header, str(len(ops))]
        chunks += [write_matrix_text(a).rstrip("\n") for a in ops]
        return "\n".join(chunks) + "\n"
    raise ValueError(f"unknown superop repr {repr_kind!r}")


def read_superop_text(text: str) -> SuperOp:
    """Parse the superop file format."""
    lines = text.splitlines()
    idx = 0
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    if idx == len(lines):
        raise ValueError("empty superop text")
    header = lines[idx].split()
    if len(header) != 4 or header[0] != "superop":
        raise ValueError(f"bad superop header {lines[idx]!r}")
    d, k, repr_kind = int(header[1]), int(header[2]), header[3]
    body = "\n".join(lines[idx + 1:])
    if repr_kind == "natural":
        nat = read_matrix_text(body)
        if nat.shape != (k * k, d * d):
            raise ValueError(f"natural payload must be {k*k}x{d*d}")
        return SuperOp(nat)
    if repr_kind == "choi":
        return from_choi(read_matrix_text(body), d, k)
    if repr_kind == "kraus":
        rest = [ln for ln in body.splitlines()]
        j = 0
        while j < len(rest) and not rest[j].strip():
            j += 1
        count = int(rest[j])
        payload = rest[j + 1:]
        ops = []
        pos = 0
        for _ in range(count):
            while pos < len(payload) and not payload[pos].strip():
                pos += 1
            rows = int(payload[pos].split()[0])
            chunk = "\n".join(payload[pos: pos + rows + 1])
            ops.append(read_matrix_text(chunk))
            pos += rows + 1
        if len(ops) != count or any(a.shape != (k, d) for a in ops):
            raise ValueError("kraus payload inconsistent with header")
        return from_kraus(ops)
    raise ValueError(f"unknown superop repr {repr_kind!r}")
