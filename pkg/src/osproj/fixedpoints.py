"""Fixed-point subspaces and commutants, computed independently of averaging.

X^S = {x : alpha_s(x) = x for all s} is found as the joint kernel of the
stacked natural matrices (alpha_g - id) over a finite generating family;
circle actions use the exact zero-frequency entry pattern instead. The
commutant of a matrix family solves x m = m x entrywise. Both return
orthonormal bases of vec'd matrices, so ranges and fixed spaces can be
compared through principal angles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .actions import CIRCLE, CYCLIC, FINITE_GROUP, FREE_MONOID, SemigroupAction
from .errors import ShapeError
from .linalg import DEFAULT_RANK_TOL, SubspaceBasis, as_cmatrix, kron, null_space


@dataclass(frozen=True)
class FixedSubspace:
    """Orthonormal basis of a fixed-point subspace of vec'd matrices."""

    basis: SubspaceBasis
    source: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.basis.dim


@dataclass(frozen=True)
class SubspaceMatch:
    """Principal-angle comparison of two subspaces of one ambient space.

    When the dimensions differ the angle is the pi/2 sentinel and
    `dim_mismatch` is set; equality of subspaces means angle ~ 0 and no
    mismatch.
    """

    angle: float
    dim_mismatch: bool
    dims: tuple[int, int]


def fixed_subspace(action: SemigroupAction, tol: float | None = None) -> FixedSubspace:
    """Joint fixed space of all alpha_s (Notation: the solution of alpha_s(x)=x)."""
    if tol is None:
        tol = DEFAULT_RANK_TOL
    kind = action.semigroup.kind
    d = action.dim
    if kind == CIRCLE:
        freq = action.frequency_matrix()
        cols = []
        for j in range(d):
            for i in range(d):
                if freq[i, j] == 0:
                    e = np.zeros(d * d, dtype=complex)
                    e[i + d * j] = 1.0  # vec of E_ij, column stacking
                    cols.append(e)
        vecs = np.stack(cols, axis=1) if cols else np.zeros((d * d, 0), dtype=complex)
        return FixedSubspace(SubspaceBasis(d * d, vecs), source=("circle",))
    if kind in (FINITE_GROUP, CYCLIC, FREE_MONOID):
        gens = action.generator_superops()
        eye = np.eye(d * d)
        stacked = np.vstack([g.natural - eye for g in gens])
        labels = (
            action.semigroup.elements
            if kind in (FINITE_GROUP, CYCLIC)
            else action.semigroup.generators
        )
        return FixedSubspace(null_space(stacked, tol=tol), source=tuple(labels))
    raise ValueError(f"unknown semigroup kind {kind}")


def commutant(mats, tol: float | None = None) -> FixedSubspace:
    """Basis of {x : x m = m x for every m} as vec'd matrices."""
    if tol is None:
        tol = DEFAULT_RANK_TOL
    ms = [as_cmatrix(m) for m in mats]
    if not ms:
        raise ValueError("need at least one matrix")
    d = ms[0].shape[0]
    if any(m.shape != (d, d) for m in ms):
        raise ShapeError("commutant needs square matrices of equal size")
    eye = np.eye(d)
    # vec(x m - m x) = (m^T (x) I - I (x) m) vec(x)
    stacked = np.vstack([kron(m.T, eye) - kron(eye, m) for m in ms])
    return FixedSubspace(null_space(stacked, tol=tol), source=("commutant",))


def subspace_match(a: SubspaceBasis, b: SubspaceBasis) -> SubspaceMatch:
    """Largest principal angle between equal-dimensional subspaces.

    Dimension mismatch is reported through the flag (with a pi/2 sentinel),
    never silently as an angle of 0.
    """
    if a.ambient_dim != b.ambient_dim:
        raise ShapeError("subspaces live in different ambient spaces")
    if a.dim != b.dim:
        return SubspaceMatch(np.pi / 2, True, (a.dim, b.dim))
    if a.dim == 0:
        return SubspaceMatch(0.0, False, (0, 0))
    # sin(theta_max) = ||(I - A A^H) B||: uniformly accurate for small angles,
    # where arccos of the smallest singular value of A^H B floors at ~1e-8.
    residual = b.vectors - a.vectors @ (a.vectors.conj().T @ b.vectors)
    smax = min(1.0, float(np.linalg.svd(residual, compute_uv=False)[0]))
    return SubspaceMatch(float(np.arcsin(smax)), False, (a.dim, b.dim))
