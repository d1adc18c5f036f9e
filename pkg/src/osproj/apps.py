"""Runnable scenarios built on the averaging engine.

Each scenario wires a concrete structure from operator theory into the
projection builders and verifies the property that makes it interesting:

* Toeplitz-type projections for a contractive semigroup representation,
  with the commutant bimodule property P(A D B^H) = A P(D) B^H;
* fixed points of a completely positive contraction (the N-action of its
  powers), with complete positivity of the resulting projection;
* dual projections onto invariant states (dynamical-system expectations);
* Weyl unitarization of a bounded finite-group representation;
* the isotropy Lie algebra / commutant identity behind smooth similarity
  orbits;
* the plain-norm (Banach space) version of the projection bound.

The cyclic Toeplitz mode uses the unitary cyclic shift and has the circulant
matrices as its range. The truncated mode keeps the honest Jordan-shift
compression of the unilateral shift: its fixed-point equations force C = 0
at every finite dimension, so the projection is 0; the infinite-dimensional
Toeplitz projection has no finite surrogate and none is faked here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import cbnorm
from .actions import (
    SemigroupAction,
    SemigroupDesc,
    build_conjugation_action,
    build_free_monoid_action,
    cyclic_desc,
)
from .averaging import ProjectionReport, average_ergodic, average_uniform
from .errors import (
    IllConditionedError,
    NotCompletelyPositiveError,
    ShapeError,
    VerificationError,
)
from .fixedpoints import FixedSubspace, commutant
from .linalg import as_cmatrix, herm_eig, op_norm, random_complex
from .superop import SuperOp, choi_min_eig, conjugation, is_cp

CYCLIC_SHIFT = "cyclic_shift"
TRUNCATED_SHIFT = "truncated_shift"


def cyclic_shift_matrix(n: int) -> np.ndarray:
    """The cyclic permutation unitary sending e_i to e_{i+1 mod n}."""
    return np.roll(np.eye(n, dtype=complex), 1, axis=0)


def jordan_shift_matrix(n: int) -> np.ndarray:
    """The nilpotent upper shift (compression of the backward shift)."""
    return np.diag(np.ones(n - 1, dtype=complex), 1) if n > 1 else np.zeros((1, 1), complex)


@dataclass(frozen=True)
class ToeplitzProblem:
    """Shift-invariance data: dimension and which shift semigroup acts.

    Every generator must be a contraction (||rho(s)|| <= 1 within 1e-12).
    """

    dim: int
    mode: str
    generators: tuple[np.ndarray, ...] = field(repr=False)

    @staticmethod
    def cyclic(dim: int) -> "ToeplitzProblem":
        if dim < 1:
            raise ValueError("dim must be positive")
        return ToeplitzProblem(dim, CYCLIC_SHIFT, (cyclic_shift_matrix(dim),))

    @staticmethod
    def truncated(dim: int) -> "ToeplitzProblem":
        if dim < 1:
            raise ValueError("dim must be positive")
        return ToeplitzProblem(dim, TRUNCATED_SHIFT, (jordan_shift_matrix(dim),))

    def __post_init__(self):
        if self.mode not in (CYCLIC_SHIFT, TRUNCATED_SHIFT):
            raise ValueError(f"unknown Toeplitz mode {self.mode!r}")
        for g in self.generators:
            if g.shape != (self.dim, self.dim):
                raise ShapeError("generator shape mismatch")
            if op_norm(g) > 1 + 1e-12:
                raise VerificationError("generators must be contractions")

    def action(self) -> SemigroupAction:
        """The conjugation action C -> rho C rho^* of the shift semigroup."""
        if self.mode == CYCLIC_SHIFT:
            mats = [
                np.linalg.matrix_power(self.generators[0], k) for k in range(self.dim)
            ]
            return build_conjugation_action(cyclic_desc(self.dim), mats)
        return build_free_monoid_action([conjugation(self.generators[0])])


def toeplitz_projection(problem: ToeplitzProblem, **kwargs) -> ProjectionReport:
    """Projection onto {C : rho(s) C rho(s)^* = C}.

    Cyclic mode averages the finite group (range: circulants); truncated mode
    runs the mean-ergodic builder on the N-action (range: {0} at any finite
    dimension, matching the entrywise fixed-point equations).
    """
    action = problem.action()
    if problem.mode == CYCLIC_SHIFT:
        return average_uniform(action, **kwargs)
    return average_ergodic(action, **kwargs)


def verify_module_property(
    problem: ToeplitzProblem,
    report: ProjectionReport,
    trials: int = 32,
    seed: int = 0,
) -> float:
    """Max normalized defect of P(A D B^H) - A P(D) B^H over seeded trials.

    A and B are random combinations of the computed commutant basis of the
    representing semigroup, D is a random matrix; the defect is normalized by
    ||A|| ||B|| ||D||.
    """
    n = problem.dim
    comm = commutant(problem.generators)
    basis = comm.basis.matrices((n, n))
    rng = np.random.default_rng(seed)
    p = report.p
    worst = 0.0
    for _ in range(trials):
        coeff_a = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        coeff_b = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        a = sum(c * m for c, m in zip(coeff_a, basis))
        b = sum(c * m for c, m in zip(coeff_b, basis))
        d = random_complex(rng, n, n)
        lhs = p.apply(a @ d @ b.conj().T)
        rhs = a @ p.apply(d) @ b.conj().T
        scale = op_norm(a) * op_norm(b) * op_norm(d)
        if scale > 0:
            worst = max(worst, op_norm(lhs - rhs) / scale)
    return worst


def verify_conditional_expectation(
    action: SemigroupAction,
    report: ProjectionReport,
    trials: int = 32,
    seed: int = 0,
) -> float:
    """Bimodule defect P(a x b) - a P(x) b with a, b from the fixed algebra."""
    n = action.dim
    basis = report.fixed.basis.matrices((n, n))
    rng = np.random.default_rng(seed)
    p = report.p
    worst = 0.0
    for _ in range(trials):
        ca = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        cb = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        a = sum(c * m for c, m in zip(ca, basis))
        b = sum(c * m for c, m in zip(cb, basis))
        x = random_complex(rng, n, n)
        scale = op_norm(a) * op_norm(b) * op_norm(x)
        if scale > 0:
            worst = max(worst, op_norm(p.apply(a @ x @ b) - a @ p.apply(x) @ b) / scale)
    return worst


def cp_fixed_projection(phi: SuperOp, **kwargs) -> ProjectionReport:
    """Idempotent CP contraction onto {x : phi(x) = x}.

    Requires phi completely positive (Choi PSD within 1e-9) and completely
    contractive (||phi(I)|| <= 1 + 1e-9); built by the mean-ergodic average
    of the N-action n -> phi^n. The report additionally certifies that the
    projection itself is CP and completely contractive.
    """
    if not is_cp(phi, tol=1e-9):
        raise NotCompletelyPositiveError(
            "hypothesis violated: map is not completely positive",
            min_eigenvalue=choi_min_eig(phi),
        )
    cp_norm = cbnorm.cb_norm_cp(phi)
    if cp_norm > 1 + 1e-9:
        raise VerificationError(
            f"hypothesis violated: map is not completely contractive "
            f"(cb norm {cp_norm:.12f})"
        )
    action = build_free_monoid_action([phi])
    report = average_ergodic(action, **kwargs)
    p_choi_min = report.choi_min_eig
    j_scale = op_norm(report.p.choi) if report.p.natural.any() else 0.0
    if p_choi_min < -1e-9 * max(1.0, j_scale):
        raise VerificationError(
            f"projection lost complete positivity (Choi min eig {p_choi_min:.3e})"
        )
    if report.p.natural.any():
        p_cp_norm = cbnorm.cb_norm_cp(report.p)
        if p_cp_norm > 1 + 1e-6:
            raise VerificationError(
                f"projection lost complete contractivity (cb {p_cp_norm:.12f})"
            )
    return report


@dataclass(frozen=True)
class RepProblem:
    """A bounded representation of a finite group by invertible matrices."""

    group: SemigroupDesc
    rep: dict[str, np.ndarray] = field(repr=False)
    sup_norm: float = 0.0

    @staticmethod
    def build(group: SemigroupDesc, rep) -> "RepProblem":
        if group.kind not in ("finite_group", "cyclic"):
            raise ValueError("RepProblem needs a finite group")
        mats = (
            {lab: as_cmatrix(rep[lab]) for lab in group.elements}
            if isinstance(rep, dict)
            else {lab: as_cmatrix(m) for lab, m in zip(group.elements, rep)}
        )
        sup = max(op_norm(m) for m in mats.values())
        return RepProblem(group, mats, float(sup))

    def matrices(self) -> list[np.ndarray]:
        return [self.rep[lab] for lab in self.group.elements]

    def action(self) -> SemigroupAction:
        return build_conjugation_action(self.group, self.rep)


@dataclass(frozen=True)
class WeylResult:
    """Similarity W conjugating the representation to unitaries."""

    w: np.ndarray = field(repr=False)
    defect: float = 0.0
    gram_min_eig: float = 0.0
    gram_min_eig_bound: float = 0.0


def weyl_unitarize(problem: RepProblem) -> WeylResult:
    """Unitarize a bounded finite-group representation.

    Averages the Gram form B = |G|^{-1} sum_g rho(g)^H rho(g) and conjugates
    by W = B^{1/2}; then every W rho(g) W^{-1} is unitary. B is positive
    definite with min eigenvalue >= |G|^{-1} (max_g ||rho(g)||)^{-2}, which
    the result records next to the measured value.
    """
    mats = problem.matrices()
    n = len(mats)
    d = mats[0].shape[0]
    gram = sum(m.conj().T @ m for m in mats) / n
    w_eigs, v = herm_eig(gram)
    if w_eigs[0] <= 0 or w_eigs[-1] / w_eigs[0] > 1e10:
        raise IllConditionedError(
            f"Gram average too ill-conditioned (cond {w_eigs[-1] / max(w_eigs[0], 1e-300):.3e})"
        )
    w = v @ np.diag(np.sqrt(w_eigs)) @ v.conj().T
    w_inv = v @ np.diag(1.0 / np.sqrt(w_eigs)) @ v.conj().T
    defect = 0.0
    for m in mats:
        u = w @ m @ w_inv
        defect = max(defect, op_norm(u.conj().T @ u - np.eye(d)))
    bound = 1.0 / (n * problem.sup_norm ** 2) if problem.sup_norm > 0 else 0.0
    return WeylResult(
        w=w,
        defect=float(defect),
        gram_min_eig=float(w_eigs[0]),
        gram_min_eig_bound=float(bound),
    )


@dataclass(frozen=True)
class IsotropyResult:
    """Commutant of the representation with the exp-commutation cross-check."""

    subspace: FixedSubspace
    exp_defect: float


def isotropy_lie_algebra(
    problem: RepProblem,
    samples: int = 8,
    seed: int = 0,
    check_tol: float = 1e-8,
) -> IsotropyResult:
    """Lie algebra of the isotropy group of rho, i.e. the commutant rho(G)'.

    Cross-check: for seeded random elements a of the commutant and
    t in {+-0.1, +-0.5}, exp(t a) commutes with every rho(g) within 1e-8
    (matrix exponential by scaling and squaring).
    """
    mats = problem.matrices()
    comm = commutant(mats)
    d = mats[0].shape[0]
    basis = comm.basis.matrices((d, d))
    rng = np.random.default_rng(seed)
    worst = 0.0
    if basis:
        for _ in range(samples):
            coeff = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
            a = sum(c * m for c, m in zip(coeff, basis))
            nrm = op_norm(a)
            if nrm > 0:
                a = a / nrm
            for t in (0.1, -0.1, 0.5, -0.5):
                e = scipy.linalg.expm(t * a)
                for m in mats:
                    worst = max(worst, op_norm(e @ m - m @ e))
    if worst > check_tol:
        raise VerificationError(
            f"exp(t a) commutation cross-check failed: defect {worst:.3e}"
        )
    return IsotropyResult(subspace=comm, exp_defect=float(worst))


@dataclass(frozen=True)
class PlainNormResult:
    """Banach-space version: projection with the plain operator-norm bound."""

    report: ProjectionReport
    plain_norm_estimate: float
    plain_norm_cap: float
    bound_ok: bool


def plain_norm_projection(
    action: SemigroupAction,
    restarts: int = cbnorm.DEFAULT_RESTARTS,
    seed: int = 0,
    slack: float = 1e-6,
    **kwargs,
) -> PlainNormResult:
    """Projection with ||P|| <= sup_s ||alpha_s|| in the plain operator norm.

    The norm of P is estimated by the alternating search at amplification
    level 1 (a lower estimate that is numerically sharp at desk scale); the
    cap uses the conjugation formula ||rho|| ||rho^{-1}|| when the action is
    a conjugation, else the per-element plain-norm search. Since P averages
    the alpha_s with convex weights, the cb upper bound also certifies the
    plain bound whenever it is below the cap.
    """
    kind = action.semigroup.kind
    if kind in ("finite_group", "cyclic"):
        report = average_uniform(action, restarts=restarts, seed=seed, **kwargs)
    elif kind == "circle":
        from .averaging import average_circle

        report = average_circle(action, restarts=restarts, seed=seed, **kwargs)
    else:
        report = average_ergodic(action, restarts=restarts, seed=seed, **kwargs)
    if action.rep:
        cap = max(
            op_norm(m) * op_norm(np.linalg.inv(m)) for m in action.rep
        )
    elif kind == "circle":
        cap = 1.0
    else:
        cap = max(
            cbnorm.plain_norm_lower(g, restarts=restarts, seed=seed)[0]
            for g in action.generator_superops()
        )
    estimate, _ = cbnorm.plain_norm_lower(report.p, restarts=restarts, seed=seed)
    ok = estimate <= cap + slack
    return PlainNormResult(
        report=report,
        plain_norm_estimate=float(estimate),
        plain_norm_cap=float(cap),
        bound_ok=bool(ok),
    )
