"""Completely bounded norm with certified upper and lower bounds.

Upper bound: the completely bounded (spectral) norm of Phi equals the
completely bounded trace norm (diamond norm) of its Hilbert-Schmidt adjoint,
and the latter has an exact semidefinite characterization in terms of the
Choi matrix J of the adjoint:

    ||Phi||_cb = min  (||tr_out Y0|| + ||tr_out Y1||) / 2
                 s.t. [[Y0, -J], [-J^H, Y1]] >= 0,

with Y0, Y1 Hermitian on the input (x) output space of the adjoint and
tr_out the partial trace over its output factor. The solved (Y0, Y1) pair is
post-shifted so the block matrix is PSD to machine precision, which makes
the returned value a genuine upper bound independent of solver tolerance.

Lower bound: alternating maximization of ||(id_n (x) Phi)(x)|| over the unit
ball ||x|| <= 1; each iterate alternates between the top singular pair of the
image and the polar factor of the pulled-back gradient, so the value is
monotone nondecreasing and any iterate is a valid witness. Amplification
level n = out_dim saturates the supremum (Smith), which is the default.

For completely positive maps ||Phi||_cb = ||Phi(I)|| gives an exact
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotCompletelyPositiveError, VerificationError
from .linalg import op_norm, random_complex, svd
from .sdp import SdpProblem, SdpSolution, solve_sdp
from .superop import SuperOp, is_cp

DEFAULT_SDP_TOL = 1e-6
DEFAULT_RESTARTS = 8


@dataclass(frozen=True)
class CbUpperResult:
    """Certified upper bound with its feasible dual pair."""

    value: float
    y0: np.ndarray = field(repr=False)
    y1: np.ndarray = field(repr=False)
    iterations: int = 0
    rel_gap: float = 0.0


@dataclass(frozen=True)
class CbNormResult:
    """Two-sided cb-norm estimate.

    Invariants enforced on construction: lower <= upper + 1e-6; the witness
    has operator norm <= 1 + 1e-9.
    """

    lower: float
    upper: float
    witness: np.ndarray = field(repr=False)
    dual_certificate: tuple[np.ndarray, np.ndarray] = field(repr=False)
    amplification: int = 1
    iterations: int = 0

    def __post_init__(self):
        if self.lower > self.upper + 1e-6:
            raise VerificationError(
                f"cb-norm bounds crossed: lower {self.lower} > upper {self.upper}"
            )
        if self.witness.size and op_norm(self.witness) > 1 + 1e-9:
            raise VerificationError("cb-norm witness exceeds the unit ball")


def ptrace_out(y: np.ndarray, a: int, b: int) -> np.ndarray:
    """Partial trace over the second tensor factor of M_a (x) M_b."""
    return np.einsum("isjs->ij", y.reshape(a, b, a, b))


def _hermitian_param_count(n: int) -> int:
    return n * n


def _diamond_problem(j: np.ndarray, a: int, b: int) -> SdpProblem:
    """LMI data for the diamond-norm SDP of a map with Choi j in M_a (x) M_b.

    Variable order: Y0 params (n^2), Y1 params (n^2), t0, t1 where n = a*b.
    Blocks: [a] t0*I - tr_out Y0, [a] t1*I - tr_out Y1, [2n] the J block.
    """
    n = a * b
    m = 2 * n * n + 2
    objective = np.zeros(m)
    objective[-2] = 0.5
    objective[-1] = 0.5

    f0 = []
    for p in range(n):
        for q in range(n):
            if j[p, q] != 0:
                f0.append((2, p, n + q, -j[p, q]))

    def y_param_entries(which: int):
        """Entry lists for the n^2 Hermitian parameters of Y_which."""
        off = which * n  # corner offset inside the big block
        blk = which  # partial-trace epigraph block
        out = []
        for p in range(n):
            i, s = divmod(p, b)
            out.append(((2, off + p, off + p, 1.0), (blk, i, i, -1.0)))
            for q in range(p + 1, n):
                i2, s2 = divmod(q, b)
                real_entries = [(2, off + p, off + q, 1.0)]
                imag_entries = [(2, off + p, off + q, 1.0j)]
                if s == s2:
                    lo, hi = min(i, i2), max(i, i2)
                    real_entries.append((blk, lo, hi, -1.0))
                    # tr_out of the imaginary unit matrix is i(E_{i i2}-E_{i2 i})
                    imag_entries.append(
                        (blk, lo, hi, -1.0j if i < i2 else 1.0j)
                    )
                out.append(tuple(real_entries))
                out.append(tuple(imag_entries))
        return out

    constraints: list[tuple] = []
    constraints += y_param_entries(0)
    constraints += y_param_entries(1)
    constraints.append(tuple((0, r, r, 1.0) for r in range(a)))  # t0
    constraints.append(tuple((1, r, r, 1.0) for r in range(a)))  # t1
    return SdpProblem(
        block_dims=(a, a, 2 * n),
        objective=objective,
        f0_entries=tuple(f0),
        constraint_entries=tuple(constraints),
    )


def _y_from_params(u: np.ndarray, n: int, which: int) -> np.ndarray:
    off = which * n * n
    y = np.zeros((n, n), dtype=complex)
    pos = off
    for p in range(n):
        y[p, p] = u[pos]
        pos += 1
        for q in range(p + 1, n):
            y[p, q] += u[pos] + 1j * u[pos + 1]
            y[q, p] += u[pos] - 1j * u[pos + 1]
            pos += 2
    return y


def diamond_norm_upper(psi: SuperOp, tol: float = DEFAULT_SDP_TOL) -> CbUpperResult:
    """Certified upper bound on the diamond norm of psi via the Choi SDP."""
    a, b = psi.in_dim, psi.out_dim
    j = psi.choi
    scale = op_norm(j) if j.any() else 0.0
    n = a * b
    if scale == 0.0:
        z = np.zeros((n, n), dtype=complex)
        return CbUpperResult(0.0, z, z, 0, 0.0)
    problem = _diamond_problem(j / scale, a, b)
    sol: SdpSolution = solve_sdp(problem, tol=min(tol, 1e-7) / 10)
    y0 = _y_from_params(sol.u, n, 0) * scale
    y1 = _y_from_params(sol.u, n, 1) * scale
    big = np.block([[y0, -j], [-j.conj().T, y1]])
    lam_min = float(np.linalg.eigvalsh(0.5 * (big + big.conj().T))[0])
    if lam_min < 0:
        y0 = y0 + (-lam_min) * np.eye(n)
        y1 = y1 + (-lam_min) * np.eye(n)
    value = 0.5 * (
        float(np.linalg.eigvalsh(ptrace_out(y0, a, b))[-1])
        + float(np.linalg.eigvalsh(ptrace_out(y1, a, b))[-1])
    )
    return CbUpperResult(value, y0, y1, sol.iterations, sol.rel_gap)


def cb_norm_upper(phi: SuperOp, tol: float = DEFAULT_SDP_TOL) -> CbUpperResult:
    """Upper bound on ||phi||_cb (= diamond norm of the HS adjoint)."""
    if not 1e-8 <= tol <= 1e-4:
        raise ValueError("tol must lie in [1e-8, 1e-4]")
    return diamond_norm_upper(phi.adjoint(), tol)


def _polar_unitary(g: np.ndarray) -> np.ndarray:
    u, _, v = svd(g)
    return u @ v.conj().T


def op_norm_search(
    psi: SuperOp,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    max_iterations: int = 500,
    rtol: float = 1e-13,
) -> tuple[float, np.ndarray]:
    """Alternating maximization of ||psi(x)|| over ||x|| <= 1.

    Deterministic given the seed. Restart 0 starts from the polar factor of
    the dominant Hilbert-Schmidt input; later restarts are seeded Ginibre
    polars. Returns (value, witness); the value never exceeds the true
    induced norm.
    """
    d = psi.in_dim
    rng = np.random.default_rng(seed)
    best_val, best_x = -np.inf, np.eye(d, dtype=complex)
    for r in range(max(1, restarts)):
        if r == 0:
            _, _, v = svd(psi.natural)
            x = _polar_unitary(v[:, 0].reshape(d, d, order="F"))
        else:
            x = _polar_unitary(random_complex(rng, d, d))
        prev = -np.inf
        for _ in range(max_iterations):
            y = psi.apply(x)
            u, s, v = svd(y)
            val = float(s[0])
            if val <= prev * (1 + rtol) and val >= prev * (1 - rtol):
                break
            prev = val
            grad = psi.adjoint().apply(np.outer(u[:, 0], v[:, 0].conj()))
            if not grad.any():
                break
            x = _polar_unitary(grad)
        val = float(op_norm(psi.apply(x)))
        if val > best_val:
            best_val, best_x = val, x
    return best_val, best_x


def cb_norm_lower(
    phi: SuperOp,
    n: int | None = None,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> tuple[float, np.ndarray]:
    """Lower bound on ||phi||_cb from the amplification level n (default k)."""
    if n is None:
        n = phi.out_dim
    if n < 1:
        raise ValueError("amplification level must be >= 1")
    value, witness = op_norm_search(phi.amplify(n), restarts=restarts, seed=seed)
    return value, witness


def cb_norm_cp(phi: SuperOp, tol: float = 1e-9) -> float:
    """||phi||_cb = ||phi(I)|| for completely positive phi."""
    if not is_cp(phi, tol=tol):
        raise NotCompletelyPositiveError("not completely positive")
    return op_norm(phi.apply(np.eye(phi.in_dim)))


def plain_norm_lower(
    phi: SuperOp, restarts: int = DEFAULT_RESTARTS, seed: int = 0
) -> tuple[float, np.ndarray]:
    """Estimate of the plain induced operator norm (amplification level 1)."""
    return op_norm_search(phi, restarts=restarts, seed=seed)


def cb_norm(
    phi: SuperOp,
    tol: float = DEFAULT_SDP_TOL,
    n: int | None = None,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> CbNormResult:
    """Two-sided cb-norm computation; see CbNormResult for the invariants."""
    upper = cb_norm_upper(phi, tol=tol)
    lower, witness = cb_norm_lower(phi, n=n, restarts=restarts, seed=seed)
    return CbNormResult(
        lower=lower,
        upper=upper.value,
        witness=witness,
        dual_certificate=(upper.y0, upper.y1),
        amplification=phi.out_dim if n is None else n,
        iterations=upper.iterations,
    )
