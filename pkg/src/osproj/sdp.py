"""Self-contained primal-dual SDP solver for small dense Hermitian problems.

Problem form (linear matrix inequality over a product of Hermitian PSD
cones):

    minimize    objective . u                       (u in R^m)
    subject to  F(u) = F0 + sum_j u_j Fj  >= 0      (block-diagonal PSD)

Internally this is the dual side of the standard conic pair

    (P) min <C, X>  s.t. <A_i, X> = b_i,  X >= 0
    (D) max b.y     s.t. C - sum_i y_i A_i = S >= 0

with C = F0, A_i = -F_i, b = -objective, so that S = F(u) and the LMI value
equals -b.y at the optimum. The method is Nesterov-Todd scaled path
following with a Mehrotra predictor-corrector step, dense per block.
Everything is deterministic: fixed iteration order, no randomization, no
pivot heuristics beyond LAPACK's deterministic factorizations.

Accuracy is governed by the relative duality gap and feasibility residuals;
the solver raises SdpError with residual diagnostics when it fails to reach
the requested tolerance within the iteration budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import SdpError

Entry = tuple[int, int, int, complex]  # (block, row, col<=row allowed either way, value)


@dataclass(frozen=True)
class SdpProblem:
    """LMI-form SDP data.

    Constraint matrices are given by sparse upper-triangle entries
    (block, r, c, v) with r <= c; the Hermitian completion F[c, r] = conj(v)
    is implied, and diagonal entries must be real within 1e-12.
    """

    block_dims: tuple[int, ...]
    objective: np.ndarray
    f0_entries: tuple[Entry, ...]
    constraint_entries: tuple[tuple[Entry, ...], ...] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "objective", np.asarray(self.objective, dtype=float)
        )
        if self.objective.ndim != 1:
            raise ValueError("objective must be a vector")
        if len(self.constraint_entries) != self.objective.size:
            raise ValueError("one entry list per objective coordinate required")
        for entries in (self.f0_entries, *self.constraint_entries):
            for blk, r, c, v in entries:
                if not (0 <= blk < len(self.block_dims)):
                    raise ValueError(f"bad block index {blk}")
                n = self.block_dims[blk]
                if not (0 <= r <= c < n):
                    raise ValueError(f"entry ({r},{c}) outside upper triangle of {n}")
                if r == c and abs(complex(v).imag) > 1e-12:
                    raise ValueError("diagonal entries must be real (Hermitian)")

    @property
    def num_vars(self) -> int:
        return int(self.objective.size)


@dataclass
class SdpSolution:
    u: np.ndarray
    value: float
    iterations: int
    rel_gap: float
    primal_infeas: float
    dual_infeas: float
    s_blocks: list[np.ndarray]
    x_blocks: list[np.ndarray]


def _blocks_from_entries(dims, entries) -> list[np.ndarray]:
    out = [np.zeros((n, n), dtype=complex) for n in dims]
    for blk, r, c, v in entries:
        out[blk][r, c] += v
        if r != c:
            out[blk][c, r] += np.conj(v)
        else:
            out[blk][r, c] = out[blk][r, c].real
    return out


def _vec_cat(blocks) -> np.ndarray:
    return np.concatenate([b.ravel() for b in blocks])


class _BlockOps:
    """Precomputed linear maps between R^m and the Hermitian block space."""

    def __init__(self, problem: SdpProblem):
        self.dims = problem.block_dims
        self.offsets = np.cumsum([0] + [n * n for n in self.dims])
        m = problem.num_vars
        rows, cols, vals = [], [], []
        for j, entries in enumerate(problem.constraint_entries):
            for blk, r, c, v in entries:
                n = self.dims[blk]
                base = self.offsets[blk]
                rows.append(j)
                cols.append(base + r * n + c)
                vals.append(-v)  # A_i = -F_i
                if r != c:
                    rows.append(j)
                    cols.append(base + c * n + r)
                    vals.append(-np.conj(v))
        self.bmat = sp.csr_matrix(
            (np.asarray(vals, dtype=complex), (rows, cols)),
            shape=(m, int(self.offsets[-1])),
        )
        self.bmat_conj = self.bmat.conj().tocsr()
        self.bmat_t = self.bmat.T.tocsr()

    def split(self, flat: np.ndarray) -> list[np.ndarray]:
        return [
            flat[self.offsets[i]: self.offsets[i + 1]].reshape(n, n)
            for i, n in enumerate(self.dims)
        ]

    def inner(self, blocks) -> np.ndarray:
        """[<A_i, X>]_i = Re(conj(B) vec(X))."""
        return np.real(self.bmat_conj @ _vec_cat(blocks))

    def adjoint(self, y: np.ndarray) -> list[np.ndarray]:
        """sum_i y_i A_i as Hermitian blocks."""
        return self.split(self.bmat_t @ y.astype(complex))


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _chol(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        n = a.shape[0]
        bump = 1e-14 * max(1.0, float(np.trace(a).real) / max(n, 1))
        return np.linalg.cholesky(_herm(a) + bump * 10 * np.eye(n))


def _nt_scaling(x: np.ndarray, s: np.ndarray):
    """NT scaling point W (W S W = X) via the SDPT3 factor recipe."""
    lx = _chol(x)
    ls = _chol(s)
    u_, sig, _vh = np.linalg.svd(ls.conj().T @ lx)
    g = lx @ _vh.conj().T / np.sqrt(sig)
    w = g @ g.conj().T
    winv_fac = ls @ u_ / np.sqrt(sig)
    winv = winv_fac @ winv_fac.conj().T
    return _herm(w), _herm(winv)


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """sup {alpha : x + alpha dx >= 0} for Hermitian x > 0."""
    l = _chol(x)
    y = np.linalg.solve(l, np.linalg.solve(l, dx.conj().T).conj().T)
    lam = float(np.linalg.eigvalsh(_herm(y))[0])
    return np.inf if lam >= 0 else -1.0 / lam


def solve_sdp(
    problem: SdpProblem,
    tol: float = 1e-9,
    max_iterations: int = 100,
    step_frac: float = 0.98,
) -> SdpSolution:
    """Solve the LMI-form SDP; see the module docstring for the method."""
    dims = problem.block_dims
    m = problem.num_vars
    ntot = sum(dims)
    ops = _BlockOps(problem)
    c_blocks = _blocks_from_entries(dims, problem.f0_entries)  # C = F0
    b = -problem.objective

    data_scale = max(
        [1.0]
        + [float(np.abs(bb).max()) for bb in c_blocks if bb.size]
        + [float(np.abs(b).max()) if m else 1.0]
    )
    eta = max(10.0, np.sqrt(ntot), data_scale)
    x = [eta * np.eye(n, dtype=complex) for n in dims]
    s = [eta * np.eye(n, dtype=complex) for n in dims]
    y = np.zeros(m)

    bnorm = 1.0 + np.linalg.norm(b)
    cnorm = 1.0 + np.sqrt(sum(np.linalg.norm(cb) ** 2 for cb in c_blocks))

    def residuals():
        rp = b - ops.inner(x)
        aty = ops.adjoint(y)
        rd = [c_blocks[i] - s[i] - aty[i] for i in range(len(dims))]
        return rp, rd

    rel_gap = np.inf
    pinf = dinf = np.inf
    it = 0
    for it in range(1, max_iterations + 1):
        rp, rd = residuals()
        gap = sum(np.real(np.trace(x[i] @ s[i])) for i in range(len(dims)))
        mu = gap / ntot
        pobj = sum(np.real(np.trace(c_blocks[i] @ x[i])) for i in range(len(dims)))
        dobj = float(b @ y)
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / bnorm
        dinf = np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rd)) / cnorm
        if max(rel_gap, pinf, dinf) <= tol:
            break
        if it == max_iterations:
            raise SdpError(
                "SDP solver did not converge within the iteration budget",
                diagnostics={
                    "iterations": it,
                    "rel_gap": rel_gap,
                    "primal_infeas": pinf,
                    "dual_infeas": dinf,
                },
            )

        w_pairs = [_nt_scaling(x[i], s[i]) for i in range(len(dims))]
        w = [p[0] for p in w_pairs]

        # Schur complement M_ij = <A_i, W A_j W>, assembled columnwise.
        amat = np.empty((m, m))
        unit = np.zeros(m)
        for j in range(m):
            unit[j] = 1.0
            aj = ops.adjoint(unit)
            unit[j] = 0.0
            waw = [w[i] @ aj[i] @ w[i] for i in range(len(dims))]
            amat[:, j] = ops.inner(waw)
        amat = 0.5 * (amat + amat.T)

        try:
            chol_m = np.linalg.cholesky(
                amat + 1e-13 * max(1.0, np.trace(amat) / max(m, 1)) * np.eye(m)
            )
        except np.linalg.LinAlgError as exc:
            raise SdpError(
                "Schur complement not positive definite",
                diagnostics={"iterations": it, "rel_gap": rel_gap},
            ) from exc

        def schur_solve(rhs):
            return np.linalg.solve(
                chol_m.T, np.linalg.solve(chol_m, rhs)
            )

        def direction(r_c):
            rhs = rp - ops.inner(r_c) + ops.inner(
                [w[i] @ rd[i] @ w[i] for i in range(len(dims))]
            )
            dy = schur_solve(rhs)
            ds_ = ops.adjoint(dy)
            ds = [rd[i] - ds_[i] for i in range(len(dims))]
            dx = [_herm(r_c[i] - w[i] @ ds[i] @ w[i]) for i in range(len(dims))]
            return dy, dx, ds

        # Predictor (affine scaling).
        dy_a, dx_a, ds_a = direction([-x[i] for i in range(len(dims))])
        ap = min(1.0, step_frac * min(_max_step(x[i], dx_a[i]) for i in range(len(dims))))
        ad = min(1.0, step_frac * min(_max_step(s[i], ds_a[i]) for i in range(len(dims))))
        gap_aff = sum(
            np.real(np.trace((x[i] + ap * dx_a[i]) @ (s[i] + ad * ds_a[i])))
            for i in range(len(dims))
        )
        sigma = min(1.0, max((max(gap_aff, 0.0) / gap) ** 3, 1e-10))

        # Corrector with second-order term.
        r_c = []
        for i in range(len(dims)):
            s_inv = np.linalg.inv(s[i])
            second = dx_a[i] @ ds_a[i] @ s_inv
            r_c.append(_herm(sigma * mu * s_inv - x[i] - second))
        dy, dx, ds = direction(r_c)

        ap = min(1.0, step_frac * min(_max_step(x[i], dx[i]) for i in range(len(dims))))
        ad = min(1.0, step_frac * min(_max_step(s[i], ds[i]) for i in range(len(dims))))
        x = [_herm(x[i] + ap * dx[i]) for i in range(len(dims))]
        s = [_herm(s[i] + ad * ds[i]) for i in range(len(dims))]
        y = y + ad * dy

    u = y
    return SdpSolution(
        u=u,
        value=float(problem.objective @ u),
        iterations=it,
        rel_gap=float(rel_gap),
        primal_infeas=float(pinf),
        dual_infeas=float(dinf),
        s_blocks=[si.copy() for si in s],
        x_blocks=[xi.copy() for xi in x],
    )
