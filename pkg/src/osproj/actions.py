"""Semigroup descriptions and their actions on matrix spaces.

Supported semigroup kinds: finite groups (explicit multiplication table or
exact permutation closure), cyclic groups, the circle group acting by
diagonal-unitary conjugation with integer weights, and free commuting
monoids N^d given by d commuting generator superoperators.

An action packages the semigroup, the space dimension d and the assignment
s -> alpha_s, together with a cached upper estimate `norm_cap` of
sup_s ||alpha_s||_cb. Construction validates the semigroup axioms, the
homomorphism property of the assignment and (for N^d) a power-boundedness
probe; uniform boundedness beyond the probe horizon is the caller's
hypothesis, not a theorem checked here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import cbnorm
from .errors import HomomorphismError, IllConditionedError, PowerBoundError, ShapeError
from .linalg import as_cmatrix, op_norm
from .superop import SuperOp, conjugation, identity, is_cp, similarity

FINITE_GROUP = "finite_group"
CYCLIC = "cyclic"
CIRCLE = "circle"
FREE_MONOID = "free_monoid_commuting"

CLOSURE_CAP = 10_000
FULL_TABLE_CHECK_CAP = 512
DEFAULT_PROBE_HORIZON = 256
DEFAULT_POWER_CAP = 1e8


@dataclass(frozen=True)
class SemigroupDesc:
    """Description of the acting semigroup.

    For finite groups `elements` are labels and `table[i, j]` is the index of
    elements[i] * elements[j]; identity and inverses are located and checked
    on construction. Cyclic groups carry only their order; the circle and
    N^d kinds carry generator labels.
    """

    kind: str
    elements: tuple[str, ...] = ()
    table: np.ndarray | None = field(default=None, repr=False)
    order: int = 0
    generators: tuple[str, ...] = ()
    identity_index: int = -1
    inverse: tuple[int, ...] = ()

    def element_index(self, label: str) -> int:
        return self.elements.index(label)


def finite_group_desc(elements, table) -> SemigroupDesc:
    """Finite group from an explicit label list and multiplication table.

    `table` may hold labels or element indices. Associativity is checked in
    full (vectorized) up to 512 elements; identity and inverses always.
    """
    elements = tuple(str(e) for e in elements)
    n = len(elements)
    if n == 0:
        raise ValueError("group needs at least one element")
    if len(set(elements)) != n:
        raise ValueError("duplicate element labels")
    t = np.asarray(table)
    if t.shape != (n, n):
        raise ValueError(f"table must be {n}x{n}")
    if t.dtype.kind in "US":
        index = {e: i for i, e in enumerate(elements)}
        try:
            t = np.array([[index[str(v)] for v in row] for row in t], dtype=int)
        except KeyError as exc:
            raise ValueError(f"table entry {exc} is not an element") from None
    t = t.astype(int)
    if t.min() < 0 or t.max() >= n:
        raise ValueError("table indices out of range")
    if n > FULL_TABLE_CHECK_CAP:
        raise ValueError(
            f"explicit tables above {FULL_TABLE_CHECK_CAP} elements are not "
            "supported; use the permutation closure constructor"
        )
    if not np.array_equal(t[t, :], t[:, t]):
        raise ValueError("multiplication table is not associative")
    ident = [e for e in range(n) if np.array_equal(t[e], np.arange(n))
             and np.array_equal(t[:, e], np.arange(n))]
    if not ident:
        raise ValueError("multiplication table has no identity")
    e0 = ident[0]
    inverse = np.full(n, -1, dtype=int)
    for i in range(n):
        hits = np.flatnonzero(t[i] == e0)
        if hits.size == 0 or t[hits[0], i] != e0:
            raise ValueError(f"element {elements[i]!r} has no inverse")
        inverse[i] = hits[0]
    return SemigroupDesc(
        kind=FINITE_GROUP,
        elements=elements,
        table=t,
        order=n,
        generators=elements,
        identity_index=e0,
        inverse=tuple(int(v) for v in inverse),
    )


def finite_group_from_permutations(perm_generators) -> tuple[SemigroupDesc, dict[str, tuple[int, ...]]]:
    """Close a set of permutations (tuples) into a group by exact bookkeeping.

    Labels are the permutation tuples themselves; no floating point is
    involved. Raises beyond the 10,000-element cap.
    """
    gens = [tuple(int(v) for v in p) for p in perm_generators]
    if not gens:
        raise ValueError("need at least one generator")
    npts = len(gens[0])
    if any(len(p) != npts or sorted(p) != list(range(npts)) for p in gens):
        raise ValueError("generators must be permutations of 0..n-1")
    ident = tuple(range(npts))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(p[g[i]] for i in range(npts))
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        if len(seen) > CLOSURE_CAP:
            raise ValueError(f"closure exceeds the {CLOSURE_CAP}-element cap")
        frontier = nxt
    perms = sorted(seen)
    label = {p: str(p) for p in perms}
    index = {p: i for i, p in enumerate(perms)}
    table = np.array(
        [[index[tuple(p[q[i]] for i in range(npts))] for q in perms] for p in perms],
        dtype=int,
    )
    desc = finite_group_desc([label[p] for p in perms], table)
    return desc, {label[p]: p for p in perms}


def cyclic_desc(n: int) -> SemigroupDesc:
    if n < 1:
        raise ValueError("cyclic order must be >= 1")
    return SemigroupDesc(
        kind=CYCLIC,
        elements=tuple(f"g^{k}" for k in range(n)),
        order=n,
        generators=("g^1",) if n > 1 else ("g^0",),
        identity_index=0,
        inverse=tuple((-k) % n for k in range(n)),
    )


def circle_desc() -> SemigroupDesc:
    return SemigroupDesc(kind=CIRCLE, generators=("theta",))


def free_monoid_desc(num_generators: int, labels=None) -> SemigroupDesc:
    if num_generators < 1:
        raise ValueError("free monoid needs >= 1 generator")
    gens = tuple(labels) if labels else tuple(f"a{i}" for i in range(num_generators))
    if len(gens) != num_generators:
        raise ValueError("label count mismatch")
    return SemigroupDesc(kind=FREE_MONOID, generators=gens)


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SemigroupAction:
    """A semigroup acting on M_dim by completely bounded maps.

    `superops` is aligned with `semigroup.elements` for finite kinds and with
    `semigroup.generators` for N^d; circle actions carry integer `weights`
    instead. `norm_cap` is an upper estimate of sup_s ||alpha_s||_cb (exact
    for conjugation and circle actions). `rep` keeps the representing
    matrices when the action is a conjugation, `unitary` records whether they
    are all unitary (in which case every alpha_s is a *-automorphism).
    """

    semigroup: SemigroupDesc
    dim: int
    superops: tuple[SuperOp, ...] = ()
    weights: np.ndarray | None = field(default=None, repr=False)
    norm_cap: float = 1.0
    rep: tuple[np.ndarray, ...] = field(default=(), repr=False)
    unitary: bool = False
    probe_horizon: int = 0
    probe_sup: float = 0.0
    monoid_dual_without_inverse: bool = False

    # -- evaluation --------------------------------------------------------

    def superop(self, label: str) -> SuperOp:
        """alpha_s for a finite-kind element label."""
        if self.semigroup.kind not in (FINITE_GROUP, CYCLIC):
            raise ValueError(f"no per-element superops for kind {self.semigroup.kind}")
        return self.superops[self.semigroup.element_index(label)]

    def at_angle(self, theta: float) -> SuperOp:
        """alpha_theta for a circle action."""
        if self.semigroup.kind != CIRCLE:
            raise ValueError("at_angle only applies to circle actions")
        return conjugation(np.diag(np.exp(1j * self.weights * theta)))

    def generator_superops(self) -> tuple[SuperOp, ...]:
        """A finite generating family (all elements for finite groups)."""
        if self.semigroup.kind in (FINITE_GROUP, CYCLIC):
            return self.superops
        if self.semigroup.kind == FREE_MONOID:
            return self.superops
        raise ValueError("circle actions have no finite generator family")

    def frequency_matrix(self) -> np.ndarray:
        """w_i - w_j table of a circle action (entry (i,j) rotation speed)."""
        if self.semigroup.kind != CIRCLE:
            raise ValueError("frequency_matrix only applies to circle actions")
        return self.weights[:, None] - self.weights[None, :]


def _check_rep_homomorphism(desc: SemigroupDesc, mats: list[np.ndarray], tol: float):
    n = len(desc.elements)
    scale = max(op_norm(m) for m in mats)
    limit = min(n, FULL_TABLE_CHECK_CAP)
    for i in range(limit):
        for j in range(limit):
            prod = mats[i] @ mats[j]
            target = mats[desc.table[i, j]]
            if op_norm(prod - target) > tol * max(1.0, scale * scale):
                raise HomomorphismError(
                    f"rep is not a homomorphism: rep[{desc.elements[i]}] @ "
                    f"rep[{desc.elements[j]}] != rep[{desc.elements[desc.table[i, j]]}]"
                )


def _product_index(desc: SemigroupDesc, i: int, j: int) -> int:
    if desc.table is not None:
        return int(desc.table[i, j])
    if desc.kind == CYCLIC:
        return (i + j) % desc.order
    raise ValueError(f"no product structure for kind {desc.kind}")


def _check_superop_homomorphism(desc: SemigroupDesc, ops: list[SuperOp], tol: float):
    scale = max(op_norm(o.natural) for o in ops)
    n = len(ops)
    for i in range(min(n, FULL_TABLE_CHECK_CAP)):
        for j in range(min(n, FULL_TABLE_CHECK_CAP)):
            resid = op_norm(
                ops[i].natural @ ops[j].natural - ops[_product_index(desc, i, j)].natural
            )
            if resid > tol * max(1.0, scale * scale):
                raise HomomorphismError(
                    f"action is not a homomorphism at pair "
                    f"({desc.elements[i]}, {desc.elements[j]}), residual {resid:.3e}"
                )


def build_conjugation_action(
    semigroup: SemigroupDesc, rep, tol: float = 1e-10
) -> SemigroupAction:
    """Action alpha_g = rep(g) . rep(g)^{-1} of a finite/cyclic group.

    `rep` maps element labels to invertible matrices (dict, or a sequence
    aligned with the element order). Unitary representations are detected
    and give norm_cap exactly 1; otherwise norm_cap is the largest condition
    number, which equals ||Ad_rho||_cb for invertible conjugations.
    """
    if semigroup.kind not in (FINITE_GROUP, CYCLIC):
        raise ValueError("conjugation actions need a finite or cyclic group")
    labels = semigroup.elements
    if isinstance(rep, dict):
        mats = [as_cmatrix(rep[lab]) for lab in labels]
    else:
        mats = [as_cmatrix(m) for m in rep]
        if len(mats) != len(labels):
            raise ValueError("rep length must match the element count")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise ShapeError("all representing matrices must be d x d")
    if semigroup.kind == FINITE_GROUP:
        _check_rep_homomorphism(semigroup, mats, tol)
    else:
        g = mats[1] if semigroup.order > 1 else mats[0]
        gnorm = max(1.0, op_norm(g))
        for k, m in enumerate(mats):
            expected = np.linalg.matrix_power(g, k)
            if op_norm(m - expected) > tol * gnorm ** max(k, 1):
                raise HomomorphismError(f"cyclic rep is not g^{k} at index {k}")
        n = semigroup.order
        if op_norm(np.linalg.matrix_power(g, n) - np.eye(d)) > tol * gnorm ** n:
            raise HomomorphismError(f"cyclic rep generator does not have order {n}")
    conds = []
    unitary = True
    for m in mats:
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] <= 0 or s[0] / s[-1] > 1e8:
            raise IllConditionedError(
                f"representing matrix has condition number above 1e8"
            )
        conds.append(s[0] / s[-1])
        if op_norm(m @ m.conj().T - np.eye(d)) > 1e-10:
            unitary = False
    ops = tuple(
        conjugation(m) if unitary else similarity(m) for m in mats
    )
    return SemigroupAction(
        semigroup=semigroup,
        dim=d,
        superops=ops,
        norm_cap=1.0 if unitary else float(max(conds)),
        rep=tuple(mats),
        unitary=unitary,
    )


def build_superop_action(
    semigroup: SemigroupDesc,
    superops,
    tol: float = 1e-10,
    cb_tol: float = 1e-6,
) -> SemigroupAction:
    """Finite-group action from explicit per-element superoperators.

    norm_cap is the maximum per-element SDP upper bound, per Definition of
    uniform complete boundedness.
    """
    if semigroup.kind not in (FINITE_GROUP, CYCLIC):
        raise ValueError("per-element superop actions need a finite group")
    if isinstance(superops, dict):
        ops = [superops[lab] for lab in semigroup.elements]
    else:
        ops = list(superops)
    if len(ops) != len(semigroup.elements):
        raise ValueError("superop count must match the element count")
    d = ops[0].in_dim
    if any(o.in_dim != d or o.out_dim != d for o in ops):
        raise ShapeError("all superops must act on the same M_d")
    _check_superop_homomorphism(semigroup, ops, tol)
    cap = max(cbnorm.cb_norm_upper(o, tol=cb_tol).value for o in ops)
    return SemigroupAction(
        semigroup=semigroup, dim=d, superops=tuple(ops), norm_cap=float(cap)
    )


def build_cyclic_action(generator: SuperOp, order: int, tol: float = 1e-10,
                        cb_tol: float = 1e-6) -> SemigroupAction:
    """Cyclic group action generated by one superoperator of finite order."""
    desc = cyclic_desc(order)
    ops = [identity(generator.in_dim)]
    for _ in range(order - 1):
        ops.append(generator.compose(ops[-1]))
    closure = generator.compose(ops[-1])
    if op_norm(closure.natural - np.eye(generator.in_dim ** 2)) > tol * max(
        1.0, op_norm(generator.natural) ** order
    ):
        raise HomomorphismError(f"generator does not have order {order}")
    return build_superop_action(desc, ops, tol=tol, cb_tol=cb_tol)


def build_circle_action(weights, dim: int | None = None) -> SemigroupAction:
    """Circle group acting by Ad(diag(e^{i w_j theta})); norm_cap = 1."""
    w = np.asarray(weights, dtype=int)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty integer vector")
    if np.abs(w).max() > 64:
        raise ValueError("|weights| must be <= 64")
    if dim is not None and dim != w.size:
        raise ShapeError("dim must equal the weight count")
    return SemigroupAction(
        semigroup=circle_desc(),
        dim=int(w.size),
        weights=w.copy(),
        norm_cap=1.0,
        unitary=True,
    )


def _probe_power_bound(op: SuperOp, horizon: int, cap: float) -> float:
    k = np.eye(op.in_dim ** 2, dtype=complex)
    sup = 1.0
    for _ in range(horizon):
        k = op.natural @ k
        s = op_norm(k)
        sup = max(sup, s)
        if s > cap:
            raise PowerBoundError(
                f"not power-bounded up to horizon: ||alpha^m|| reached {s:.3e}"
            )
    return sup


def build_free_monoid_action(
    generators,
    tol: float = 1e-10,
    horizon: int = DEFAULT_PROBE_HORIZON,
    power_cap: float = DEFAULT_POWER_CAP,
    cb_tol: float = 1e-6,
) -> SemigroupAction:
    """N^d action from d pairwise commuting, power-bounded generators.

    Power-boundedness is probed (sup_m ||alpha^m|| up to the horizon), not
    proved; the probe results are recorded on the action. norm_cap multiplies
    per-generator suprema of cb estimates over probed powers (CP shortcut
    where available, SDP otherwise on a shortened horizon).
    """
    ops = [g if isinstance(g, SuperOp) else SuperOp(g) for g in generators]
    if not ops:
        raise ValueError("need at least one generator")
    d = ops[0].in_dim
    if any(o.in_dim != d or o.out_dim != d for o in ops):
        raise ShapeError("generators must act on one M_d")
    scale = max(1.0, max(op_norm(o.natural) for o in ops) ** 2)
    for a, b in itertools.combinations(range(len(ops)), 2):
        resid = op_norm(
            ops[a].natural @ ops[b].natural - ops[b].natural @ ops[a].natural
        )
        if resid > tol * scale:
            raise HomomorphismError(
                f"generators {a} and {b} do not commute (residual {resid:.3e})"
            )
    sup = 1.0
    for o in ops:
        sup = max(sup, _probe_power_bound(o, horizon, power_cap))
    cap = 1.0
    for o in ops:
        gen_cap = 1.0
        power = identity(d)
        for _ in range(min(horizon, 64)):
            power = o.compose(power)
            if is_cp(power, tol=1e-9):
                gen_cap = max(gen_cap, cbnorm.cb_norm_cp(power))
            else:
                gen_cap = max(gen_cap, cbnorm.cb_norm_upper(power, tol=cb_tol).value)
        cap *= gen_cap
    return SemigroupAction(
        semigroup=free_monoid_desc(len(ops)),
        dim=d,
        superops=tuple(ops),
        norm_cap=float(cap),
        probe_horizon=horizon,
        probe_sup=float(sup),
    )


def dual_action(action: SemigroupAction) -> SemigroupAction:
    """The action beta_g = dual_of(alpha_{g^{-1}}) on functionals.

    For group kinds the inverse is used, per the definition of the dual
    action on forms; for N^d (no inverses) the plain elementwise dual is
    returned and flagged, since the theorem's beta requires g^{-1}.
    """
    desc = action.semigroup
    if desc.kind in (FINITE_GROUP, CYCLIC):
        ops = tuple(
            action.superops[desc.inverse[i]].dual() for i in range(len(desc.elements))
        )
        return SemigroupAction(
            semigroup=desc,
            dim=action.dim,
            superops=ops,
            norm_cap=action.norm_cap,
            unitary=action.unitary,
        )
    if desc.kind == CIRCLE:
        return SemigroupAction(
            semigroup=desc,
            dim=action.dim,
            weights=-action.weights,
            norm_cap=1.0,
            unitary=True,
        )
    if desc.kind == FREE_MONOID:
        return SemigroupAction(
            semigroup=desc,
            dim=action.dim,
            superops=tuple(o.dual() for o in action.superops),
            norm_cap=action.norm_cap,
            probe_horizon=action.probe_horizon,
            probe_sup=action.probe_sup,
            monoid_dual_without_inverse=True,
        )
    raise ValueError(f"unknown semigroup kind {desc.kind}")


# ---------------------------------------------------------------------------
# Coefficient functions f_{x,psi}(s) = <psi, alpha_s(x)>
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientSample:
    """Finite sample of one coefficient function of the action.

    The pairing is the package-wide bilinear trace pairing
    <psi, y> = tr(psi^T y). Left shifts act on samples by s -> t s and
    satisfy L_t f_{x,psi} = f_{x, (alpha_t)^* psi}.
    """

    action: SemigroupAction
    x: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    samples: dict[str, complex] = field(repr=False)

    @staticmethod
    def build(action: SemigroupAction, x, psi) -> "CoefficientSample":
        if action.semigroup.kind not in (FINITE_GROUP, CYCLIC):
            raise ValueError("coefficient samples need a finite semigroup")
        xm, pm = as_cmatrix(x), as_cmatrix(psi)
        samples = {
            lab: complex(np.trace(pm.T @ action.superop(lab).apply(xm)))
            for lab in action.semigroup.elements
        }
        return CoefficientSample(action, xm, pm, samples)

    def shifted(self, t_label: str) -> dict[str, complex]:
        """Samples of L_t f: s -> f(t s)."""
        desc = self.action.semigroup
        ti = desc.element_index(t_label)
        out = {}
        for lab in desc.elements:
            si = desc.element_index(lab)
            if desc.kind == FINITE_GROUP:
                ts = desc.elements[desc.table[ti, si]]
            else:
                ts = desc.elements[(ti + si) % desc.order]
            out[lab] = self.samples[ts]
        return out
