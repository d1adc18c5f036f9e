"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line (visible with `pytest -s` or on failure)
and asserts the criterion. All scales are desk scale: d <= 8, Choi blocks
<= 128, each criterion within 60 s on one core.
"""

import json

import numpy as np
import pytest

from osproj import actions as ac
from osproj import apps
from osproj import averaging as av
from osproj import cbnorm as cb
from osproj import cli
from osproj import fixedpoints as fp
from osproj import superop as so
from osproj.linalg import null_space, op_norm

from conftest import rand_complex, rng, s3_block_rep, s3_irrep2

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
NONUNITARY = np.array([[1, 1], [0, -1.0]])


def _report_line(criterion, ok, detail):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def _finite_group_cases():
    z2 = ac.build_conjugation_action(ac.cyclic_desc(2), [np.eye(2), PAULI_Z])
    c3 = np.roll(np.eye(3), 1, axis=0)
    z3 = ac.build_conjugation_action(
        ac.cyclic_desc(3), [np.linalg.matrix_power(c3, k) for k in range(3)]
    )
    desc, rep = s3_block_rep()
    s3 = ac.build_conjugation_action(desc, rep)
    return [("Z2 pinching", z2), ("Z3 circulant", z3), ("S3 2+sign", s3)]


def test_criterion_1_finite_group_projection_triple():
    """P^2 = P, Ran P = X^S, cb(P) <= sup cb(alpha) for Z2, Z3, S3."""
    worst = {"idem": 0.0, "angle": 0.0, "cb_excess": -np.inf}
    for name, action in _finite_group_cases():
        report = av.average_uniform(action)
        assert report.idempotency_defect <= 1e-8, name
        assert not report.match.dim_mismatch, name
        assert report.match.angle <= 1e-7, name
        assert report.cb_upper <= report.norm_cap + 1e-4, name
        worst["idem"] = max(worst["idem"], report.idempotency_defect)
        worst["angle"] = max(worst["angle"], report.match.angle)
        worst["cb_excess"] = max(worst["cb_excess"], report.cb_upper - report.norm_cap)
    _report_line(
        1, True,
        f"finite groups: idem<={worst['idem']:.2e} (tol 1e-8), "
        f"angle<={worst['angle']:.2e} (tol 1e-7), "
        f"cb-cap<={worst['cb_excess']:.2e} (tol 1e-4)",
    )


def test_criterion_2_circle_quadrature_exactness():
    """Circle actions: quadrature equals the frequency-zero oracle to 1e-13."""
    worst_entry = 0.0
    worst_double = 0.0
    for weights in ([0, 1], [0, 1, 2]):
        action = ac.build_circle_action(weights)
        freq = action.frequency_matrix()
        threshold = 2 * int(np.abs(freq).max()) + 1
        report = av.average_circle(action, nodes=threshold, compute_cb=False)
        d = action.dim
        # oracle: exact frequency-zero pinching pattern on a random input
        x = rand_complex(rng(2024), d, d)
        expected = np.where(freq == 0, x, 0)
        worst_entry = max(
            worst_entry, np.abs(report.p.apply(x) - expected).max()
        )
        doubled = av.average_circle(action, nodes=2 * threshold, compute_cb=False)
        worst_double = max(
            worst_double, op_norm(report.p.natural - doubled.p.natural)
        )
    ok = worst_entry <= 1e-13 and worst_double <= 1e-13
    _report_line(
        2, ok,
        f"circle quadrature: entrywise<={worst_entry:.2e}, "
        f"doubling<={worst_double:.2e} (tol 1e-13)",
    )


def test_criterion_3_mean_ergodic_cp_fixed_points():
    """Phi = (x + XxX)/2: exact P, CP, contractive, Cesaro O(1/N)."""
    phi = so.from_kraus([np.eye(2) / np.sqrt(2), PAULI_X / np.sqrt(2)])
    report = apps.cp_fixed_projection(phi, horizon=256)
    direct = null_space(phi.natural - np.eye(4))
    span_ix = fp.subspace_match(report.range_basis, direct)
    assert not span_ix.dim_mismatch and span_ix.angle <= 1e-7
    comm = fp.commutant([PAULI_X])
    assert fp.subspace_match(report.range_basis, comm.basis).angle <= 1e-7
    choi_scale = max(1.0, op_norm(report.p.choi))
    assert report.choi_min_eig >= -1e-9 * choi_scale
    cp_norm = cb.cb_norm_cp(report.p)
    assert cp_norm <= 1 + 1e-6
    errors = report.extras["cesaro_errors"]
    c = report.extras["cesaro_fitted_constant"]
    for n in (64, 128, 256):
        assert errors[n] <= c / n + 1e-15
    assert errors[64] >= errors[128] >= errors[256]
    _report_line(
        3, True,
        f"mean-ergodic: angle={span_ix.angle:.2e} (tol 1e-7), "
        f"choi_min={report.choi_min_eig:.2e} (tol -1e-9), cb_cp={cp_norm:.9f} "
        f"(tol 1+1e-6), cesaro errors {errors[64]:.4f}>{errors[128]:.4f}>"
        f"{errors[256]:.4f} <= {c:.2f}/N",
    )


def test_criterion_4_module_property():
    """Cyclic Toeplitz N in {3,5}: P(A D B^H) = A P(D) B^H over 32 trials."""
    worst = 0.0
    for n in (3, 5):
        problem = apps.ToeplitzProblem.cyclic(n)
        report = apps.toeplitz_projection(problem, compute_cb=False)
        worst = max(
            worst, apps.verify_module_property(problem, report, trials=32, seed=7)
        )
    _report_line(4, worst <= 1e-8, f"module property defect {worst:.2e} (tol 1e-8)")


def test_criterion_5_truncated_shift_honesty():
    """Jordan-shift mode: P = 0 and fixed dim 0, matching the direct solve."""
    for n in (2, 4):
        problem = apps.ToeplitzProblem.truncated(n)
        report = apps.toeplitz_projection(problem, compute_cb=False)
        assert op_norm(report.p.natural) == 0.0, n
        assert report.fixed.dim == 0, n
        oracle = null_space(problem.action().superops[0].natural - np.eye(n * n))
        assert oracle.dim == 0, n
        assert not report.match.dim_mismatch
    _report_line(5, True, "truncated shift: P = 0 exactly, fixed dim 0 = oracle dim")


def test_criterion_6_dual_projector_states():
    """Q maps seeded states to invariant states; Q^2 = Q to 1e-9."""
    z2 = ac.build_conjugation_action(ac.cyclic_desc(2), [np.eye(2), PAULI_Z])
    circle = ac.build_circle_action([0, 1])
    details = []
    for name, action, nodes in (("Z2", z2, None), ("circle(0,1)", circle, 4)):
        report = av.average_dual(
            action, nodes=nodes, trials=16, seed=3, compute_cb=False
        )
        assert report.extras["state_trials"] == 16
        assert report.extras["state_psd_defect"] <= 1e-10, name
        assert report.extras["state_trace_defect"] <= 1e-12, name
        assert report.extras["state_invariance_defect"] <= 1e-9, name
        assert report.idempotency_defect <= 1e-9, name
        details.append(
            f"{name}: psd {report.extras['state_psd_defect']:.1e}, "
            f"trace {report.extras['state_trace_defect']:.1e}, "
            f"inv {report.extras['state_invariance_defect']:.1e}, "
            f"Q^2-Q {report.idempotency_defect:.1e}"
        )
    _report_line(6, True, "; ".join(details) + " (tols 1e-10/1e-12/1e-9/1e-9)")


def test_criterion_7_cb_norm_engine():
    """Known values plus two-sided consistency on 50 seeded random maps."""
    up_id = cb.cb_norm_upper(so.identity(2)).value
    assert abs(up_id - 1.0) <= 1e-6
    t = so.transpose_map(2)
    lo_t, _ = cb.cb_norm_lower(t, n=2, seed=0)
    up_t = cb.cb_norm_upper(t).value
    assert lo_t >= 2 - 1e-4 and up_t <= 2 + 1e-4
    phi = so.conjugation(np.diag([1.0, 2.0]))
    up_cp = cb.cb_norm_upper(phi).value
    assert abs(up_cp - op_norm(phi.apply(np.eye(2)))) <= 1e-4
    g = rng(2024)
    worst_gap = -np.inf
    for i in range(50):
        k = (g.standard_normal((9, 9)) + 1j * g.standard_normal((9, 9))) / 3
        random_map = so.SuperOp(k)
        lo, _ = cb.cb_norm_lower(random_map, seed=i)
        up = cb.cb_norm_upper(random_map).value
        assert lo <= up + 1e-4, i
        worst_gap = max(worst_gap, lo - up)
    _report_line(
        7, True,
        f"cb engine: id {up_id:.8f} (1 +- 1e-6), transpose [{lo_t:.6f}, {up_t:.6f}] "
        f"(2 +- 1e-4), CP {up_cp:.8f} (4 +- 1e-4), 50 random maps "
        f"lower-upper <= {worst_gap:.1e} (tol 1e-4)",
    )


def test_criterion_8_weyl_unitarization():
    """Unitarity defect <= 1e-9 for Z2 and a twisted S3 representation."""
    worst = 0.0
    z2 = apps.RepProblem.build(ac.cyclic_desc(2), [np.eye(2), NONUNITARY])
    worst = max(worst, apps.weyl_unitarize(z2).defect)
    desc, rep = s3_block_rep()
    g = rng(8)
    t = np.eye(3) + 0.3 * rand_complex(g, 3, 3)
    t_inv = np.linalg.inv(t)
    twisted = apps.RepProblem.build(
        desc, {lab: t @ m @ t_inv for lab, m in rep.items()}
    )
    worst = max(worst, apps.weyl_unitarize(twisted).defect)
    _report_line(8, worst <= 1e-9, f"weyl defect {worst:.2e} (tol 1e-9)")


def test_criterion_9_commutant_identity():
    """fixed_subspace(conjugation) = commutant(rho(G)) + exp cross-check."""
    desc2 = ac.cyclic_desc(2)
    c3 = np.roll(np.eye(3), 1, axis=0)
    s3_desc, s3_rep = s3_block_rep()
    _, s3_ir = s3_irrep2()
    bundled = [
        ("Z2 diag", desc2, [np.eye(2), PAULI_Z]),
        ("Z2 nonunitary", desc2, [np.eye(2), NONUNITARY]),
        ("Z3 shift", ac.cyclic_desc(3),
         [np.linalg.matrix_power(c3, k) for k in range(3)]),
        ("S3 2+sign", s3_desc, s3_rep),
        ("S3 irrep", s3_desc, s3_ir),
    ]
    worst_angle = 0.0
    worst_exp = 0.0
    for name, desc, rep in bundled:
        problem = apps.RepProblem.build(desc, rep)
        action = problem.action()
        fixed = fp.fixed_subspace(action)
        result = apps.isotropy_lie_algebra(problem, samples=8, seed=5)
        match = fp.subspace_match(fixed.basis, result.subspace.basis)
        assert not match.dim_mismatch, name
        assert match.angle <= 1e-8, name
        assert result.exp_defect <= 1e-8, name
        worst_angle = max(worst_angle, match.angle)
        worst_exp = max(worst_exp, result.exp_defect)
    _report_line(
        9, True,
        f"commutant identity: angle<={worst_angle:.2e}, exp defect<="
        f"{worst_exp:.2e} (tols 1e-8)",
    )


def test_criterion_10_plain_norm_bound():
    """Non-unitary Z2 action: ||P|| <= sup ||alpha_g|| + 1e-6, plain norm."""
    action = ac.build_conjugation_action(ac.cyclic_desc(2), [np.eye(2), NONUNITARY])
    result = apps.plain_norm_projection(action, compute_cb=True)
    assert result.bound_ok
    assert result.plain_norm_estimate <= result.plain_norm_cap + 1e-6
    # the cb upper bound certifies the plain bound from above as well
    assert result.report.cb_upper <= result.plain_norm_cap + 1e-4
    _report_line(
        10, True,
        f"plain norm {result.plain_norm_estimate:.6f} <= cap "
        f"{result.plain_norm_cap:.6f} + 1e-6 (cb upper "
        f"{result.report.cb_upper:.6f})",
    )


def test_criterion_11_suite_determinism(tmp_path, monkeypatch):
    """Two consecutive bundled-suite runs produce bit-identical reports."""
    monkeypatch.delenv("OSPROJ_TOL_SCALE", raising=False)
    bundled = str(cli.bundled_config_dir())
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    code1 = cli.main(["suite", bundled, "--output-dir", str(out1)])
    code2 = cli.main(["suite", bundled, "--output-dir", str(out2)])
    assert code1 == 0 and code2 == 0
    files1 = sorted(p.name for p in out1.iterdir())
    files2 = sorted(p.name for p in out2.iterdir())
    assert files1 == files2 and files1
    mismatched = [
        name for name in files1
        if (out1 / name).read_bytes() != (out2 / name).read_bytes()
    ]
    assert not mismatched, mismatched
    agg = json.loads((out1 / "suite_report.json").read_text())
    assert agg["worst_exit"] == 0
    _report_line(
        11, True,
        f"suite determinism: {len(files1)} report files bit-identical, "
        f"all {agg['total']} configs passed",
    )
