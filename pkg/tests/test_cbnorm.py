import numpy as np
import pytest

from osproj import cbnorm as cb
from osproj import superop as so
from osproj.errors import NotCompletelyPositiveError, VerificationError
from osproj.linalg import op_norm

from conftest import rand_complex, rng


def replacer_channel():
    """x -> tr(x) E_00; cb norm ||Phi(I)|| = 2, discriminates the trace side."""
    return so.from_kraus(
        [np.array([[1, 0], [0, 0]], dtype=complex),
         np.array([[0, 1], [0, 0]], dtype=complex)]
    )


class TestUpper:
    def test_identity(self):
        assert cb.cb_norm_upper(so.identity(2)).value == pytest.approx(1.0, abs=1e-6)

    def test_transpose(self):
        # brute-force amplification attains 2 at the swap witness
        assert cb.cb_norm_upper(so.transpose_map(2)).value == pytest.approx(2.0, abs=1e-4)

    def test_cp_diag(self):
        phi = so.conjugation(np.diag([1.0, 2.0]))
        assert cb.cb_norm_upper(phi).value == pytest.approx(4.0, abs=1e-6)

    def test_replacer(self):
        assert cb.cb_norm_upper(replacer_channel()).value == pytest.approx(2.0, abs=1e-6)

    def test_zero_map(self):
        res = cb.cb_norm_upper(so.zero(2))
        assert res.value == 0.0

    def test_certificate_feasible(self):
        phi = so.transpose_map(2)
        res = cb.cb_norm_upper(phi)
        j = phi.adjoint().choi
        big = np.block([[res.y0, -j], [-j.conj().T, res.y1]])
        lam = np.linalg.eigvalsh(0.5 * (big + big.conj().T))[0]
        assert lam >= -1e-6

    def test_tol_range_enforced(self):
        with pytest.raises(ValueError):
            cb.cb_norm_upper(so.identity(2), tol=1e-2)


class TestLower:
    def test_identity(self):
        value, _ = cb.cb_norm_lower(so.identity(2), n=1)
        assert value == pytest.approx(1.0, abs=1e-9)

    def test_transpose(self):
        value, witness = cb.cb_norm_lower(so.transpose_map(2), n=2)
        assert value >= 2 - 1e-6
        assert op_norm(witness) <= 1 + 1e-9

    def test_pinching(self):
        value, _ = cb.cb_norm_lower(so.pinching(2), n=2)
        assert value == pytest.approx(1.0, abs=1e-6)

    def test_never_exceeds_cb(self):
        g = rng(21)
        for i in range(5):
            phi = so.SuperOp(rand_complex(g, 4, 4))
            lo, _ = cb.cb_norm_lower(phi, seed=i)
            up = cb.cb_norm_upper(phi).value
            assert lo <= up + 1e-4

    def test_deterministic(self):
        phi = so.SuperOp(rand_complex(rng(22), 9, 9))
        a = cb.cb_norm_lower(phi, seed=5)
        b = cb.cb_norm_lower(phi, seed=5)
        assert a[0] == b[0]
        np.testing.assert_array_equal(a[1], b[1])


class TestCpShortcut:
    def test_unital(self):
        assert cb.cb_norm_cp(so.pinching(3)) == pytest.approx(1.0, abs=1e-12)

    def test_diag(self):
        phi = so.conjugation(np.diag([1.0, 2.0]))
        assert cb.cb_norm_cp(phi) == pytest.approx(4.0, abs=1e-12)

    def test_zero(self):
        assert cb.cb_norm_cp(so.zero(2)) == 0.0

    def test_non_cp_rejected(self):
        with pytest.raises(NotCompletelyPositiveError, match="not completely positive"):
            cb.cb_norm_cp(so.transpose_map(2))

    def test_matches_sdp(self):
        g = rng(23)
        for _ in range(3):
            phi = so.from_kraus([rand_complex(g, 2, 2) for _ in range(2)])
            assert abs(cb.cb_norm_upper(phi).value - cb.cb_norm_cp(phi)) <= 1e-4


class TestInvariants:
    def test_submultiplicative(self):
        g = rng(24)
        for _ in range(3):
            a = so.SuperOp(rand_complex(g, 4, 4))
            b = so.SuperOp(rand_complex(g, 4, 4))
            prod = cb.cb_norm_upper(a.compose(b)).value
            bound = cb.cb_norm_upper(a).value * cb.cb_norm_upper(b).value
            assert prod <= bound + 1e-4

    def test_scale_equivariance(self):
        phi = so.SuperOp(rand_complex(rng(25), 4, 4))
        base = cb.cb_norm(phi, seed=0)
        c = -2.5 + 1.5j
        scaled = cb.cb_norm(c * phi, seed=0)
        assert scaled.upper == pytest.approx(abs(c) * base.upper, abs=1e-6 * abs(c))
        assert scaled.lower == pytest.approx(abs(c) * base.lower, abs=1e-6 * abs(c))

    def test_result_invariant_enforced(self):
        with pytest.raises(VerificationError):
            cb.CbNormResult(
                lower=2.0, upper=1.0, witness=np.eye(2),
                dual_certificate=(np.eye(2), np.eye(2)),
            )

    def test_witness_certifies(self):
        phi = so.transpose_map(2)
        res = cb.cb_norm(phi)
        amp = phi.amplify(res.amplification)
        assert op_norm(amp.apply(res.witness)) >= res.lower - 1e-9
