import numpy as np
import pytest

from osproj import superop as so
from osproj.errors import NotCompletelyPositiveError, ShapeError
from osproj.linalg import op_norm, vec

from conftest import rand_complex, rand_unitary, rng


def matrix_unit(d, i, j):
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


class TestApply:
    def test_identity(self):
        x = rand_complex(rng(0), 2, 2)
        np.testing.assert_allclose(so.identity(2).apply(x), x)

    def test_conjugation(self, pauli_z):
        out = so.conjugation(pauli_z).apply(np.array([[1, 2], [3, 4.0]]))
        np.testing.assert_allclose(out, [[1, -2], [-3, 4.0]])

    def test_zero(self):
        np.testing.assert_allclose(so.zero(2).apply(np.ones((2, 2))), np.zeros((2, 2)))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            so.identity(2).apply(np.eye(3))


class TestCompose:
    def test_identity_neutral(self):
        g = rng(1)
        phi = so.SuperOp(rand_complex(g, 9, 4))
        np.testing.assert_allclose(
            phi.compose(so.identity(2)).natural, phi.natural
        )

    def test_conjugation_homomorphism(self):
        g = rng(2)
        for _ in range(4):
            u, v = rand_unitary(g, 3), rand_unitary(g, 3)
            lhs = so.conjugation(u).compose(so.conjugation(v))
            rhs = so.conjugation(u @ v)
            assert op_norm(lhs.natural - rhs.natural) < 1e-12

    def test_transpose_involution(self):
        t = so.transpose_map(2)
        np.testing.assert_allclose(t.compose(t).natural, np.eye(4))

    def test_associative(self):
        g = rng(3)
        for _ in range(4):
            a = so.SuperOp(rand_complex(g, 4, 9))
            b = so.SuperOp(rand_complex(g, 9, 4))
            c = so.SuperOp(rand_complex(g, 4, 4))
            lhs = a.compose(b).compose(c)
            rhs = a.compose(b.compose(c))
            assert op_norm(lhs.natural - rhs.natural) <= 1e-12 * max(
                1, op_norm(rhs.natural)
            )


class TestChoi:
    def test_identity(self):
        expected = sum(
            np.kron(matrix_unit(2, i, j), matrix_unit(2, i, j))
            for i in range(2)
            for j in range(2)
        )
        np.testing.assert_allclose(so.identity(2).choi, expected)

    def test_trace_map(self):
        # Phi(x) = tr(x) I/2 evaluated on matrix units gives J = I_4 / 2
        phi = so.trace_to(np.eye(2) / 2)
        np.testing.assert_allclose(phi.choi, np.eye(4) / 2)

    def test_transpose_is_swap(self):
        swap = np.zeros((4, 4))
        swap[0, 0] = swap[1, 2] = swap[2, 1] = swap[3, 3] = 1.0
        np.testing.assert_allclose(so.transpose_map(2).choi, swap)

    def test_roundtrip(self):
        g = rng(4)
        phi = so.SuperOp(rand_complex(g, 9, 4))
        back = so.from_choi(phi.choi, 2, 3)
        np.testing.assert_allclose(back.natural, phi.natural)


class TestKraus:
    def test_unitary_single_term(self):
        u = rand_unitary(rng(5), 3)
        ops = so.conjugation(u).kraus()
        assert len(ops) == 1
        # single Kraus operator proportional to u (phase free)
        phase = ops[0][0, 0] / u[0, 0]
        np.testing.assert_allclose(ops[0], phase * u, atol=1e-10)
        assert abs(abs(phase) - 1) < 1e-10

    def test_pinching_two_terms(self):
        ops = so.pinching(2).kraus()
        assert len(ops) == 2
        recon = so.from_kraus(ops)
        np.testing.assert_allclose(recon.natural, so.pinching(2).natural, atol=1e-10)

    def test_transpose_not_cp(self):
        with pytest.raises(NotCompletelyPositiveError, match="Choi not PSD") as err:
            so.transpose_map(2).kraus()
        assert err.value.min_eigenvalue == pytest.approx(-1.0, abs=1e-10)

    def test_reconstruction_matches_choi(self):
        g = rng(6)
        ops_in = [rand_complex(g, 2, 2) for _ in range(3)]
        phi = so.from_kraus(ops_in)
        recon = so.from_kraus(phi.kraus())
        assert op_norm(recon.choi - phi.choi) <= 1e-9 * op_norm(phi.choi)

    def test_cp_preserves_psd(self):
        g = rng(7)
        phi = so.from_kraus([rand_complex(g, 3, 3) for _ in range(2)])
        for _ in range(4):
            a = rand_complex(g, 3, 3)
            psd = a @ a.conj().T
            out = phi.apply(psd)
            lam = np.linalg.eigvalsh(0.5 * (out + out.conj().T))[0]
            assert lam >= -1e-10 * op_norm(out)


class TestAmplify:
    def test_identity(self):
        np.testing.assert_allclose(so.identity(2).amplify(3).natural, np.eye(36))

    def test_level_one_is_self(self):
        phi = so.SuperOp(rand_complex(rng(8), 4, 4))
        assert phi.amplify(1) is phi

    def test_transpose_witness(self):
        # the swap (norm 1) maps to sum E_ij (x) E_ij (norm 2)
        amp = so.transpose_map(2).amplify(2)
        swap = np.zeros((4, 4))
        swap[0, 0] = swap[1, 2] = swap[2, 1] = swap[3, 3] = 1.0
        assert op_norm(amp.apply(swap)) >= 2 - 1e-6
        assert op_norm(swap) == pytest.approx(1.0)

    def test_functorial(self):
        g = rng(9)
        a = so.SuperOp(rand_complex(g, 9, 4))
        b = so.SuperOp(rand_complex(g, 4, 9))
        lhs = a.compose(b).amplify(2)
        rhs = a.amplify(2).compose(b.amplify(2))
        assert op_norm(lhs.natural - rhs.natural) < 1e-12 * max(
            1, op_norm(rhs.natural)
        )

    def test_blockwise_meaning(self):
        g = rng(10)
        phi = so.SuperOp(rand_complex(g, 9, 4))
        blocks = [[rand_complex(g, 2, 2) for _ in range(2)] for _ in range(2)]
        x = np.block(blocks)
        out = phi.amplify(2).apply(x)
        expected = np.block([[phi.apply(b) for b in row] for row in blocks])
        np.testing.assert_allclose(out, expected, atol=1e-12)


class TestDual:
    def test_identity(self):
        np.testing.assert_allclose(so.identity(2).dual().natural, np.eye(4))

    def test_pairing_on_matrix_units(self):
        g = rng(11)
        phi = so.SuperOp(rand_complex(g, 9, 4))
        dual = phi.dual()
        for i in range(3):
            for j in range(3):
                for k in range(2):
                    for m in range(2):
                        y = matrix_unit(3, i, j)
                        x = matrix_unit(2, k, m)
                        lhs = np.trace(dual.apply(y).T @ x)
                        rhs = np.trace(y.T @ phi.apply(x))
                        assert abs(lhs - rhs) < 1e-12

    def test_dual_of_unitary_conjugation(self):
        # pairing identity on matrix units forces dual(Ad u) = Ad(u^T)
        u = rand_unitary(rng(12), 2)
        lhs = so.conjugation(u).dual()
        rhs = so.conjugation(u.T)
        assert op_norm(lhs.natural - rhs.natural) < 1e-12

    def test_pinching_self_dual(self):
        p = so.pinching(2)
        np.testing.assert_allclose(p.dual().natural, p.natural)

    def test_double_dual_exact(self):
        phi = so.SuperOp(rand_complex(rng(13), 9, 4))
        np.testing.assert_array_equal(phi.dual().dual().natural, phi.natural)


class TestFileFormat:
    @pytest.mark.parametrize("kind", ["natural", "choi", "kraus"])
    def test_roundtrip(self, kind):
        g = rng(14)
        phi = so.from_kraus([rand_complex(g, 2, 3) for _ in range(2)])
        text = so.write_superop_text(phi, kind)
        assert text.splitlines()[0] == f"superop 3 2 {kind}"
        back = so.read_superop_text(text)
        tol = 0 if kind in ("natural", "choi") else 1e-9
        assert op_norm(back.natural - phi.natural) <= tol * max(
            1, op_norm(phi.natural)
        )

    def test_bad_header(self):
        with pytest.raises(ValueError):
            so.read_superop_text("nonsense 2 2 natural\n1 1\n1.0+0.0i\n")


class TestImmutability:
    def test_setattr_blocked(self):
        phi = so.identity(2)
        with pytest.raises(AttributeError):
            phi.in_dim = 3

    def test_natural_readonly(self):
        phi = so.identity(2)
        with pytest.raises(ValueError):
            phi.natural[0, 0] = 5.0
