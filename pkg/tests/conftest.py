import numpy as np
import pytest

from osproj import actions as ac

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture
def pauli_x():
    return PAULI_X.copy()


@pytest.fixture
def pauli_z():
    return PAULI_Z.copy()


def rng(seed=0):
    return np.random.default_rng(seed)


def rand_complex(generator, rows, cols):
    return generator.standard_normal((rows, cols)) + 1j * generator.standard_normal(
        (rows, cols)
    )


def rand_hermitian(generator, n):
    a = rand_complex(generator, n, n)
    return 0.5 * (a + a.conj().T)


def rand_unitary(generator, n):
    q, r = np.linalg.qr(rand_complex(generator, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def s3_group():
    """S3 as exact permutation closure; returns (desc, label -> perm)."""
    return ac.finite_group_from_permutations([(1, 0, 2), (1, 2, 0)])


def _perm_matrix(p):
    m = np.zeros((len(p), len(p)))
    for i, pi in enumerate(p):
        m[pi, i] = 1.0
    return m


def s3_block_rep():
    """The 2-dim standard irrep (+) sign rep of S3, keyed by element label."""
    desc, perms = s3_group()
    q = np.array(
        [
            [1 / np.sqrt(2), 1 / np.sqrt(6)],
            [-1 / np.sqrt(2), 1 / np.sqrt(6)],
            [0.0, -2 / np.sqrt(6)],
        ]
    )
    rep = {}
    for lab, p in perms.items():
        pm = _perm_matrix(p)
        block = np.zeros((3, 3))
        block[:2, :2] = q.T @ pm @ q
        block[2, 2] = round(np.linalg.det(pm))
        rep[lab] = block.astype(complex)
    return desc, rep


def s3_irrep2():
    """Just the 2-dim irreducible part, keyed by element label."""
    desc, rep = s3_block_rep()
    return desc, {lab: m[:2, :2] for lab, m in rep.items()}
