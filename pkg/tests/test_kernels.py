"""Dual-path kernels: numba and numpy implementations must agree exactly,
and both must agree with slow dense oracles."""

import numpy as np
import pytest
from scipy.linalg import expm

from spcirc import kernels
from spcirc.pauli import PauliString, to_dense

needs_numba = pytest.mark.skipif(
    not kernels.HAS_NUMBA, reason="numba unavailable or disabled"
)


def random_state(n, seed):
    gen = np.random.default_rng(seed)
    v = gen.standard_normal(2**n) + 1j * gen.standard_normal(2**n)
    return v / np.linalg.norm(v)


def embed_gate(gate, n, pos_a, pos_b):
    """Dense 2**n unitary with `gate` on bit positions (pos_a, pos_b)."""
    d = 2**n
    u = np.zeros((d, d), dtype=complex)
    rest = [p for p in range(n - 1, -1, -1) if p not in (pos_a, pos_b)]
    for col in range(d):
        ba = (col >> pos_a) & 1
        bb = (col >> pos_b) & 1
        base = col & ~((1 << pos_a) | (1 << pos_b))
        for out in range(4):
            row = base | ((out >> 1) << pos_a) | ((out & 1) << pos_b)
            u[row, col] = gate[out, 2 * ba + bb]
    del rest
    return u


# -- oracle agreement ---------------------------------------------------------

def test_apply_gate_matches_dense_embedding():
    gen = np.random.default_rng(41)
    gate = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
    for n, pa, pb in [(2, 1, 0), (3, 2, 0), (4, 1, 3), (4, 0, 2)]:
        psi = random_state(n, 42 + n)
        expected = embed_gate(gate, n, pa, pb) @ psi
        got = psi.copy()
        kernels.apply_gate_2q(got, gate, pa, pb)
        assert np.allclose(got, expected, atol=1e-12), (n, pa, pb)


def test_pauli_rotation_matches_expm():
    theta = 0.37
    for label in ["XYZ", "ZZI", "IIY", "YIY", "ZIZ"]:
        p = PauliString.from_label(label)
        xd, zd = p.dense_masks()
        base = 1j ** ((p.phase_exp + p.y_count) % 4)
        psi = random_state(3, 7)
        expected = expm(1j * theta * to_dense(p)) @ psi
        got = kernels.pauli_rotation(psi.copy(), xd, zd, complex(base), theta)
        assert np.allclose(got, expected, atol=1e-12), label


def test_transfer_apply_matches_einsum():
    gen = np.random.default_rng(43)
    L, din, dout, R = 3, 6, 5, 4
    v = gen.standard_normal(L * din * R)
    T = gen.standard_normal((dout, din))
    expected = np.einsum("oi,lir->lor", T, v.reshape(L, din, R)).reshape(-1)
    assert np.allclose(kernels.transfer_apply(v, T, L, din, R), expected, atol=1e-12)


# -- path agreement -------------------------------------------------------------

@needs_numba
def test_gate_paths_agree():
    gen = np.random.default_rng(44)
    gate = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
    psi = random_state(5, 45)
    a = psi.copy()
    b = psi.copy()
    kernels._apply_gate_2q_nb(a, gate, 3, 1)
    kernels._apply_gate_2q_np(b, gate, 3, 1)
    assert np.array_equal(a, b) or np.allclose(a, b, atol=1e-15)


@needs_numba
def test_rotation_paths_agree():
    psi = random_state(4, 46)
    for xd, zd, base in [(0b1010, 0b0110, 1.0 + 0j), (0, 0b1001, 1.0 + 0j),
                         (0b0011, 0b0011, 1j)]:
        a = kernels._pauli_rotation_nb(psi.copy(), xd, zd, base, np.cos(0.5), np.sin(0.5))
        b = kernels._pauli_rotation_np(psi.copy(), xd, zd, base, np.cos(0.5), np.sin(0.5))
        assert np.allclose(a, b, atol=1e-15)


@needs_numba
def test_transfer_paths_agree():
    gen = np.random.default_rng(47)
    L, din, dout, R = 2, 9, 6, 27
    v = gen.standard_normal(L * din * R)
    T = gen.standard_normal((dout, din))
    a = kernels._transfer_apply_nb(
        v, np.ascontiguousarray(T), L, din, R, dout, np.empty(L * dout * R)
    )
    b = kernels._transfer_apply_np(v, T, L, din, R, dout, np.empty(L * dout * R))
    assert np.allclose(a, b, atol=1e-13)


@needs_numba
def test_closure_round_paths_agree():
    n = 3
    gen = np.random.default_rng(48)
    xs = gen.integers(0, 2**n, 6).astype(np.int64)
    zs = gen.integers(0, 2**n, 6).astype(np.int64)
    # dedup directions to mimic real usage
    keys = sorted(set(((int(x) << n) | int(z) for x, z in zip(xs, zs))))
    xs = np.array([k >> n for k in keys], dtype=np.int64)
    zs = np.array([k & (2**n - 1) for k in keys], dtype=np.int64)

    def run(fn):
        seen = np.zeros(4**n, dtype=bool)
        seen[(xs << n) | zs] = True
        out_x = np.empty(4**n, dtype=np.int64)
        out_z = np.empty(4**n, dtype=np.int64)
        count = fn(xs, zs, xs, zs, seen, n, out_x, out_z)
        return out_x[:count].copy(), out_z[:count].copy(), seen

    ax, az, aseen = run(kernels._closure_round_nb)
    bx, bz, bseen = run(kernels._closure_round_np)
    assert np.array_equal(ax, bx)
    assert np.array_equal(az, bz)
    assert np.array_equal(aseen, bseen)


def test_popcount_array():
    vals = np.array([0, 1, 2, 3, 255, 2**40 - 1], dtype=np.int64)
    assert np.array_equal(
        kernels.popcount_array(vals), [bin(int(v)).count("1") for v in vals]
    )
