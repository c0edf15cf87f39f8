import numpy as np
import pytest

from phononlab import hilbert as hb


def test_build_space_dims():
    assert hb.build_space(3, 6).total_dim == 324
    assert hb.build_space(3, 3).total_dim == 81
    assert hb.build_space(3, 5).total_dim == 225
    assert hb.build_space(3, 6).dims == (3, 3, 6, 6)


def test_build_space_rejects_bad_dims():
    with pytest.raises(ValueError):
        hb.build_space(2, 6)
    with pytest.raises(ValueError):
        hb.build_space(3, 1)
    with pytest.raises(ValueError):
        hb.HilbertLayout((3, 1))


def test_embed_identity_is_identity():
    layout = hb.build_space(3, 4)
    out = hb.embed(np.eye(3), 0, layout)
    assert np.allclose(out, np.eye(layout.total_dim))


def test_embed_truncated_commutator():
    # Oracle: direct matrix computation of [a, a^dag] at the truncation.
    layout = hb.build_space(3, 6)
    r = 6
    a = np.diag(np.sqrt(np.arange(1, r)), k=1).astype(complex)
    local = a @ a.conj().T - a.conj().T @ a
    expected_local = np.eye(r, dtype=complex)
    expected_local[r - 1, r - 1] = 1.0 - r  # identity minus r * top projector
    assert np.allclose(local, expected_local)

    lhs = (hb.embed(a, 2, layout) @ hb.embed(a.conj().T, 2, layout)
           - hb.embed(a.conj().T, 2, layout) @ hb.embed(a, 2, layout))
    assert np.allclose(lhs, hb.embed(expected_local, 2, layout), atol=1e-12)


def test_embeds_on_disjoint_subsystems_commute():
    layout = hb.build_space(3, 4)
    s_ge_a = hb.embed(hb.lowering(3, "ge"), 0, layout)
    a_b = hb.embed(hb.destroy(4), 3, layout)
    assert np.max(np.abs(s_ge_a @ a_b - a_b @ s_ge_a)) < 1e-14


def test_embed_preserves_spectrum():
    layout = hb.build_space(3, 4)
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    x = x + x.conj().T
    big = hb.embed(x, 2, layout)
    mult = layout.total_dim // 4
    expected = np.sort(np.repeat(np.linalg.eigvalsh(x), mult))
    assert np.allclose(np.sort(np.linalg.eigvalsh(big)), expected, atol=1e-9)


def test_displacement_zero_is_identity():
    assert np.allclose(hb.displacement_operator(0.0, 8), np.eye(8))


def test_displacement_vacuum_overlap():
    # Oracle: <0|D(alpha)|0> = exp(-|alpha|^2 / 2) from the coherent series.
    alpha = 0.35
    d = hb.displacement_operator(alpha, 8)
    assert abs(d[0, 0] - np.exp(-abs(alpha) ** 2 / 2)) < 1e-6
    assert abs(d[0, 0] - 0.9406) < 1e-3


def test_displacement_mean_phonon():
    alpha = 0.5
    d = hb.displacement_operator(alpha, 8)
    state = d[:, 0]
    mean_n = float(np.sum(np.arange(8) * np.abs(state) ** 2))
    assert abs(mean_n - 0.25) < 1e-6


def test_displacement_unitarity_and_inverse():
    for alpha in (0.1, 0.35 + 0.2j, -0.6j, 0.6):
        for dim in (8, 12):
            d = hb.displacement_operator(alpha, dim)
            assert np.max(np.abs(d @ d.conj().T - np.eye(dim))) < 1e-6
            d_inv = hb.displacement_operator(-alpha, dim)
            assert np.max(np.abs(d_inv - d.conj().T)) < 1e-12


def test_coherent_state_basics():
    assert np.allclose(hb.coherent_state(0.0, 6), hb.fock(0, 6))
    psi = hb.coherent_state(0.3, 12)
    ratio = abs(psi[1]) ** 2 / abs(psi[0]) ** 2
    assert abs(ratio - 0.09) < 1e-6
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-9


def test_coherent_state_truncation_warning():
    with pytest.warns(UserWarning, match="truncation"):
        hb.coherent_state(1.5, 6)


def test_partial_trace_product_state():
    layout = hb.HilbertLayout((3, 4))
    rho_q = np.zeros((3, 3), dtype=complex)
    rho_q[0, 0] = 1.0
    rng = np.random.default_rng(5)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho_r = x @ x.conj().T
    rho_r /= np.trace(rho_r).real
    rho = np.kron(rho_q, rho_r)
    reduced = hb.partial_trace(rho, [1], layout)
    assert np.allclose(reduced, rho_r, atol=1e-12)
    assert abs(np.trace(reduced).real - 1.0) < 1e-9


def test_partial_trace_bell_four_body():
    # Oracle: hand-computed reduced block of (|eg10> + |ge01>)/sqrt(2).
    layout = hb.build_space(3, 6)
    psi = np.zeros(layout.total_dim, dtype=complex)
    psi[layout.basis_index((1, 0, 1, 0))] = 1.0 / np.sqrt(2)
    psi[layout.basis_index((0, 1, 0, 1))] = 1.0 / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    reduced = hb.partial_trace(rho, [2, 3], layout)
    expected = np.zeros((36, 36), dtype=complex)
    expected[1 * 6 + 0, 1 * 6 + 0] = 0.5
    expected[0 * 6 + 1, 0 * 6 + 1] = 0.5
    assert np.allclose(reduced, expected, atol=1e-12)
    hb.assert_density_matrix(reduced)


def test_partial_trace_commutes_with_displacement():
    # Displacing then tracing equals tracing then displacing for product states.
    layout = hb.build_space(3, 6)
    rho_q = np.zeros((9, 9), dtype=complex)
    rho_q[1, 1] = 1.0
    psi_r = np.kron(hb.coherent_state(0.2, 6), hb.fock(1, 6))
    rho_r = np.outer(psi_r, psi_r.conj())
    rho = np.kron(rho_q, rho_r)
    d_a = hb.displacement_operator(0.3 + 0.1j, 6)
    d_full = hb.embed(d_a, 2, layout)
    left = hb.partial_trace(d_full @ rho @ d_full.conj().T, [2, 3], layout)
    right_op = np.kron(d_a, np.eye(6))
    right = right_op @ hb.partial_trace(rho, [2, 3], layout) @ right_op.conj().T
    assert np.allclose(left, right, atol=1e-12)


def test_partial_trace_invalid_keep():
    layout = hb.build_space(3, 4)
    rho = np.eye(layout.total_dim, dtype=complex) / layout.total_dim
    with pytest.raises(ValueError):
        hb.partial_trace(rho, [], layout)
    with pytest.raises(ValueError):
        hb.partial_trace(rho, [7], layout)
