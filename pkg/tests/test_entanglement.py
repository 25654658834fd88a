import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coupled_tops.entanglement import (
    QuantumState,
    entanglement_entropy,
    entropy_bits,
    find_mu_qc,
    ground_entropy,
    reduce,
    schmidt_entropy_bits,
    sweep,
)
from coupled_tops.model import minimal_jx_product_state
from coupled_tops.spin import SpinJ

from conftest import random_state


def cat_state(twice_j):
    d = twice_j + 1
    c = np.zeros((d, d))
    c[-1, 0] = c[0, -1] = 1 / math.sqrt(2)
    return QuantumState(c.ravel(), SpinJ(twice_j))


def test_state_validation():
    with pytest.raises(ValueError):
        QuantumState(np.ones(4), SpinJ(1))
    with pytest.raises(ValueError):
        QuantumState(np.ones(5) / math.sqrt(5), SpinJ(1))


def test_product_state_is_pure():
    spin = SpinJ(4)
    rho = reduce(QuantumState(minimal_jx_product_state(spin), spin)).entries
    assert np.trace(rho @ rho) == pytest.approx(1.0, abs=1e-12)
    assert entropy_bits(rho) == pytest.approx(0.0, abs=1e-12)


def test_cat_reduced_matrix():
    rho = reduce(cat_state(4)).entries
    expected = np.zeros((5, 5))
    expected[0, 0] = expected[-1, -1] = 0.5
    np.testing.assert_allclose(rho, expected, atol=1e-15)
    assert entanglement_entropy(cat_state(4)) == pytest.approx(1.0, abs=1e-12)


def test_entropy_examples():
    assert entropy_bits(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
    assert entropy_bits(np.diag([0.5, 0.5])) == pytest.approx(1.0, abs=1e-14)
    assert entropy_bits(np.eye(4) / 4) == pytest.approx(2.0, abs=1e-14)


def test_entropy_rejects_bad_trace():
    with pytest.raises(ValueError):
        entropy_bits(np.diag([0.5, 0.4]))


def test_subsystem_spectra_agree(rng):
    state = QuantumState(random_state(rng, 2), SpinJ(2))
    p1 = np.sort(np.linalg.eigvalsh(reduce(state, 1).entries))
    p2 = np.sort(np.linalg.eigvalsh(reduce(state, 2).entries))
    s = np.sort(np.linalg.svd(state.matrix, compute_uv=False) ** 2)
    np.testing.assert_allclose(p1, p2, atol=1e-12)
    np.testing.assert_allclose(p1, s, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.booleans())
def test_schmidt_symmetry_and_svd_oracle(seed, twice_j, complex_):
    state = QuantumState(random_state(np.random.default_rng(seed), twice_j, complex_), SpinJ(twice_j))
    s1 = entanglement_entropy(state, 1)
    s2 = entanglement_entropy(state, 2)
    assert abs(s1 - s2) < 1e-9
    assert abs(s1 - schmidt_entropy_bits(state)) < 1e-10


def _haar(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_local_unitary_invariance(seed, twice_j):
    rng = np.random.default_rng(seed)
    spin = SpinJ(twice_j)
    state = QuantumState(random_state(rng, twice_j), spin)
    u, v = _haar(rng, spin.dim()), _haar(rng, spin.dim())
    moved = QuantumState.normalized(np.kron(u, v) @ state.amplitudes, spin)
    assert entanglement_entropy(moved) == pytest.approx(entanglement_entropy(state), abs=1e-10)


def test_half_spin_sweep_monotone():
    rows = sweep(SpinJ(1), [0, 1, 2, 4, 8])
    s = [r.entropy_bits for r in rows]
    assert s[0] == pytest.approx(0.0, abs=1e-10)
    assert all(b >= a for a, b in zip(s, s[1:]))
    assert s[-1] > 0.9


def test_spin_one_uncoupled_zero():
    assert ground_entropy(SpinJ(2), 0.0) == pytest.approx(0.0, abs=1e-10)


def test_j14_peak_ordering():
    rows = {r.mu: r.entropy_bits for r in sweep(SpinJ(28), [0.0, 0.7, 1.184, 1.55], threads=2)}
    assert rows[1.184] > rows[0.7] and rows[1.184] > rows[1.55]
    assert rows[0.0] < 1e-9


@pytest.mark.parametrize("twice_j", [2, 10, 28])
def test_strong_coupling_limit(twice_j):
    assert ground_entropy(SpinJ(twice_j), 50.0) == pytest.approx(1.0, abs=0.05)


def test_sweep_row_fields():
    row = sweep(SpinJ(4), [1.0])[0]
    assert set(row.as_dict()) == {"mu", "entropy_bits", "ground_energy", "gap", "degenerate_flag"}
    assert row.gap > 0 and not row.degenerate_flag and not row.failed


def test_sweep_requires_sorted_grid():
    with pytest.raises(ValueError):
        sweep(SpinJ(2), [1.0, 0.5])


def test_sweep_threads_identical():
    grid = np.linspace(0, 2, 9)
    a = [r.as_dict() for r in sweep(SpinJ(6), grid)]
    b = [r.as_dict() for r in sweep(SpinJ(6), grid, threads=3)]
    assert a == b


def test_find_mu_qc_half_spin_no_peak():
    rec = find_mu_qc(SpinJ(1))
    assert not rec.peak and rec.mu_qc is None
    assert rec.as_dict()["status"] == "no-peak"


def test_find_mu_qc_step_validation():
    with pytest.raises(ValueError):
        find_mu_qc(SpinJ(4), coarse_step=0.1)


def test_find_mu_qc_small_spin():
    rec = find_mu_qc(SpinJ(4), coarse_step=0.02)
    assert rec.peak
    lo, hi = rec.bracket
    assert hi - lo < 1e-5 and lo <= rec.mu_qc <= hi
    # the refined point beats its coarse neighbours
    assert rec.S_max >= ground_entropy(SpinJ(4), rec.mu_qc - 0.02)
    assert rec.S_max >= ground_entropy(SpinJ(4), rec.mu_qc + 0.02)


# values produced by this solver after its agreement with the dense oracles
MU_QC_BASELINE = {4: 2.0178375, 10: 1.4089521, 20: 1.2358314, 28: 1.1837886, 40: 1.1422054}


@pytest.mark.parametrize("twice_j", sorted(MU_QC_BASELINE))
def test_mu_qc_regression(twice_j):
    rec = find_mu_qc(SpinJ(twice_j))
    assert rec.mu_qc == pytest.approx(MU_QC_BASELINE[twice_j], abs=2e-5)
