import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coupled_tops.classical import (
    ELLIPTIC,
    HYPERBOLIC,
    ChartSingularityError,
    ClassicalState,
    ConstraintError,
    bifurcation_diagram,
    canonical_flow,
    canonical_jacobian,
    classical_energy,
    emergent_points,
    enumerate_fixed_points,
    equations_of_motion,
    hamiltonian_eigenvalues,
    integrate,
    linearize_and_classify,
    newton_fixed_points,
)

RIGHT = [1.0, 0.0, 0.0]
LEFT = [-1.0, 0.0, 0.0]


def by_branch(mu):
    return {r.branch: r for r in enumerate_fixed_points(mu)}


def test_energy_examples():
    assert classical_energy(ClassicalState(RIGHT, RIGHT), 0.7) == 2.0
    assert classical_energy(ClassicalState(LEFT, LEFT), 3.0) == -2.0
    a = [0.5, 0.0, math.sqrt(3) / 2]
    assert classical_energy(ClassicalState(a, a), 2.0) == pytest.approx(2.5, abs=1e-15)


def test_energy_constraint():
    with pytest.raises(ConstraintError):
        classical_energy(ClassicalState([1.0, 0.1, 0.0], RIGHT), 1.0)


def test_uncoupled_precession():
    d = equations_of_motion(ClassicalState([0, 1, 0], [0, 1, 0]), 0.0)
    # rotation about +x at unit rate, dL/dt = x_hat cross L
    np.testing.assert_allclose(d.L1, [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(d.L2, [0, 0, 1], atol=1e-15)


@pytest.mark.parametrize("mu", [0.3, 0.9, 1.1, 1.5, 2.0, 5.0])
def test_fixed_points_are_stationary(mu):
    for rec in enumerate_fixed_points(mu):
        d = equations_of_motion(rec.coords, mu).as_array()
        assert np.max(np.abs(d)) < 1e-12


@pytest.mark.parametrize("mu,count", [(0.3, 4), (0.5, 4), (0.9, 4), (1.0, 4), (1.1, 8), (2.0, 8), (5.0, 8)])
def test_fixed_point_count(mu, count):
    assert len(enumerate_fixed_points(mu)) == count


def test_weak_coupling_stability():
    fp = by_branch(0.5)
    assert fp["→→"].stability == ELLIPTIC and fp["←←"].stability == ELLIPTIC
    assert fp["→←"].stability == HYPERBOLIC and fp["←→"].stability == HYPERBOLIC


def test_emergent_coordinates_mu2():
    fp = by_branch(2.0)
    for label in "ABCD":
        rec = fp[label]
        assert rec.stability == ELLIPTIC
        assert abs(rec.coords.L1[2]) == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
        assert abs(rec.coords.L1[0]) == pytest.approx(0.5, abs=1e-12)
    assert fp["A"].coords.L1[0] == 0.5 and fp["C"].coords.L1[0] == -0.5
    assert fp["C"].coords.L1[2] == -fp["C"].coords.L2[2]


@pytest.mark.parametrize("mu", [1.1, 2.0, 5.0])
def test_emergent_closed_forms(mu):
    fp = by_branch(mu)
    lz = math.sqrt(1 - 1 / mu**2)
    expected = {
        "A": ([1 / mu, 0, lz], [1 / mu, 0, lz]),
        "B": ([1 / mu, 0, -lz], [1 / mu, 0, -lz]),
        "C": ([-1 / mu, 0, lz], [-1 / mu, 0, -lz]),
        "D": ([-1 / mu, 0, -lz], [-1 / mu, 0, lz]),
    }
    for label, (l1, l2) in expected.items():
        assert np.max(np.abs(fp[label].coords.L1 - l1)) < 1e-12
        assert np.max(np.abs(fp[label].coords.L2 - l2)) < 1e-12


def test_branches_merge_at_critical_point():
    for _, s in emergent_points(1.0 + 1e-14):
        assert abs(s.L1[2]) < 1e-6
    assert emergent_points(1.0) == []


@pytest.mark.parametrize("mu", [0.3, 1.0, 2.5])
def test_antialigned_always_hyperbolic(mu):
    rec = linearize_and_classify(ClassicalState(RIGHT, LEFT), mu)
    assert rec.stability == HYPERBOLIC


def test_stability_flip_brackets_critical_point():
    below, above = by_branch(1 - 1e-6), by_branch(1 + 1e-6)
    for label in ("→→", "←←"):
        assert below[label].stability == ELLIPTIC
        assert above[label].stability == HYPERBOLIC


def test_left_point_examples():
    assert linearize_and_classify(ClassicalState(LEFT, LEFT), 0.5).stability == ELLIPTIC
    assert linearize_and_classify(ClassicalState(LEFT, LEFT), 1.5).stability == HYPERBOLIC


def test_classify_rejects_non_fixed_point():
    with pytest.raises(ValueError):
        linearize_and_classify(ClassicalState([0, 1, 0], RIGHT), 1.0)


def test_chart_singularity_detected(monkeypatch):
    import coupled_tops.classical as cl

    # the x field forbids fixed points on the poles, so silence the flow check
    monkeypatch.setattr(cl, "_flow", lambda v, mu: np.zeros_like(v))
    with pytest.raises(ChartSingularityError):
        linearize_and_classify(ClassicalState([0, 0, 1], RIGHT), 1.0)


def test_eigenvalues_match_numpy():
    for rec in enumerate_fixed_points(1.7):
        jac = canonical_jacobian(rec.coords.to_canonical(), 1.7)
        key = lambda z: (round(z.imag, 9), round(z.real, 9))
        ref = sorted(np.linalg.eigvals(jac), key=key)
        np.testing.assert_allclose(sorted(rec.jacobian_eigenvalues, key=key), ref, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-math.pi, math.pi), st.floats(-0.95, 0.95),
    st.floats(-math.pi, math.pi), st.floats(-0.95, 0.95), st.floats(0, 4),
)
def test_canonical_jacobian_matches_finite_difference(p1, z1, p2, z2, mu):
    x = np.array([p1, z1, p2, z2])
    jac = canonical_jacobian(x, mu)
    h = 1e-6
    fd = np.stack([(canonical_flow(x + h * e, mu) - canonical_flow(x - h * e, mu)) / (2 * h) for e in np.eye(4)], axis=1)
    assert np.max(np.abs(jac - fd)) < 1e-5 * max(1.0, np.max(np.abs(jac)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 5))
def test_flow_tangent_and_energy_conserving(seed, mu):
    rng = np.random.default_rng(seed)
    l1, l2 = rng.normal(size=(2, 3))
    s = ClassicalState(l1, l2).normalized()
    d = equations_of_motion(s, mu)
    assert abs(d.L1 @ s.L1) < 1e-12 and abs(d.L2 @ s.L2) < 1e-12
    grad1 = np.array([1.0, 0.0, mu * s.L2[2]])
    grad2 = np.array([1.0, 0.0, mu * s.L1[2]])
    assert abs(grad1 @ d.L1 + grad2 @ d.L2) < 1e-12


def test_canonical_chart_agrees_with_cartesian_flow():
    rng = np.random.default_rng(3)
    for _ in range(10):
        s = ClassicalState(*rng.normal(size=(2, 3))).normalized()
        x = s.to_canonical()
        d = equations_of_motion(s, 1.3)
        dz = canonical_flow(x, 1.3)
        assert dz[1] == pytest.approx(d.L1[2], abs=1e-12)
        assert dz[3] == pytest.approx(d.L2[2], abs=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("mu", [0.5, 1.5, 3.0])
def test_newton_search_finds_no_extra_points(mu):
    found = newton_fixed_points(mu)
    known = np.array([r.coords.as_array() for r in enumerate_fixed_points(mu)])
    # every Newton solution is a known point; poles cannot be fixed points since the x-field is nonzero
    for s in found:
        assert np.min(np.max(np.abs(known - s), axis=1)) < 1e-8
    assert len(found) == len(known)


def test_square_root_scaling():
    mus = np.geomspace(1.001, 1.01, 10)
    lz = np.array([dict(emergent_points(m))["A"].L1[2] for m in mus])
    slope = np.polyfit(np.log(mus - 1), np.log(lz), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.02)


def test_bifurcation_diagram_rows():
    rows = bifurcation_diagram(0.0, 2.0, 201)
    at = lambda mu: [r for r in rows if abs(r["mu"] - mu) < 1e-12]
    assert len(at(0.8)) == 1 and at(0.8)[0]["stability"] == ELLIPTIC
    assert all(abs(r["Lz1"]) < 1e-12 for r in at(1.0))
    stable = sorted(r["Lz1"] for r in bifurcation_diagram(1.25, 1.5, 2) if r["stability"] == ELLIPTIC and r["mu"] == 1.25)
    np.testing.assert_allclose(stable, [-0.6, 0.6], atol=1e-12)


def test_bifurcation_sides():
    right = {r["branch"] for r in bifurcation_diagram(0.5, 2.0, 4, side="right")}
    assert right == {"→→", "A", "B"}
    assert len(bifurcation_diagram(2.0, 3.0, 2, side="all")) == 16
    with pytest.raises(ValueError):
        bifurcation_diagram(2.0, 1.0, 5)


def test_integrate_equilibrium():
    a = dict(emergent_points(2.0))["A"]
    traj = integrate(a, 2.0, 0.01, 10_000)
    assert np.max(np.abs(traj.states[-1] - a.as_array())) < 1e-8


def test_integrate_near_elliptic_point_stays_close():
    s0 = ClassicalState([-1.0, 1e-3, 0.0], [-1.0, 0.0, -1e-3]).normalized()
    traj = integrate(s0, 0.5, 0.01, 10_000)
    dist = np.max(np.abs(traj.states - np.array(LEFT + LEFT)), axis=1)
    assert dist.max() < 1e-2


def test_integrate_fourth_order():
    rng = np.random.default_rng(11)
    s0 = ClassicalState(*rng.normal(size=(2, 3))).normalized()
    coarse = integrate(s0, 1.5, 0.02, 500).states[-1]
    fine = integrate(s0, 1.5, 0.01, 1000).states[-1]
    finer = integrate(s0, 1.5, 0.005, 2000).states[-1]
    ratio = np.linalg.norm(coarse - fine) / np.linalg.norm(fine - finer)
    assert 12 < ratio < 20


def test_integrate_constraint_drift():
    rng = np.random.default_rng(5)
    s0 = ClassicalState(*rng.normal(size=(2, 3))).normalized()
    traj = integrate(s0, 1.5, 0.01, 10_000)
    assert traj.constraint_drift < 1e-12
