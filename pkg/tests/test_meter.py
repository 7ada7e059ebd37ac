import numpy as np
import pytest
from scipy.integrate import simpson

from src.weaksim.errors import DimensionError, ZeroPostselectionError
from src.weaksim.hilbert import LinearOperator, StateVector
from src.weaksim.meter import (
    BranchedJointState,
    GaussianMeter,
    PointerState,
    couple,
    gaussian_overlap,
    idle_wavefunction,
    pointer_expectations,
    postselect,
    reduced_state_fidelity,
    weak_limit_readout,
    window_joint_state,
)
from src.weaksim.scenario import Scenario
from tests.helpers import box_meter, c_meter_mean_over_g


def _grid(shifts, sigma, points=20001):
    return np.linspace(min(shifts) - 12 * sigma, max(shifts) + 12 * sigma, points)


def _dummy_meter(sigma: float) -> GaussianMeter:
    return GaussianMeter.for_projector(LinearOperator(np.diag([1.0, 0.0])), 0.1, sigma, "m")


def test_gaussian_overlap_matches_integration(rng):
    for _ in range(20):
        a, b = rng.uniform(-3, 3, size=2)
        sigma = rng.uniform(0.3, 2.0)
        q = _grid([a, b], sigma)
        numeric = simpson(idle_wavefunction(q - a, sigma) * idle_wavefunction(q - b, sigma), x=q)
        assert gaussian_overlap(a, b, sigma) == pytest.approx(numeric, abs=1e-8)


def test_pointer_expectations_match_integration(rng):
    for _ in range(20):
        sigma = rng.uniform(0.5, 2.0)
        n_terms = rng.integers(1, 5)
        coefficients = rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)
        shifts = rng.uniform(-2, 2, size=n_terms)
        pointer = PointerState.pure(_dummy_meter(sigma), list(zip(coefficients, shifts)))

        q = _grid(shifts, sigma)
        x = q[:, None] - shifts[None, :]
        phi = idle_wavefunction(x, sigma)
        psi = phi @ coefficients
        dpsi = (-x / (2 * sigma ** 2) * phi) @ coefficients
        norm = simpson(np.abs(psi) ** 2, x=q)
        mean_q = simpson(q * np.abs(psi) ** 2, x=q) / norm
        mean_p = np.real(simpson(np.conj(psi) * (-1j) * dpsi, x=q)) / norm

        assert pointer.norm_squared() == pytest.approx(norm, rel=1e-8)
        got_q, got_p = pointer_expectations(pointer)
        assert got_q == pytest.approx(mean_q, abs=1e-8)
        assert got_p == pytest.approx(mean_p, abs=1e-8)
        np.testing.assert_allclose(pointer.density(q), np.abs(psi) ** 2, atol=1e-12)


def test_pointer_cdf_integrates_density():
    pointer = PointerState.pure(_dummy_meter(1.0), [(1.0, 0.0), (-0.5j, 1.5)])
    q = np.linspace(-15, 2.0, 40001)
    assert pointer.cdf(2.0) == pytest.approx(simpson(pointer.density(q), x=q), abs=1e-8)
    assert pointer.cdf(np.inf) == pytest.approx(pointer.norm_squared())


def test_meter_parameter_validation():
    with pytest.raises(ValueError, match="g must be"):
        box_meter("A", -0.1)
    with pytest.raises(ValueError, match="sigma"):
        box_meter("A", 0.1, sigma=0.0)


def test_identity_meter_never_branches():
    meter = GaussianMeter.for_observable(LinearOperator.identity(3), 0.3, 1.0, "id")
    joint = window_joint_state(StateVector.normalize([1.0, 2.0, 3.0]), [meter])
    assert len(joint.branches) == 1
    assert joint.branches[0].shifts[0] == pytest.approx(0.3)


def test_zero_strength_merges_branches(box):
    joint = window_joint_state(box.evolved_state(), [box_meter("C", 0.0)])
    assert len(joint.branches) == 1
    assert joint.norm_squared() == pytest.approx(1.0)


def test_coupling_dimension_mismatch():
    meter = GaussianMeter.for_projector(LinearOperator(np.diag([1.0, 0.0])), 0.1)
    with pytest.raises(DimensionError):
        couple(BranchedJointState.idle(StateVector.basis(3, 0)), meter)


def test_coupling_preserves_norm(box):
    joint = window_joint_state(box.evolved_state(), [box_meter("A", 0.7), box_meter("A+C", 1.3)])
    assert joint.norm_squared() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("g", [0.05, 0.2, 1.0, 3.0])
def test_c_meter_closed_form(box, g):
    joint = window_joint_state(box.evolved_state(), [box_meter("C", g)])
    prob, (pointer,) = postselect(joint, box.postselected)
    e = np.exp(-g * g / 8)
    assert prob == pytest.approx((5 - 4 * e) / 9, abs=1e-14)
    mean_q, mean_p = pointer_expectations(pointer)
    assert mean_q / g == pytest.approx(c_meter_mean_over_g(g), abs=1e-12)
    assert mean_p == pytest.approx(0.0, abs=1e-14)


def test_a_meter_reads_g_exactly(box):
    joint = window_joint_state(box.evolved_state(), [box_meter("A", 0.4)])
    prob, (pointer,) = postselect(joint, box.postselected)
    assert prob == pytest.approx(1 / 9, abs=1e-14)
    assert pointer_expectations(pointer)[0] == pytest.approx(0.4, abs=1e-14)


def test_c_meter_weak_limit_converges_quadratically(box):
    errors = []
    for g in (0.1, 0.05):
        joint = window_joint_state(box.evolved_state(), [box_meter("C", g)])
        _, (pointer,) = postselect(joint, box.postselected)
        errors.append(abs(pointer_expectations(pointer)[0] / g - (-1.0)))
    assert 3.0 <= errors[0] / errors[1] <= 5.0


def test_weak_limit_readout_recovers_complex_weak_value():
    preselected = StateVector.normalize([1.0, 1.0])
    postselected = StateVector.normalize([1.0, 1j])
    projector = LinearOperator(np.diag([1.0, 0.0]))
    s = Scenario.build(preselected, postselected)
    for sigma in (0.5, 1.0, 2.0):
        meter = GaussianMeter.for_projector(projector, 1e-3, sigma, "zero")
        joint = window_joint_state(s.evolved_state(), [meter])
        _, (pointer,) = postselect(joint, s.postselected)
        readout = weak_limit_readout(pointer, 1e-3)
        assert readout.real == pytest.approx(0.5, abs=1e-5)
        assert readout.imag == pytest.approx(0.5, abs=1e-5)
    with pytest.raises(ValueError):
        weak_limit_readout(pointer, 0.0)


def test_no_collapse_to_second_order(box):
    defects = []
    for g in (0.2, 0.1):
        joint = window_joint_state(box.evolved_state(), [box_meter("A", g)])
        fidelity = reduced_state_fidelity(joint, box.evolved_state())
        assert fidelity == pytest.approx(1 - 4 / 9 * (1 - np.exp(-g * g / 8)), abs=1e-14)
        defects.append(1 - fidelity)
    assert 3.5 <= defects[0] / defects[1] <= 4.5


def test_strong_meter_decoheres_channels(box):
    joint = window_joint_state(box.evolved_state(), [box_meter("A", 60.0)])
    assert reduced_state_fidelity(joint, box.evolved_state()) == pytest.approx(5 / 9, abs=1e-12)


def test_zero_postselection_raises():
    meter = GaussianMeter.for_projector(LinearOperator(np.diag([1.0, 0.0])), 0.1)
    joint = window_joint_state(StateVector.basis(2, 0), [meter])
    with pytest.raises(ZeroPostselectionError):
        postselect(joint, StateVector.basis(2, 1))


def test_multi_meter_pointer_means(box):
    g = 0.3
    joint = window_joint_state(box.evolved_state(), [box_meter("A", g), box_meter("C", g)])
    prob, (pointer_a, pointer_c) = postselect(joint, box.postselected)
    e = np.exp(-g * g / 8)
    assert prob == pytest.approx((3 - 2 * e * e) / 9, abs=1e-14)
    assert pointer_expectations(pointer_a)[0] / g == pytest.approx((1 + e - e * e) / (3 - 2 * e * e), abs=1e-12)
    assert pointer_expectations(pointer_c)[0] / g == pytest.approx((1 - e - e * e) / (3 - 2 * e * e), abs=1e-12)


def test_couple_splits_three_box_over_box_a(box):
    joint = couple(BranchedJointState.idle(box.evolved_state()), box_meter("A", 0.1))
    branches = {b.shifts: b.component.amplitudes for b in joint.branches}
    assert set(branches) == {(0.0,), (0.1,)}
    np.testing.assert_allclose(branches[(0.1,)], np.array([1.0, 0.0, 0.0]) / np.sqrt(3), atol=1e-12)
    np.testing.assert_allclose(branches[(0.0,)], np.array([0.0, 1.0, 1.0]) / np.sqrt(3), atol=1e-12)


def test_commuting_meters_couple_in_either_order(box):
    g = 0.4
    forward = window_joint_state(box.evolved_state(), [box_meter("A", g), box_meter("C", g)])
    backward = window_joint_state(box.evolved_state(), [box_meter("C", g), box_meter("A", g)])
    prob_f, pointers_f = postselect(forward, box.postselected)
    prob_b, pointers_b = postselect(backward, box.postselected)
    assert prob_f == pytest.approx(prob_b, abs=1e-14)
    means_f = {p.meter.label: pointer_expectations(p) for p in pointers_f}
    means_b = {p.meter.label: pointer_expectations(p) for p in pointers_b}
    for label in ("A", "C"):
        assert means_f[label] == pytest.approx(means_b[label], abs=1e-12)


def test_postselect_without_meters():
    state = StateVector.normalize([1.0, 1j, 2.0])
    f = StateVector.normalize([1.0, 0.0, 1.0])
    prob, pointers = postselect(window_joint_state(state, []), f)
    assert pointers == []
    assert prob == pytest.approx(abs(np.vdot(f.amplitudes, state.amplitudes)) ** 2, abs=1e-14)


def test_fidelity_with_orthogonal_reference_is_zero(box):
    state = StateVector.normalize([1.0, 1.0, 0.0])
    joint = window_joint_state(state, [box_meter("A", 1.0)])
    assert reduced_state_fidelity(joint, StateVector.basis(3, 2)) == pytest.approx(0.0, abs=1e-14)

    idle = window_joint_state(box.evolved_state(), [box_meter("A", 0.0)])
    orthogonal = StateVector.normalize([1.0, -1.0, 0.0])
    assert reduced_state_fidelity(idle, orthogonal) == pytest.approx(0.0, abs=1e-14)
