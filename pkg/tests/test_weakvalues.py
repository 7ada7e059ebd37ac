import numpy as np
import pytest

from src.weaksim.errors import DimensionError, NotOrthogonalError
from src.weaksim.hilbert import LinearOperator, StateVector
from src.weaksim.scenario import (
    Scenario,
    box_projector,
    labelled_basis,
    prob_via_channel,
    three_box,
    transition_amplitude,
)
from src.weaksim.weakvalues import (
    Verdict,
    WeakValue,
    channel_decomposition,
    indirect_channel_probability,
    paradox_report,
    presence_verdict,
    statistical_verdict,
    weak_value,
)
from tests.helpers import random_scenario, random_state


@pytest.mark.parametrize("spec, expected", [("A", 1.0), ("B", 1.0), ("C", -1.0), ("A+C", 0.0), ("A+B+C", 1.0)])
def test_three_box_weak_values(box, spec, expected):
    wv = weak_value(box_projector(spec), box, spec)
    assert wv.value == pytest.approx(expected, abs=1e-12)
    assert wv.operator_label == spec


def test_three_box_contradiction(box):
    report = paradox_report(box, box_projector("A"), box_projector("C"), labels=("A", "C"))
    assert report.verdict_o is Verdict.PRESENT
    assert report.verdict_1 is Verdict.PRESENT
    assert report.verdict_sum is Verdict.ABSENT
    assert report.contradiction
    assert report.wv_sum.operator_label == "A+C"
    data = report.to_dict()
    assert [op["verdict"] for op in data["operators"]] == ["PRESENT", "PRESENT", "ABSENT"]


def test_three_box_pair_without_contradiction(box):
    report = paradox_report(box, box_projector("A"), box_projector("B"))
    assert not report.contradiction
    assert report.wv_sum.value == pytest.approx(2.0, abs=1e-12)


def test_paradox_requires_orthogonal_projectors(box):
    with pytest.raises(NotOrthogonalError):
        paradox_report(box, box_projector("A"), box_projector("A+B"))


def test_weak_value_dimension_mismatch(box):
    with pytest.raises(DimensionError):
        weak_value(LinearOperator.identity(2), box)


def test_presence_verdict_ignores_sign_and_phase():
    assert presence_verdict(WeakValue(-1.0)) is Verdict.PRESENT
    assert presence_verdict(WeakValue(1e-3j)) is Verdict.PRESENT
    assert presence_verdict(WeakValue(5e-10)) is Verdict.ABSENT
    assert presence_verdict(WeakValue(5e-10), zero_tol=1e-10) is Verdict.PRESENT
    with pytest.raises(ValueError):
        presence_verdict(WeakValue(1.0), zero_tol=0.0)


def test_statistical_verdict():
    assert statistical_verdict(0.02, 0.01) is Verdict.ABSENT
    assert statistical_verdict(-0.05, 0.01) is Verdict.PRESENT
    assert statistical_verdict(0.05, 0.01, k=6.0) is Verdict.ABSENT
    with pytest.raises(ValueError):
        statistical_verdict(0.0, 0.01, k=0.0)


def test_channel_decomposition_three_box(box, basis):
    decomposition = channel_decomposition(box, basis)
    assert decomposition.labels == ("A", "B", "C")
    np.testing.assert_allclose(decomposition.channel_amplitudes, [1 / 3, 1 / 3, -1 / 3], atol=1e-12)
    assert decomposition.total == pytest.approx(transition_amplitude(box))


def test_additivity_on_random_scenarios(rng):
    for _ in range(120):
        dim = int(rng.integers(2, 9))
        s = random_scenario(rng, dim)
        kets = [random_state(rng, dim) for _ in range(dim)]
        # orthogonal projectors onto disjoint columns of a random orthonormal frame
        q, _ = np.linalg.qr(np.column_stack([k.amplitudes for k in kets]))
        split = int(rng.integers(1, dim))
        stop = int(rng.integers(split + 1, dim + 1))
        p_o = LinearOperator(q[:, :split] @ q[:, :split].conj().T)
        p_1 = LinearOperator(q[:, split:stop] @ q[:, split:stop].conj().T)
        report = paradox_report(s, p_o, p_1)
        assert report.wv_sum.value == pytest.approx(report.wv_o.value + report.wv_1.value, abs=1e-10)


def test_sum_rule_over_complete_families(rng):
    for _ in range(100):
        dim = int(rng.integers(2, 9))
        s = random_scenario(rng, dim)
        basis = labelled_basis([f"k{i}" for i in range(dim)])
        total = sum(weak_value(basis.projector(k), s).value for k in range(dim))
        assert total == pytest.approx(1.0, abs=1e-9)


def test_indirect_channel_probability_matches_direct(rng, box, basis):
    for k, spec in enumerate("ABC"):
        wv = weak_value(box_projector(spec), box, spec)
        assert indirect_channel_probability(wv, box) == pytest.approx(prob_via_channel(box, k, basis), abs=1e-12)

    s = random_scenario(rng, 5)
    frame = labelled_basis([str(i) for i in range(5)])
    for k in range(5):
        wv = weak_value(frame.projector(k), s)
        assert indirect_channel_probability(wv, s) == pytest.approx(prob_via_channel(s, k, frame), abs=1e-12)


def test_paradox_requires_projectors(box):
    with pytest.raises(ValueError, match="not an orthogonal projector"):
        paradox_report(box, box_projector("A").scaled(2.0), box_projector("C"))
    with pytest.raises(ValueError, match="not an orthogonal projector"):
        paradox_report(box, box_projector("A"), LinearOperator(np.diag([0.0, 0.5, 0.0])))


def test_verdicts_ignore_global_phases(rng):
    for _ in range(50):
        dim = int(rng.integers(2, 7))
        s = random_scenario(rng, dim)
        alpha, beta = rng.uniform(0, 2 * np.pi, size=2)
        rephased = Scenario.build(
            StateVector(s.preselected.amplitudes * np.exp(1j * alpha)),
            StateVector(s.postselected.amplitudes * np.exp(1j * beta)),
            s.u_pre,
            s.u_post,
        )
        frame = labelled_basis([str(k) for k in range(dim)])
        for k in range(dim):
            before = weak_value(frame.projector(k), s)
            after = weak_value(frame.projector(k), rephased)
            assert after.value == pytest.approx(before.value, abs=1e-10)
            assert presence_verdict(after) is presence_verdict(before)
    # a vanishing union stays vanishing under rephasing
    box = three_box()
    rephased = Scenario.build(
        StateVector(box.preselected.amplitudes * 1j), StateVector(box.postselected.amplitudes * np.exp(0.7j))
    )
    assert presence_verdict(weak_value(box_projector("A+C"), rephased)) is Verdict.ABSENT
