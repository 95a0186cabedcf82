import math

import numpy as np
import pytest

from densesim import ObservableElement, QuantumState, basis_state, expectation, maximally_mixed, parse_observable
from errors import DimensionMismatch, FormatError, InstanceNotApplicable, ParameterError
from hstab import (
    HstabInstance,
    best_codespace_state,
    equalizing_sweep,
    h_stab,
    h_stab_sampling_oracle,
    load_hstab_instance,
    qma_params,
    qma_soundness_check,
    qma_verify,
    random_no_instance,
    reduction_witness_demo,
    soundness_sweep,
)
from pauli import parse_stabilizer
from stabtest import exact_pass_probability

BELL = QuantumState(np.array([1, 0, 0, 1]) / np.sqrt(2))


@pytest.fixture
def bell_group():
    return parse_stabilizer({"n": 2, "generators": ["+XX", "+ZZ"]})


def bell_projector(scale=1.0):
    return ObservableElement(scale * np.outer(BELL.data, BELL.data.conj()))


class TestHstab:
    def test_bell_against_zero_zero(self, bell_group, rng):
        inst = HstabInstance(bell_group, parse_observable({"projector": "00"}))
        assert h_stab(inst) == pytest.approx(0.5)
        sampled = h_stab_sampling_oracle(inst, 10_000, rng)
        assert 0.49 <= sampled <= 0.5 + 1e-9

    def test_codespace_projector(self, bell_group):
        assert h_stab(HstabInstance(bell_group, bell_projector())) == pytest.approx(1.0)

    def test_orthogonal_projector(self):
        group = parse_stabilizer({"n": 2, "generators": ["+ZI"]})
        inst = HstabInstance(group, parse_observable({"projector": "11"}))
        assert h_stab(inst) == pytest.approx(0.0, abs=1e-12)

    def test_extremes(self, bell_group):
        assert h_stab(HstabInstance(bell_group, ObservableElement.identity(2))) == pytest.approx(1.0)
        assert h_stab(HstabInstance(bell_group, ObservableElement.zero(2))) == 0.0

    def test_monotone_in_m(self, rng):
        inst = random_no_instance(3, rng)
        half = HstabInstance(inst.group, ObservableElement(inst.M.matrix / 2, validate=False), inst.a, inst.b)
        assert h_stab(half) <= h_stab(inst) + 1e-12
        assert h_stab(half) == pytest.approx(h_stab(inst) / 2)

    def test_monotone_on_random_pairs(self, rng):
        for n in (1, 2, 3, 4):
            inst = random_no_instance(n, rng)
            t = float(rng.uniform(0, 1))
            M = inst.M.matrix
            larger = ObservableElement(M + (np.eye(M.shape[0]) - M) * t, validate=False)
            assert h_stab(inst) <= h_stab(HstabInstance(inst.group, larger)) + 1e-12

    def test_oracle_never_exceeds_exact(self, rng):
        group = parse_stabilizer({"n": 3, "generators": ["+ZII"]})
        from densesim import random_povm_element

        inst = HstabInstance(group, random_povm_element(3, rng))
        sampled = h_stab_sampling_oracle(inst, 10_000, rng)
        # four-dimensional codespace: 10^4 samples land within 0.1 of the optimum
        assert h_stab(inst) - 0.1 <= sampled <= h_stab(inst) + 1e-9

    @pytest.mark.parametrize("projector, value", [("00", 1.0), ("11", 0.0)])
    def test_best_codespace_state(self, projector, value):
        group = parse_stabilizer({"n": 2, "generators": ["+ZI"]})
        inst = HstabInstance(group, parse_observable({"projector": projector}))
        state = best_codespace_state(inst)
        assert h_stab(inst) == pytest.approx(value, abs=1e-12)
        assert expectation(state, inst.M) == pytest.approx(h_stab(inst), abs=1e-9)
        assert exact_pass_probability(state, group) == pytest.approx(1.0)

    def test_validation(self, bell_group):
        with pytest.raises(ParameterError):
            HstabInstance(bell_group, ObservableElement.identity(2), a=0.3, b=0.5)
        with pytest.raises(ParameterError):
            HstabInstance(bell_group, ObservableElement.identity(2), gap_floor=0.5)
        with pytest.raises(DimensionMismatch):
            HstabInstance(bell_group, ObservableElement.identity(1))

    def test_load(self, instances_dir):
        inst = load_hstab_instance(str(instances_dir / "hstab_bell.json"))
        assert h_stab(inst) == pytest.approx(0.5)
        with pytest.raises(FormatError):
            load_hstab_instance({"M": "identity"})


class TestQmaParams:
    def test_default_schedule(self):
        params = qma_params(2 / 3, 1 / 3)
        assert params.epsilon == pytest.approx(1 / 288)
        assert params.delta == pytest.approx(1 / 6)
        assert params.q_star == pytest.approx(1 / 145)
        assert params.delta2 == pytest.approx(1 / 870)
        assert params.delta1 == pytest.approx(params.delta2)
        assert params.lower_bound == pytest.approx(1 / 3456)
        assert params.bound_holds

    def test_beta_values(self):
        params = qma_params(2 / 3, 1 / 3)
        q = params.q_star
        assert params.beta1 == pytest.approx(1 - params.epsilon + q * params.epsilon)
        assert params.beta2 == pytest.approx(q * (1 / 3 + params.delta) + 1 - q)

    def test_full_gap(self):
        params = qma_params(1.0, 0.0)
        assert params.delta == pytest.approx(0.5)
        assert params.bound_holds

    @pytest.mark.parametrize("a, b", [(0.5, 0.5), (0.2, 0.4), (1.1, 0.0)])
    def test_invalid(self, a, b):
        with pytest.raises(ParameterError):
            qma_params(a, b)

    def test_gaps_equalize(self):
        summary = equalizing_sweep(200, 11)
        assert summary.violations == 0


class TestVerifier:
    def test_maximally_mixed_prover(self, bell_group, rng):
        params = qma_params(2 / 3, 1 / 3)
        inst = HstabInstance(bell_group, bell_projector())
        report = qma_verify(inst, maximally_mixed(2), params, 0, rng)
        q = params.q_star
        assert report.exact == pytest.approx(q / 4 + (1 - q) * 5 / 8)
        assert report.rate is None
        assert report.stderr is None

    def test_yes_instance_rate(self, bell_group, rng):
        params = qma_params(0.9, 0.1)
        inst = HstabInstance(bell_group, bell_projector(0.9), a=0.9, b=0.1)
        rounds = 4000
        report = qma_verify(inst, BELL, params, rounds, rng)
        expected = params.q_star * 0.9 + 1 - params.q_star
        assert report.exact == pytest.approx(expected)
        assert report.exact >= params.alpha - 1e-9
        sigma = math.sqrt(expected * (1 - expected) / rounds)
        assert abs(report.rate - expected) <= 4 * sigma

    def test_prover_size(self, bell_group, rng):
        inst = HstabInstance(bell_group, bell_projector())
        with pytest.raises(DimensionMismatch):
            qma_verify(inst, basis_state("0"), qma_params(2 / 3, 1 / 3), 10, rng)


class TestSoundness:
    def test_random_no_instance_is_sound(self, rng):
        inst = random_no_instance(3, rng)
        assert h_stab(inst) <= inst.b + 1e-9
        report = qma_soundness_check(inst)
        assert report.holds
        assert report.to_dict()["bound"] == pytest.approx(max(report.beta1, report.beta2))

    def test_yes_instance_is_rejected(self, bell_group):
        inst = HstabInstance(bell_group, bell_projector(0.9), a=0.9, b=0.1)
        with pytest.raises(InstanceNotApplicable):
            qma_soundness_check(inst)

    def test_sweep(self):
        summary = soundness_sweep(200, 4)
        assert summary.cases == 200
        assert summary.violations == 0


class TestReduction:
    def test_toy_instances(self, toy_yes, toy_no, rng):
        report = reduction_witness_demo([toy_yes, toy_no], rng, trials=10)
        assert report["holds"]
        no_rows = report["instances"][1]["per_challenge"]
        assert [row["h_stab"] for row in no_rows] == pytest.approx([0.25, math.sin(math.pi / 8) ** 2])
        assert all(entry["rank"] == 2 for entry in report["instances"])
