import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from toeplitz_lattice.quantization.geometry import GroupAction, InvalidQuantumNumber, QuantizedGeometry
from toeplitz_lattice.quantization.toeplitz import Symbol, constant, height
from toeplitz_lattice.semiclassics import (
    CSV_HEADER,
    DroppedSamplesWarning,
    FitError,
    fit_exponent,
    probability_sequence,
    symbol_mean,
    trace_sequence,
    tuynman_sweep,
)

K_VALUES = list(range(10, 101, 10))


def raised_height() -> Symbol:
    return Symbol.combine([(0.5, constant(1.0)), (0.5, height())], "raised-height")


def test_fit_recovers_power_law_with_offset():
    ks = np.array(K_VALUES)
    fit = fit_exponent(ks, 3 * (ks + 1), corrections=1)
    assert fit.exponent == pytest.approx(1.0, abs=0.02)
    assert_allclose(fit.predict(ks), 3 * (ks + 1), rtol=5e-3)


def test_fit_drops_non_positive_samples():
    with pytest.warns(DroppedSamplesWarning):
        fit = fit_exponent([1, 2, 3, 4, 5], [0.0, 4.0, 9.0, 16.0, 25.0])
    assert fit.exponent == pytest.approx(2.0)
    assert fit.k_used == (2, 3, 4, 5)


def test_fit_needs_enough_samples():
    with pytest.raises(FitError):
        fit_exponent([1, 2], [1.0, 2.0])
    with pytest.raises(FitError):
        fit_exponent([1, 2, 3], [1.0, 2.0, 3.0], corrections=1)
    with pytest.raises(FitError):
        fit_exponent([0, 1, 2], [1.0, 2.0, 3.0])


def test_circle_probabilities_grow_linearly():
    run = probability_sequence(GroupAction.circle(), 0, K_VALUES)
    assert_allclose(run.values, [k + 1 for k in K_VALUES], atol=1e-9)
    assert run.fitted_exponent == pytest.approx(1.0, abs=0.02)


def test_normalized_probabilities_keep_the_exponent():
    raw = probability_sequence(GroupAction.circle(), 0, K_VALUES)
    normalized = probability_sequence(GroupAction.circle(), 0, K_VALUES, normalized=True)
    total = sum(k + 1 for k in range(K_VALUES[-1] + 1))
    assert_allclose(normalized.values, np.array(raw.values) / total)
    assert normalized.fitted_exponent == pytest.approx(raw.fitted_exponent)
    assert normalized.fitted_constant == pytest.approx(raw.fitted_constant / total)


@pytest.mark.parametrize("action", [GroupAction.torus(), GroupAction.su2()], ids=["torus", "su2"])
def test_weight_isotypes_stay_bounded(action: GroupAction):
    run = probability_sequence(action, 0, K_VALUES)
    assert_allclose(run.values, 1.0, atol=1e-12)
    assert run.fitted_exponent == pytest.approx(0.0, abs=0.02)


def test_forbidden_weight_is_flagged():
    run = probability_sequence(GroupAction.torus(), 1, K_VALUES)
    assert run.fit is None
    assert run.flagged == "all values vanish"
    assert run.predictions() == [None] * len(K_VALUES)


@pytest.mark.parametrize(
    "symbol, mean", [(constant(1.0), 1.0), (height(), 0.0), (raised_height(), 0.5)]
)
def test_trace_sequence_identity(symbol: Symbol, mean: float):
    run = trace_sequence(symbol, K_VALUES)
    assert run.max_identity_defect <= 1e-8
    assert symbol_mean(symbol, QuantizedGeometry(4)) == pytest.approx(mean, abs=1e-14)
    if mean > 0:
        assert run.fitted_exponent == pytest.approx(1.0, abs=0.02)
        assert_allclose(run.mean_values(), mean, atol=1e-9)
    else:
        assert run.flagged == "all values vanish"


def test_compressed_trace_on_torus_isotype():
    run = trace_sequence(height(), [2, 4, 6], action=GroupAction.torus(), nu_g=2)
    # weight 2 is z0^(k/2-1) z1^(k/2+1), the eigenvector of T_k[h] with eigenvalue -2/(k+2)
    assert_allclose(run.values, [-2 / 4, -2 / 6, -2 / 8], atol=1e-12)
    assert run.dims == (1, 1, 1)
    with pytest.raises(InvalidQuantumNumber):
        trace_sequence(height(), [2, 4], action=GroupAction.torus())


def test_tuynman_sweep_decays_like_one_over_k():
    run = tuynman_sweep(height(), K_VALUES)
    assert_allclose(run.values, [1 / (k + 2) for k in K_VALUES], atol=1e-12)
    assert all(v <= r for v, r in zip(run.values, run.references))
    assert run.fitted_exponent == pytest.approx(-1.0, abs=0.05)
    with pytest.raises(InvalidQuantumNumber):
        tuynman_sweep(height(), [0, 1, 2])


def test_workers_do_not_change_results():
    serial = trace_sequence(raised_height(), K_VALUES)
    parallel = trace_sequence(raised_height(), K_VALUES, workers=4)
    assert serial.values == parallel.values


def test_run_serialization():
    run = probability_sequence(GroupAction.circle(), 0, [10, 20, 30, 40])
    rows = run.to_csv().splitlines()
    assert tuple(rows[0].split(",")) == CSV_HEADER
    assert len(rows) == 5
    data = run.to_dict()
    assert data["kind"] == "probability"
    assert math.isclose(data["fitted_exponent"], run.fitted_exponent)


def test_k_values_must_increase():
    with pytest.raises(InvalidQuantumNumber):
        probability_sequence(GroupAction.circle(), 0, [20, 10, 30])


def test_sweeps_warn_about_vanishing_samples():
    # odd k have no weight zero vector
    with pytest.warns(DroppedSamplesWarning):
        run = probability_sequence(GroupAction.torus(), 0, list(range(9, 17)))
    assert run.values[0] == 0.0
    assert run.fit is not None
    assert run.fit.k_used == (10, 12, 14, 16)
    assert run.fitted_exponent == pytest.approx(0.0, abs=1e-9)
