from __future__ import annotations

import json

import numpy as np
import pytest

from behavkernel import DimensionError, DomainError
from behavkernel.experiments import (
    ResultTable,
    SweepConfig,
    benchmark_mask,
    blood_volume_model,
    bolus_input,
    oscillator_system,
    run_completion_benchmark,
    run_fig1_sweep,
    run_noisy_case_study,
    success_grid,
)
from behavkernel.numerics import numerical_rank


def test_result_table_basics(tmp_path):
    t = ResultTable({"a": [1, 2], "b": [0.5, np.nan]}, {"k": 1})
    assert t.names == ["a", "b"] and t.n_rows == 2
    assert t.row(a=2)["a"] == 2.0
    assert t.to_csv() == "a,b\n1,0.5\n2,NaN\n"
    csv_path, meta_path = t.write(tmp_path / "out", "t")
    assert csv_path.read_text() == t.to_csv()
    assert json.loads(meta_path.read_text()) == {"k": 1}
    with pytest.raises(KeyError):
        t.row(a=3)
    with pytest.raises(DimensionError):
        ResultTable({"a": [1], "b": [1, 2]})


def test_sweep_config_validation():
    with pytest.raises(DomainError):
        SweepConfig(given_fraction_grid=(0.0,))
    with pytest.raises(DomainError):
        SweepConfig(n_trials=0)
    with pytest.raises(DomainError):
        SweepConfig(T_grid=())


SMALL = SweepConfig(n_systems=2, n_trials=3, T_grid=(20, 60, 120), given_fraction_grid=(0.2, 0.6, 1.0))


def test_small_sweep_is_deterministic_and_sound():
    a = run_fig1_sweep(SMALL)
    b = run_fig1_sweep(SMALL)
    assert a.to_csv() == b.to_csv()
    assert a.metadata["config_hash"] == b.metadata["config_hash"]
    assert a.n_rows == 9
    # every success must agree with the kernel computed from the complete record
    assert a["mismatches"].sum() == 0
    np.testing.assert_array_equal(a["validated_rate"], a["success_rate"])
    Ts, Fs, grid = success_grid(a)
    assert list(Ts) == [20, 60, 120] and grid.shape == (3, 3)
    assert grid[-1, -1] == 1.0


def test_sweep_seed_changes_results():
    a = run_fig1_sweep(SMALL)
    c = run_fig1_sweep(SweepConfig(**{**SMALL.to_dict(), "seed": 1}))
    assert a.metadata["config_hash"] != c.metadata["config_hash"]


def test_benchmark_mask_counts():
    assert (~benchmark_mask(500)).sum() == 276
    assert (~benchmark_mask(200)).sum() == 66
    np.testing.assert_array_equal(benchmark_mask(200)[:6, 0], [True, True, False, True, True, False])


def test_oscillator_system():
    model = oscillator_system()
    moduli = np.sort(np.abs(np.linalg.eigvals(model.A)))
    np.testing.assert_allclose(moduli, [0.995, 0.995, 0.997, 0.997, 0.999, 0.999])
    assert numerical_rank(model.observability_matrix(6)) == 6


def test_blood_volume_model():
    model = blood_volume_model()
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(model.A).real), [np.exp(-0.5), 1.0])
    assert model.complexity().n == 2
    u = bolus_input(150)
    assert u[5] == 20.0 and u[4] == 0.0 and u[15] == 0.0 and u.sum() == pytest.approx(20 * 10 + 12 * 15 + 25 * 5 + 10 * 20 + 18 * 8)


def test_completion_benchmark_small():
    t = run_completion_benchmark(T_list=(200,), nn_max_T=0)
    row = t.row(T=200)
    assert row["missing"] == 66
    assert row["exact_error"] <= 1e-10
    assert np.isnan(row["nn_error"])
    assert "200" in t.metadata["wall_clock"]


def test_noisy_case_study_rejects_negative_gamma():
    with pytest.raises(DomainError):
        run_noisy_case_study(gamma_list=(-1e-3,))
