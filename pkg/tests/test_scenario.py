from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from omimo.array_model import UniformLinearArray
from omimo.nsp import InfeasibleProjectionError, ProjectionMatrix, null_space_projection
from omimo.overlapped import (
    build_mixing_matrix,
    make_partition,
    transmit_weights,
    virtual_steering,
)
from omimo.scenario import (
    SINR_CAP_DB,
    ConfigError,
    ScenarioConfig,
    beampattern_sweep,
    interference_suppression,
    k_sweep,
    nsp_beampattern,
    output_sinr,
    random_stream,
    sample_channel,
    sidelobe_metrics,
    simulate_received,
    sweep_argmax,
)
from omimo.waveforms import WaveformBank, virtual_data_vector
from conftest import crandn


def small_config(**kw):
    base = dict(mt=6, mr=4, nr=2, k=3, k_list=(1, 3, 6), num_samples=64, trials=8, seed=7)
    base.update(kw)
    return ScenarioConfig(**base)


def setup(config):
    part = make_partition(config.mt, config.k)
    w = transmit_weights(part, config.theta_s, config.dt)
    bank = WaveformBank.for_partition(part, num_samples=config.num_samples)
    return part, w, bank


def u_of(config, part, w, angle_deg):
    return virtual_steering(part, w, np.deg2rad(angle_deg), config.dt, config.rx).u


# ------------------------------------------------------------- config

def test_config_defaults_follow_simulation_setup():
    c = ScenarioConfig()
    assert (c.mt, c.mr, c.dt, c.theta_s_deg) == (20, 20, 0.5, 15.0)
    assert [a for a, _ in c.interferers] == [-30.0, -10.0]
    assert c.k_list == (1, 5, 10, 20) and c.trials == 100
    grid = c.theta_grid_deg()
    assert grid.size == 1801 and grid[0] == -90 and grid[-1] == 90 and 15.0 in grid


@pytest.mark.parametrize("kw", [
    {"k_list": ()}, {"k_list": (0,)}, {"k": 30}, {"mt": 0}, {"trials": 0},
    {"grid": (-90, 90, 0)}, {"theta_s_deg": 100}, {"dt": 0}, {"seed": -1},
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ScenarioConfig(**kw)


# ------------------------------------------------------------ channels

def test_channel_determinism():
    a = sample_channel(4, 20, random_stream(3, 1))
    b = sample_channel(4, 20, random_stream(3, 1))
    assert_array_equal(a, b)
    assert not np.array_equal(a, sample_channel(4, 20, random_stream(4, 1)))


def test_channel_statistics():
    h = sample_channel(100, 1000, np.random.default_rng(0))
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.02
    assert abs(np.mean(h)) < 0.02


# ---------------------------------------------------- received signal

@pytest.mark.parametrize("mt, k, mr, ts", [(6, 3, 4, 15.0), (5, 1, 3, -20.0), (4, 4, 2, 40.0)])
def test_received_noise_free_oracle(mt, k, mr, ts):
    config = small_config(mt=mt, k=k, mr=mr, theta_s_deg=ts, interferers=(), snr_db=float("inf"),
                          k_list=(k,))
    part, w, bank = setup(config)
    beta = 0.8 * np.exp(0.3j)
    rec = simulate_received(config, w, bank, np.random.default_rng(0), beta_s=beta)
    y = virtual_data_vector(rec.total, bank)
    assert_allclose(y, np.sqrt(mt / k) * beta * u_of(config, part, w, ts), atol=1e-12)
    assert not rec.noise.any() and not rec.interference.any()


def test_received_pure_noise_variance():
    config = small_config(interferers=(), snr_db=5.0, num_samples=256)
    part, w, bank = setup(config)
    rec = simulate_received(config, w, bank, np.random.default_rng(1), beta_s=0.0)
    assert not rec.signal.any()
    y = virtual_data_vector(rec.total, bank)
    target = 10 ** (-5.0 / 10)
    assert abs(np.mean(np.abs(y) ** 2) / target - 1.0) < 0.15


def test_received_three_source_linearity():
    config = small_config(snr_db=10.0)
    part, w, bank = setup(config)
    rec = simulate_received(config, w, bank, np.random.default_rng(2))
    y = virtual_data_vector(rec.total, bank)
    scale = np.sqrt(config.mt / config.k)
    expected = scale * rec.beta_s * u_of(config, part, w, config.theta_s_deg)
    for (angle, _), beta in zip(config.interferers, rec.beta_i):
        expected = expected + scale * beta * u_of(config, part, w, angle)
    expected = expected + virtual_data_vector(rec.noise, bank)
    assert_allclose(y, expected, atol=1e-10)


def test_reflection_coefficient_powers():
    config = small_config(signal_power_db=6.0, interferers=((-30.0, 20.0),))
    part, w, bank = setup(config)
    rec = simulate_received(config, w, bank, np.random.default_rng(3))
    assert abs(abs(rec.beta_s) ** 2 - 10 ** 0.6) < 1e-12
    assert abs(abs(rec.beta_i[0]) ** 2 - 100.0) < 1e-9


def test_received_scales_with_beta():
    config = small_config(snr_db=float("inf"))
    part, w, bank = setup(config)
    a = simulate_received(config, w, bank, np.random.default_rng(4), beta_s=1.0, beta_i=[0.5, 2j])
    b = simulate_received(config, w, bank, np.random.default_rng(4), beta_s=-3.0, beta_i=[-1.5, -6j])
    assert_allclose(virtual_data_vector(b.total, bank), -3 * virtual_data_vector(a.total, bank), atol=1e-10)


# --------------------------------------------------------------- SINR

def test_sinr_noise_free_no_interference_capped():
    stats = output_sinr(small_config(interferers=(), snr_db=float("inf"), trials=3))
    assert_array_equal(stats.sinr_db, SINR_CAP_DB)


def test_sinr_doubling_signal_power():
    config = small_config(trials=20)
    base = output_sinr(config)
    doubled = output_sinr(replace(config, signal_power_db=10 * np.log10(2)))
    delta = doubled.sinr_db - base.sinr_db
    assert_allclose(delta, 10 * np.log10(2), atol=0.1)
    assert abs(doubled.sinr["mean"] - base.sinr["mean"] - 3.0103) < 0.1


def test_sinr_deterministic_and_worker_independent():
    config = small_config(trials=12, nsp=True)
    a = output_sinr(config)
    b = output_sinr(config)
    c = output_sinr(config, workers=3)
    assert_array_equal(a.sinr_db, b.sinr_db)
    assert_array_equal(a.sinr_db, c.sinr_db)
    assert_array_equal(a.suppression_db, c.suppression_db)
    assert np.all(a.suppression_db < -160)


def test_sinr_aggregates():
    stats = output_sinr(small_config(trials=1))
    assert stats.sinr["mean"] == stats.sinr["median"] == stats.sinr_db[0]
    assert stats.sinr["std"] == 0.0
    stats = output_sinr(small_config(trials=9))
    assert stats.sinr["mean"] == pytest.approx(np.mean(stats.sinr_db))
    assert stats.sinr["median"] == pytest.approx(np.median(stats.sinr_db))
    assert stats.suppression["mean"] == 0.0  # no NSP: P = I


def test_sinr_seeds_differ():
    a = output_sinr(small_config(seed=1))
    b = output_sinr(small_config(seed=2))
    assert not np.array_equal(a.sinr_db, b.sinr_db)


# ------------------------------------------------------- beampatterns

def test_sweep_endpoint_columns_identical():
    table = beampattern_sweep(ScenarioConfig())
    assert list(table.columns) == ["gain_db_K1", "gain_db_K5", "gain_db_K10", "gain_db_K20"]
    g1 = 10 ** (table.columns["gain_db_K1"] / 10)
    g20 = 10 ** (table.columns["gain_db_K20"] / 10)
    assert_allclose(g1, g20, atol=1e-9)
    for col in table.columns.values():
        assert col.max() <= 0.0 and col.size == table.theta_deg.size


def test_sweep_nsp_identity_reduction():
    config = ScenarioConfig()
    plain = beampattern_sweep(config)
    ident = beampattern_sweep(config, use_nsp=True, projection=ProjectionMatrix.identity(config.mt))
    for k in config.k_list:
        a = 10 ** (plain.columns[f"gain_db_K{k}"] / 10)
        b = 10 ** (ident.columns[f"gain_db_K{k}_nsp"] / 10)
        assert np.abs(a - b).max() <= 1e-12


def test_nsp_beampattern_identity_reduction_raw():
    config = small_config()
    part, w, _ = setup(config)
    theta = np.linspace(-1.5, 1.5, 201)
    from omimo.overlapped import beampattern

    plain = beampattern(part, w, config.theta_s, theta, config.dt, config.rx)
    nsp = nsp_beampattern(part, w, np.eye(config.mt), config.theta_s, theta, config.dt, config.rx)
    assert np.abs(plain - nsp).max() <= 1e-12


def test_sweep_nsp_infeasible():
    with pytest.raises(InfeasibleProjectionError):
        beampattern_sweep(ScenarioConfig(nr=20), use_nsp=True)
    with pytest.raises(InfeasibleProjectionError):
        beampattern_sweep(ScenarioConfig(), use_nsp=True, channel=crandn(np.random.default_rng(0), 20, 20))


def test_sweep_nsp_mainlobe_stays_on_target():
    table = beampattern_sweep(ScenarioConfig(seed=11), use_nsp=True)
    for col in table.columns.values():
        m = sidelobe_metrics(table.theta_deg, col)
        assert abs(m.peak_deg - 15.0) <= 1.0


# ---------------------------------------------------- sidelobe metrics

def test_metrics_flat_pattern_sentinel():
    table = beampattern_sweep(ScenarioConfig(mt=1, mr=1, k_list=(1,), k=1))
    m = sidelobe_metrics(table.theta_deg, table.columns["gain_db_K1"])
    assert np.isnan(m.psl_db) and np.isnan(m.mainlobe_width_deg)


def test_metrics_coarse_grid_error():
    table = beampattern_sweep(ScenarioConfig(grid=(-90, 90, 10)))
    with pytest.raises(ValueError, match="coarse"):
        sidelobe_metrics(table.theta_deg, table.columns["gain_db_K20"])


def test_metrics_pure_mimo_baseline_and_determinism():
    table = beampattern_sweep(ScenarioConfig())
    col = table.columns["gain_db_K20"]
    m1 = sidelobe_metrics(table.theta_deg, col)
    m2 = sidelobe_metrics(table.theta_deg, col.copy())
    assert m1 == m2
    assert m1.peak_deg == 15.0
    # squared 20-element array factor: first sidelobe near 2 * -13.26 dB
    assert -27.0 < m1.psl_db < -26.0
    # first nulls at sin(theta) = sin(15 deg) +/- 0.1
    width = np.rad2deg(np.arcsin(np.sin(np.deg2rad(15)) + 0.1) - np.arcsin(np.sin(np.deg2rad(15)) - 0.1))
    assert abs(m1.mainlobe_width_deg - width) <= 0.2


def test_metrics_fixed_exclusion():
    theta = np.arange(-10, 10.5, 0.5)
    g = -np.abs(theta) * 1.0
    g[np.abs(theta) == 8] = -5.0
    assert sidelobe_metrics(theta, g, mainlobe_exclusion_deg=9).psl_db == -9.5
    assert sidelobe_metrics(theta, g, mainlobe_exclusion_deg=2).psl_db == -2.5
    m = sidelobe_metrics(theta, g)
    assert m.psl_db == -5.0 and m.mainlobe_width_deg == 15.0


# ----------------------------------------------- interference metrics

def test_interference_suppression_cases(rng):
    H = crandn(rng, 4, 20)
    part = make_partition(20, 10)
    W = build_mixing_matrix(part, transmit_weights(part, 0.26, 0.5))
    assert interference_suppression(H, W, np.eye(20)) == 0.0
    assert interference_suppression(H, W, null_space_projection(H)) <= -160
    assert interference_suppression(H, W, np.zeros((20, 20))) == float("-inf")
    with pytest.raises(ValueError):
        interference_suppression(np.zeros((4, 20)), W, np.eye(20))


# ---------------------------------------------------------- K sweep

def test_k_sweep_values():
    assert k_sweep(1) == [(1, 1)]
    assert sweep_argmax(k_sweep(20)) == (110, [10, 11])
    assert sweep_argmax(k_sweep(10)) == (30, [5, 6])
    for mt in range(1, 30):
        sweep = dict(k_sweep(mt))
        assert all(sweep[k] == sweep[mt + 1 - k] for k in sweep)
