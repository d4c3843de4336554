import numpy as np
import pytest

from mciksc import analytics
from mciksc.config import CsiModel, SystemConfig
from mciksc.mc_engine import BerEstimate, StopRule, empirical_mgf, run_point, sweep


def test_high_snr_is_error_free():
    est = run_point(SystemConfig(2, 1, 2, 1), "both", 60.0, seed=1, stop=StopRule(10, 20_000))
    for e in est.values():
        assert e.ber <= 1e-5


def test_gd_close_to_theory():
    cfg = SystemConfig(4, 1, 4, 2)
    est = run_point(cfg, "gd", 10.0, seed=3, stop=StopRule(400, 10**6))["GD"]
    theory = analytics.ber_gd(10.0, cfg)
    assert 0.5 < est.ber / theory < 2.0
    assert est.bit_errors >= 400


def test_same_seed_same_estimate_any_workers():
    cfg = SystemConfig(4, 2, 4, 2, csi=CsiModel("fixed", 0.1))
    stop = StopRule(300, 50_000)
    a = run_point(cfg, "both", 8.0, seed=7, stop=stop, workers=1)
    b = run_point(cfg, "both", 8.0, seed=7, stop=stop, workers=3)
    for det in ("ML", "GD"):
        assert (a[det].frames, a[det].bit_errors) == (b[det].frames, b[det].bit_errors)
    c = run_point(cfg, "both", 8.0, seed=8, stop=stop)
    assert c["ML"].bit_errors != a["ML"].bit_errors or c["ML"].frames != a["ML"].frames


def test_stop_rule_caps_frames():
    est = run_point(SystemConfig(4, 1, 4, 1), "ml", 40.0, seed=0, stop=StopRule(10**6, 1234))["ML"]
    assert est.frames == 1234
    assert est.total_bits == 1234 * 32 * 4


def test_paired_detectors_see_same_frames():
    est = run_point(SystemConfig(4, 2, 2, 2), "both", 5.0, seed=2, stop=StopRule(500, 10**6))
    assert est["ML"].frames == est["GD"].frames
    assert min(e.bit_errors for e in est.values()) >= 500


def test_single_detector_matches_paired_run():
    cfg = SystemConfig(4, 2, 4, 1)
    stop = StopRule(10**6, 3000)
    alone = run_point(cfg, "GD", 6.0, seed=4, stop=stop)["GD"]
    paired = run_point(cfg, "both", 6.0, seed=4, stop=stop)["GD"]
    assert alone.bit_errors == paired.bit_errors


def test_estimate_statistics():
    e = BerEstimate("ML", frames=10, total_bits=1000, index_bits=400, index_bit_errors=4,
                    symbol_bit_errors=6, seed=0)
    assert e.ber == 0.01
    assert e.index_ber == 0.01
    assert e.symbol_ber == 0.01
    assert e.ci95 == pytest.approx(1.96 * np.sqrt(0.01 * 0.99 / 1000))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        StopRule(0, 10)
    with pytest.raises(ValueError):
        run_point(SystemConfig(2, 1, 2), "zf", 0.0)


def test_sweep_attaches_theory():
    cfg = SystemConfig(2, 1, 2, 2)
    points = sweep(cfg, "both", [0.0, 5.0], seed=0, stop=StopRule(100, 5000))
    assert [p.gamma0_db for p in points] == [0.0, 5.0]
    assert points[1].theory.ber_ml == pytest.approx(analytics.ber_ml(10 ** 0.5, cfg))
    assert points[1].asymptote_gd == pytest.approx(analytics.asymptote("GD", cfg).at(10 ** 0.5))


def test_empirical_mgf():
    cfg = SystemConfig(2, 1, 2, 2)
    emp = empirical_mgf(cfg, 0.2, [0.0, -0.5], 10**6, seed=5)
    assert emp["nu"][0] == 1.0 and emp["nu_hat"][0] == 1.0
    assert emp["nu"][1] == pytest.approx(analytics.mgf_nu(-0.5, 0.2, 2), rel=0.01)
    emp = empirical_mgf(SystemConfig(2, 1, 2, 4), 0.0, [-1.0], 10**6, seed=6)
    assert emp["nu_hat"][0] == pytest.approx(analytics.mgf_nu_hat(-1.0, 0.0, 4), rel=0.01)
    with pytest.raises(ValueError):
        empirical_mgf(cfg, 0.2, [0.5])


def test_gd_below_ml_under_fixed_csi_error():
    cfg = SystemConfig(4, 2, 2, 4, csi=CsiModel("fixed", 0.2))
    est = run_point(cfg, "both", 25.0, seed=9, stop=StopRule(600, 10**6))
    assert est["GD"].ber < est["ML"].ber
