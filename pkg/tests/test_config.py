import math

import pytest

from mciksc.config import (
    MMSE,
    PERFECT,
    ConfigError,
    CsiModel,
    SystemConfig,
    derive,
    epsilon_for,
    parse_config,
    snr_to_active,
)


def test_derive_4_1_4():
    d = derive(SystemConfig(4, 1, 4))
    assert (d.index_bits, d.symbol_bits, d.total_bits) == (2, 2, 4)
    assert d.power_ratio == 4
    assert d.psk_rho == pytest.approx(0.5)
    assert d.sep_weight == 2
    assert d.index_weight == 1


def test_derive_2_1_2():
    d = derive(SystemConfig(2, 1, 2))
    assert (d.index_bits, d.symbol_bits) == (1, 1)
    assert d.index_weight == 2
    assert d.sep_weight == 1
    assert d.psk_rho == pytest.approx(1.0)
    assert d.index_pairs == 1


def test_derive_4_2_8_weighted_pairs():
    # floor(log2 6) = 2 index bits; 4 pairs weighted by (1*2 + 3)
    d = derive(SystemConfig(4, 2, 8))
    assert d.index_bits == 2
    assert d.symbol_bits == 6
    assert d.weighted_index_pairs == 20


def test_full_activation_has_no_index_bits():
    d = derive(SystemConfig(4, 4, 4))
    assert d.index_bits == 0
    assert d.index_pairs == 0
    assert d.codebook_size == 1


@pytest.mark.parametrize("db,n,k,expected", [(10, 4, 1, 40.0), (0, 2, 1, 2.0), (10, 4, 4, 10.0)])
def test_snr_to_active(db, n, k, expected):
    assert snr_to_active(db, SystemConfig(n, k, 2)) == pytest.approx(expected)


def test_epsilon_for():
    assert epsilon_for(PERFECT, 123.0) == 0.0
    assert epsilon_for(CsiModel("fixed", 0.2), 100.0) == 0.2
    assert epsilon_for(MMSE, 9.0) == pytest.approx(0.1)


def test_default_cluster_count():
    assert SystemConfig(4, 1, 4).g == 32
    assert SystemConfig(2, 1, 2).g == 64
    assert SystemConfig(4, 1, 4).n * SystemConfig(4, 1, 4).g == 128


@pytest.mark.parametrize("kwargs", [
    dict(n=4, k=5, m=4),
    dict(n=4, k=0, m=4),
    dict(n=4, k=1, m=3),
    dict(n=4, k=1, m=1),
    dict(n=4, k=1, m=4, l=0),
    dict(n=1, k=1, m=2),
])
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        SystemConfig(**kwargs)


@pytest.mark.parametrize("bad", [1.0, 1.5, -0.1])
def test_fixed_error_variance_range(bad):
    with pytest.raises(ConfigError):
        CsiModel("fixed", bad)


def test_csi_parse_round_trip():
    for text in ("perfect", "mmse", "fixed:0.2"):
        assert str(CsiModel.parse(text)) == text
    with pytest.raises(ConfigError):
        CsiModel.parse("fixed:abc")
    with pytest.raises(ConfigError):
        CsiModel.parse("oracle")


def test_parse_config_forms():
    a = parse_config("n=4 k=2 m=8 l=4 csi=fixed:0.2")
    b = parse_config('{"n": 4, "k": 2, "m": 8, "l": 4, "csi": "fixed:0.2"}')
    assert a == b
    assert a.csi.eps2 == 0.2
    assert parse_config(str(a.to_dict()).replace("'", '"')) == a


def test_parse_config_errors():
    with pytest.raises(ConfigError):
        parse_config("n=4 k=2")
    with pytest.raises(ConfigError):
        parse_config("n=4 k=2 m=4 z=1")
    with pytest.raises(ConfigError):
        parse_config("n=4 k=2 m=4 csi=fixed:1.0")


def test_replace_revalidates():
    cfg = SystemConfig(4, 2, 4)
    assert cfg.replace(l=3).l == 3
    with pytest.raises(ConfigError):
        cfg.replace(k=7)
    assert math.isclose(derive(cfg.replace(m=8)).psk_rho, math.sin(math.pi / 8) ** 2)
