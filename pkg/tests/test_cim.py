import math

import numpy as np
import pytest

from caeac.cim import (
    SIGMA_FLOOR,
    BandwidthError,
    CimVariant,
    cim,
    cim_clustering,
    cim_individual,
    correntropy,
    estimate_bandwidth,
    estimate_bandwidth_per_attribute,
    estimate_group_bandwidths,
    gaussian_kernel,
    group_bandwidths_from_attributes,
    pairwise_cim,
    silverman_factor,
)
from caeac.grouping import AttributeGrouping

import oracles

# frozen from the closed forms via math.exp / math.sqrt (tests/oracles.py)
K_05 = 0.6065306597126334  # exp(-0.5)
K_45 = 0.011108996538242306  # exp(-4.5)
CIM_01 = 0.6272713450233213  # sqrt(1 - exp(-0.5))
CIM_00_01 = 0.443547821709997  # sqrt(1 - (1 + exp(-0.5)) / 2)
CIM_IND_12 = 0.48502929652915766  # (sqrt(1 - e^-0.5) + sqrt(1 - e^-0.125)) / 2
SIG_16 = 0.6299605249474366  # 16 ** (-1/6)
SIG_D1 = 0.8433692126854998  # (4/3) ** 0.2 * 2 * 100 ** -0.2


def test_frozen_values_match_oracle():
    assert math.exp(-0.5) == pytest.approx(K_05, abs=1e-15)
    assert oracles.cim_base([0], [1], 1.0) == pytest.approx(CIM_01, abs=1e-15)
    assert oracles.cim_base([0, 0], [0, 1], 1.0) == pytest.approx(CIM_00_01, abs=1e-15)
    assert oracles.cim_per_attribute([0, 0], [1, 1], [1, 2]) == pytest.approx(CIM_IND_12, abs=1e-15)
    assert oracles.silverman(2.0, 1, 100) == pytest.approx(SIG_D1, abs=1e-15)


def test_kernel_hand_values():
    assert gaussian_kernel(0, 1, 1) == pytest.approx(K_05, abs=1e-6)
    assert gaussian_kernel(0, 3, 1) == pytest.approx(K_45, abs=1e-6)
    assert gaussian_kernel(2.5, 2.5, 0.1) == 1.0


def test_kernel_elementwise():
    out = gaussian_kernel(np.zeros(3), np.array([0.0, 1.0, 3.0]), np.array([1.0, 1.0, 1.0]))
    np.testing.assert_allclose(out, [1.0, K_05, K_45], atol=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
def test_kernel_rejects_bad_bandwidth(bad):
    with pytest.raises(BandwidthError):
        gaussian_kernel(0, 1, bad)


def test_cim_hand_values():
    assert cim([0], [1], 1) == pytest.approx(CIM_01, abs=1e-6)
    assert cim([0, 0], [0, 1], 1) == pytest.approx(CIM_00_01, abs=1e-6)
    assert correntropy([0, 0], [0, 1], 1) == pytest.approx((1 + K_05) / 2, abs=1e-12)


def test_cim_individual_hand_values():
    assert cim_individual([0], [1], [1]) == pytest.approx(CIM_01, abs=1e-6)
    assert cim_individual([0, 0], [1, 1], [1, 2]) == pytest.approx(CIM_IND_12, abs=1e-6)


def test_cim_clustering_hand_value():
    # two groups: {0} with sigma 1 and {1, 2} with sigma 2
    got = cim_clustering([0, 0, 0], [1, 1, 2], [[0], [1, 2]], [1.0, 2.0])
    assert got == pytest.approx(oracles.cim_groups([0, 0, 0], [1, 1, 2], [[0], [1, 2]], [1.0, 2.0]), abs=1e-12)


def test_dimension_errors():
    with pytest.raises(ValueError):
        cim([0, 1], [0], 1)
    with pytest.raises(ValueError):
        cim([], [], 1)
    with pytest.raises(ValueError):
        cim_individual([0, 1], [0, 1], [1.0])
    with pytest.raises(ValueError):
        cim_clustering([0, 1], [0, 1], [[0, 1]], [1.0, 1.0])
    with pytest.raises(ValueError):
        cim_clustering([0, 1], [0, 1], [[0]], [1.0])


def test_cim_random_against_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        d = int(rng.integers(1, 8))
        x, y = rng.normal(size=d), rng.normal(size=d)
        s = float(rng.uniform(0.1, 3))
        sv = rng.uniform(0.1, 3, size=d)
        assert cim(x, y, s) == pytest.approx(oracles.cim_base(x, y, s), abs=1e-12)
        assert cim_individual(x, y, sv) == pytest.approx(oracles.cim_per_attribute(x, y, sv), abs=1e-12)


def test_variant_parse():
    assert CimVariant.parse("Individual") is CimVariant.INDIVIDUAL
    assert CimVariant.parse(CimVariant.BASE) is CimVariant.BASE
    with pytest.raises(ValueError, match="unknown CIM variant"):
        CimVariant.parse("cosine")


def test_silverman_factor_and_bandwidth_hand_values():
    assert silverman_factor(2, 16) == pytest.approx(SIG_16, abs=1e-12)
    vec, med = estimate_bandwidth([[-1.0, -1.0], [1.0, 1.0]], 16)  # population std 1
    np.testing.assert_allclose(vec, [SIG_16, SIG_16], atol=1e-6)
    assert med == pytest.approx(SIG_16, abs=1e-6)
    _, med = estimate_bandwidth([[-2.0], [2.0]], 100)
    assert med == pytest.approx(SIG_D1, abs=1e-6)
    per = estimate_bandwidth_per_attribute([[-1.0, -2.0], [1.0, 2.0]], 16)
    np.testing.assert_allclose(per, [SIG_16, 2 * SIG_16], atol=1e-6)


def test_group_bandwidth_hand_value():
    w = [[-1.0, -3.0], [1.0, 3.0]]
    g = AttributeGrouping.single(2)
    assert estimate_group_bandwidths(w, g, 16)[0] == pytest.approx(2 * SIG_16, abs=1e-6)
    attr = estimate_bandwidth_per_attribute(w, 16)
    assert group_bandwidths_from_attributes(attr, g, 16)[0] == pytest.approx(2 * SIG_16, abs=1e-12)


def test_group_bandwidths_use_group_size():
    rng = np.random.default_rng(3)
    w = rng.normal(size=(30, 5)) * [1, 2, 3, 4, 5]
    g = AttributeGrouping([[0, 3], [1], [2, 4]], 5)
    direct = estimate_group_bandwidths(w, g, 40)
    std = w.std(axis=0)
    want = [np.mean([oracles.silverman(std[i], len(grp), 40) for i in grp]) for grp in g.groups]
    np.testing.assert_allclose(direct, want, rtol=1e-12)
    via_attr = group_bandwidths_from_attributes(estimate_bandwidth_per_attribute(w, 40), g, 40)
    np.testing.assert_allclose(via_attr, direct, rtol=1e-12)
    stacked = group_bandwidths_from_attributes(np.vstack([estimate_bandwidth_per_attribute(w, 40)] * 3), g, 40)
    assert stacked.shape == (3, 3)


def test_constant_window_hits_floor():
    vec, med = estimate_bandwidth(np.ones((5, 3)), 10)
    assert np.all(vec == SIGMA_FLOOR) and med == SIGMA_FLOOR


def test_single_point_window():
    vec, med = estimate_bandwidth([[1.0, 2.0]], 10)
    assert med == SIGMA_FLOOR


def test_pairwise_cim_matches_scalar():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(6, 3))
    m = pairwise_cim(pts, 0.8)
    for i in range(6):
        for j in range(6):
            assert m[i, j] == pytest.approx(cim(pts[i], pts[j], 0.8), abs=1e-12)


# ---------------------------------------------------------------- properties
# each runs 1000 random cases


def _cases(seed, n=1000):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        d = int(rng.integers(1, 10))
        yield rng, d, rng.normal(scale=3, size=d), rng.normal(scale=3, size=d)


def test_property_identity():
    for rng, d, x, _ in _cases(100):
        s = float(rng.uniform(0.05, 5))
        assert cim(x, x, s) == 0.0
        assert cim_individual(x, x, rng.uniform(0.05, 5, size=d)) == 0.0
        assert cim_clustering(x, x, AttributeGrouping.single(d), [s]) == 0.0


def test_property_symmetry():
    for rng, d, x, y in _cases(101):
        s = float(rng.uniform(0.05, 5))
        sv = rng.uniform(0.05, 5, size=d)
        assert cim(x, y, s) == cim(y, x, s)
        assert cim_individual(x, y, sv) == cim_individual(y, x, sv)


def test_property_range():
    for rng, d, x, y in _cases(102):
        s = float(rng.uniform(0.05, 5))
        for v in (cim(x, y, s), cim_individual(x, y, rng.uniform(0.05, 5, size=d))):
            assert 0.0 <= v <= 1.0


def test_property_monotone_in_distance():
    # moving y away from x along a fixed direction never decreases CIM
    for rng, d, x, y in _cases(103):
        s = float(rng.uniform(0.05, 5))
        t1, t2 = sorted(rng.uniform(0, 3, size=2))
        near, far = x + t1 * (y - x), x + t2 * (y - x)
        assert cim(x, near, s) <= cim(x, far, s) + 1e-15
        sv = rng.uniform(0.05, 5, size=d)
        assert cim_individual(x, near, sv) <= cim_individual(x, far, sv) + 1e-15
