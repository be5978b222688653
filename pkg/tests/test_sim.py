import math

import numpy as np
import pytest

from tntf.linops import BlurOperator
from tntf.sim import DegradationSpec, degrade, gaussian_field, splitmix64

MASK = 2 ** 64 - 1


def splitmix_ref(seed, counter):
    z = (seed + (counter + 1) * 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def test_splitmix_reference_stream():
    # published SplitMix64 outputs for seeds 0 and 1234567
    assert [int(v) for v in splitmix64(0, [0, 1, 2])] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    assert [int(v) for v in splitmix64(1234567, [0, 1])] == [
        6457827717110365317, 3203168211198807973]


def test_splitmix_matches_python_ints():
    seed = 2 ** 63 + 12345
    cs = [0, 1, 7, 2 ** 40]
    assert [int(v) for v in splitmix64(seed, cs)] == [splitmix_ref(seed, c) for c in cs]


def test_gaussian_field_recipe():
    seed = 99
    g = gaussian_field((3, 4), seed).ravel()
    for i in range(12):
        r0, r1 = splitmix_ref(seed, 2 * i), splitmix_ref(seed, 2 * i + 1)
        u1 = ((r0 >> 11) + 1) * 2.0 ** -53
        u2 = (r1 >> 11) * 2.0 ** -53
        assert g[i] == pytest.approx(math.sqrt(-2 * math.log(u1)) * math.cos(2 * math.pi * u2),
                                     rel=1e-14, abs=1e-15)


def test_gaussian_field_frozen():
    np.testing.assert_allclose(
        gaussian_field((2, 3), 0).ravel(),
        [-0.452757740217458, 2.650605812079669, -0.9886041246243269,
         0.252462724150614, 1.5999936337519396, 0.0942334042464267], rtol=1e-14)


def test_noiseless_blur():
    u = np.full((16, 16), 0.42)
    np.testing.assert_allclose(degrade(u, DegradationSpec(0.0)), 0.42, atol=1e-15)
    x = np.random.default_rng(1).random((16, 16))
    assert np.array_equal(degrade(x, DegradationSpec(0.0, 5)), BlurOperator().apply(x))


def test_determinism():
    u = np.random.default_rng(2).random((32, 32))
    a = degrade(u, DegradationSpec(0.03, 7))
    assert np.array_equal(a, degrade(u, DegradationSpec(0.03, 7)))
    assert not np.array_equal(a, degrade(u, DegradationSpec(0.03, 8)))


def test_noise_statistics():
    u = np.full((256, 256), 0.5)
    eta = degrade(u, DegradationSpec(0.03, 0)) - BlurOperator().apply(u)
    assert abs(eta.mean()) <= 3 * 0.03 / 256
    assert abs(eta.std() - 0.03) <= 0.02 * 0.03
    assert abs(np.mean(eta ** 2) / 0.03 ** 2 - 1) < 0.05


def test_not_clipped():
    u = np.ones((16, 16))
    z = degrade(u, DegradationSpec(0.1, 0))
    assert z.max() > 1.0


def test_spec_validation():
    with pytest.raises(ValueError):
        DegradationSpec(-0.1)
    with pytest.raises(ValueError):
        DegradationSpec(0.1, kernel="gauss")
    with pytest.raises(ValueError):
        DegradationSpec(0.1, seed=-1)
    with pytest.raises(ValueError):
        degrade(np.zeros((4, 4)), DegradationSpec(0.1))
