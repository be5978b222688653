import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tntf import _backend
from tntf.framelet import (DCT_ROWS, Filter, FilterBank, bank_analysis, bank_synthesis,
                           convolve_periodic, dct_bank, dhf_bank, dump_pyramid,
                           udfmt_decompose, udfmt_reconstruct, verify_tffb)


def correlate_loops(x, taps, anchor, dilation):
    """Reference analysis: out[r, c] = sum_k taps[k] x[(r, c) + d (k - anchor)]."""
    h, w = x.shape
    out = np.zeros_like(x)
    for r in range(h):
        for c in range(w):
            acc = 0.0
            for (a, b), t in np.ndenumerate(taps):
                acc += t * x[(r + dilation * (a - anchor[0])) % h,
                             (c + dilation * (b - anchor[1])) % w]
            out[r, c] = acc
    return out


def all_filters():
    return [(name, i, f) for name, bank in (("dhf", dhf_bank()), ("dct", dct_bank()))
            for i, f in enumerate(bank.filters)]


# --- banks -----------------------------------------------------------------

def test_dhf_taps():
    b = dhf_bank()
    np.testing.assert_array_equal(b.lowpass.taps, np.full((2, 2), 0.25))
    assert np.linalg.norm(b.highpass[0].taps) == pytest.approx(np.sqrt(2) / 4, abs=1e-15)
    assert len(b.highpass) == 6
    for f in b.highpass:
        assert f.taps.sum() == 0.0
    assert abs(b.lowpass.symbol(0.0, 0.0)) ** 2 == pytest.approx(1.0, abs=1e-15)


def test_dct_taps():
    b = dct_bank()
    np.testing.assert_allclose(b.lowpass.taps, np.full((3, 3), 1 / 9), atol=1e-16)
    for f in b.filters:
        assert np.linalg.norm(f.taps) == pytest.approx(1 / 3, abs=1e-15)
    np.testing.assert_allclose(DCT_ROWS @ DCT_ROWS.T, np.eye(3), atol=1e-15)
    assert b.anchor == (1, 1)


def test_bank_validation():
    with pytest.raises(ValueError):
        FilterBank(Filter(np.ones((2, 2))), [Filter(np.ones((3, 3)))])
    with pytest.raises(ValueError):
        dhf_bank(0)
    with pytest.raises(ValueError):
        Filter(np.ones(3))


# --- convolution -------------------------------------------------------------

@pytest.mark.parametrize("name,i,f", all_filters())
def test_constant_image(name, i, f):
    x = np.full((8, 8), 0.37)
    y = convolve_periodic(x, f, dilation=2)
    if i == 0:
        np.testing.assert_allclose(y, 0.37 * f.taps.sum(), atol=1e-15)
    else:
        np.testing.assert_allclose(y, 0.0, atol=1e-15)


@pytest.mark.parametrize("dilation", [1, 2, 3])
@pytest.mark.parametrize("name,i,f", all_filters())
def test_convolve_matches_loops_and_adjoint(rng, name, i, f, dilation):
    x, y = rng.standard_normal((2, 8, 9))
    fx = convolve_periodic(x, f, dilation)
    np.testing.assert_allclose(fx, correlate_loops(x, f.taps, f.anchor, dilation), atol=1e-14)
    lhs = np.vdot(fx, y)
    rhs = np.vdot(x, convolve_periodic(y, f, dilation, adjoint=True))
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_filter_too_large():
    with pytest.raises(ValueError):
        convolve_periodic(np.zeros((4, 4)), dct_bank().lowpass, dilation=2)


@pytest.mark.skipif("cython" not in _backend.available(), reason="compiled kernels not built")
@settings(max_examples=25, deadline=None)
@given(h=st.integers(5, 12), w=st.integers(5, 12), d=st.integers(1, 2),
       seed=st.integers(0, 2 ** 32 - 1))
def test_backends_agree(h, w, d, seed):
    r = np.random.default_rng(seed)
    x = r.standard_normal((h, w))
    py, cy = _backend.get("python"), _backend.get("cython")
    for bank in (dhf_bank(), dct_bank()):
        taps = bank.stacked()
        a = bank_analysis(x, taps, bank.anchor, d, backend=py)
        b = bank_analysis(x, taps, bank.anchor, d, backend=cy)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-14)
        c = r.standard_normal(a.shape)
        np.testing.assert_allclose(bank_synthesis(c, taps, bank.anchor, d, backend=py),
                                   bank_synthesis(c, taps, bank.anchor, d, backend=cy),
                                   rtol=0, atol=1e-13)


def test_backend_selection():
    assert _backend.name in _backend.available()
    with pytest.raises(ValueError):
        _backend.get("fortran")


# --- transform ---------------------------------------------------------------

def test_decompose_constant():
    pyr = udfmt_decompose(np.full((8, 8), 0.7), [dhf_bank()])
    assert pyr.levels[0].shape == (6, 8, 8)
    np.testing.assert_allclose(pyr.levels[0], 0.0, atol=1e-15)
    np.testing.assert_allclose(pyr.coarse, 0.7, atol=1e-15)


def test_two_level_shapes(rng):
    pyr = udfmt_decompose(rng.random((16, 16)), [dhf_bank(1), dct_bank(2)])
    assert [w.shape for w in pyr.levels] == [(6, 16, 16), (8, 16, 16)]
    assert pyr.coarse.shape == (16, 16)
    assert pyr.dilations == [1, 2]
    assert len(list(pyr.planes())) == 15


def test_vertical_step_edge():
    x = np.zeros((8, 8))
    x[:, 4:] = 1.0
    w = udfmt_decompose(x, [dhf_bank()]).levels[0]
    # planes 2..5 hold tau_3..tau_6
    np.testing.assert_array_equal(w[3], 0.0)
    np.testing.assert_array_equal(w[5], 0.0)
    for p in (w[2], w[4]):
        cols = np.flatnonzero(np.abs(p).sum(axis=0))
        assert set(cols) == {3, 7}  # the edge column and the periodic wrap


@pytest.mark.parametrize("banks", [[dhf_bank()], [dhf_bank(1), dct_bank(2)],
                                   [dct_bank(1), dhf_bank(2), dhf_bank(4)]])
def test_perfect_reconstruction(rng, banks):
    x = rng.random((32, 32))
    pyr = udfmt_decompose(x, banks)
    assert np.max(np.abs(udfmt_reconstruct(pyr, banks) - x)) < 1e-12
    np.testing.assert_allclose(udfmt_reconstruct(pyr.scaled(-2.5), banks), -2.5 * x, atol=1e-12)
    zero = pyr.scaled(0.0)
    assert np.all(udfmt_reconstruct(zero, banks) == 0.0)


def test_reconstruct_mismatch(rng):
    pyr = udfmt_decompose(rng.random((16, 16)), [dhf_bank()])
    with pytest.raises(ValueError):
        udfmt_reconstruct(pyr, [dct_bank()])
    with pytest.raises(ValueError):
        udfmt_reconstruct(pyr, [dhf_bank(), dct_bank()])


@pytest.mark.parametrize("bank", [dhf_bank(), dct_bank(), dct_bank(2)])
def test_energy_split(rng, bank):
    x = rng.standard_normal((16, 16))
    coeffs = bank_analysis(x, bank.stacked(), bank.anchor, bank.dilation)
    assert np.sum(coeffs ** 2) == pytest.approx(np.sum(x ** 2), rel=1e-12)


def test_verify_tffb():
    r = verify_tffb(dhf_bank(), 64)
    assert r["max_tffb_residual"] < 1e-12 and r["max_pou_residual"] < 1e-12
    r = verify_tffb(dct_bank(), 64)
    assert r["max_pou_residual"] < 1e-12
    # the 3x3 DCT bank is not a full tight framelet filter bank
    assert r["max_tffb_residual"] > 0.1
    b = dhf_bank()
    scaled = FilterBank(Filter(2 * b.lowpass.taps), b.highpass)
    assert verify_tffb(scaled, 16)["max_pou_residual"] >= 3 - 1e-12
    with pytest.raises(ValueError):
        verify_tffb(b, 4)


def test_dump_pyramid(tmp_path, rng):
    import json

    banks = [dhf_bank(1), dct_bank(2)]
    pyr = udfmt_decompose(rng.random((16, 16)), banks)
    dump_pyramid(pyr, banks, tmp_path)
    index = json.loads((tmp_path / "index.json").read_text())
    assert len(index) == 15
    for entry in index:
        assert (tmp_path / entry["file"]).exists()
