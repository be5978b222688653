import numpy as np
import pytest

from tntf import compare
from tntf.compare import compare_modes, format_table, grid_search, write_table_csv
from tntf.imagecore import make_synthetic
from tntf.solver import SolverConfig


@pytest.fixture(scope="module")
def small():
    truth = make_synthetic("square-circle", 32, 0)
    z, results = compare_modes(truth, 0.02, 0, ["tntf", "dct"],
                               {"tntf": [1e-4, 3e-4], "dct": [0.0, 1.0]},
                               SolverConfig(max_iters=30))
    return truth, z, results


def test_rows_and_choice(small):
    truth, z, results = small
    assert [r.mode for r in results] == ["tntf", "dct-only"]
    tntf, dct = results
    assert len(tntf.trials) == 2
    assert tntf.psnr == max(p for _, p in tntf.trials)
    # the base weight does not enter dct-only, so only one run is made
    assert len(dct.trials) == 1 and dct.base_lambda == 0.0
    assert tntf.iters == 30


def test_table_formats(small, tmp_path):
    _, _, results = small
    text = format_table(results, observed_psnr=20.0)
    assert text.splitlines()[0].split() == ["mode", "lambda", "PSNR", "SSIM", "iters", "seconds"]
    assert text.endswith("observed PSNR: 20.00 dB")
    p = tmp_path / "t.csv"
    write_table_csv(results, p)
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(compare.TABLE_COLUMNS) and len(lines) == 3


def test_ties_keep_first(monkeypatch):
    truth = make_synthetic("square-circle", 32, 0)

    class Fake:
        iterations = 1
        image = truth

    monkeypatch.setattr("tntf.solver.restore", lambda z, cfg: Fake())
    res = grid_search(truth, truth, "tntf", [5e-4, 1e-4, 2e-4], SolverConfig())
    assert res.base_lambda == 5e-4


def test_errors():
    truth = np.zeros((32, 32))
    with pytest.raises(ValueError):
        compare_modes(truth, 0.02, 0, [], [1e-3])
    with pytest.raises(ValueError):
        compare_modes(truth, 0.02, 0, ["tntf"], [])
