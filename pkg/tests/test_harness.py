import csv
from pathlib import Path

import numpy as np
import pytest

from activessc import harness
from activessc.cli import main
from activessc.datagen import SubspaceModel, generate, save_matrix
from activessc.pipeline import AlgorithmParams, Variant, run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = """
ambient_dim = 15
n_subspaces = 2
subspace_dim = 3
samples_per_subspace = 10
noise_level = 0.3
variant = a-omp-ssc
d = 2
b = 1
p = 0.5
trials = 1
master_seed = 7
"""


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_parse_minimal_and_cells():
    spec = harness.parse_config(MINIMAL)
    assert spec.ambient_dim == 15 and spec.trials == 1
    assert spec.cells() == [
        dict(variant=Variant.A_OMP_SSC, noise_level=0.3, subspace_dim=3, samples_per_subspace=10, d=2, b=1.0, p=0.5)
    ]


def test_parse_list_axes_cross_product():
    spec = harness.parse_config(MINIMAL.replace("b = 1", "b = 0, 1, 2").replace("p = 0.5", "p = 0, 0.8"))
    assert len(spec.cells()) == 6


@pytest.mark.parametrize(
    "text",
    [
        MINIMAL.replace("trials = 1", "trials = 0"),
        MINIMAL.replace("b = 1", "b ="),
        MINIMAL.replace("d = 2", "d = two"),
        MINIMAL + "\nbogus = 3\n",
        MINIMAL.replace("ambient_dim = 15", ""),
        MINIMAL.replace("subspace_dim = 3", "subspace_dim = 9"),
        MINIMAL.replace("p = 0.5", "p = 1.5"),
        MINIMAL.replace("variant = a-omp-ssc", "variant = kmeans"),
    ],
)
def test_config_errors(text):
    with pytest.raises(harness.ConfigError):
        harness.parse_config(text)


def test_shipped_configs_parse():
    paths = sorted(CONFIGS.glob("*.cfg"))
    assert len(paths) >= 5
    for path in paths:
        harness.load_config(path)


def test_minimal_sweep_one_row(tmp_path):
    spec = harness.parse_config(MINIMAL)
    out = harness.run_sweep(spec, output=tmp_path / "r.csv", jobs=1)
    rows = _read(out)
    assert len(rows) == 2
    assert rows[0] == spec.columns
    assert "wall_time" not in rows[0]


def test_sweep_is_byte_identical_serial_and_parallel(tmp_path):
    spec = harness.parse_config(MINIMAL.replace("trials = 1", "trials = 3").replace("p = 0.5", "p = 0, 0.5"))
    a = harness.run_sweep(spec, output=tmp_path / "a.csv", jobs=1)
    b = harness.run_sweep(spec, output=tmp_path / "b.csv", jobs=2)
    c = harness.run_sweep(spec, output=tmp_path / "c.csv", jobs=1)
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    assert len(_read(a)) == 1 + 2 * 3


def test_float_formatting_nine_significant_digits():
    assert harness.fmt(1 / 3) == "0.333333333"
    assert harness.fmt(123456.789012) == "123456.789"
    assert harness.fmt(Variant.OMP_SSC) == "omp-ssc"


def test_child_seeds_distinct():
    for master in (0, 1, 2017):
        seeds = {harness.child_seed(master, c, t) for c in range(40) for t in range(100)}
        assert len(seeds) == 4000


def test_trial_uses_child_seed_reproducibly():
    spec = harness.parse_config(MINIMAL)
    row = harness._run_trial((spec, 0, spec.cells()[0], 0))
    seed = harness.child_seed(7, 0, 0)
    assert row["seed"] == seed
    ds = generate(SubspaceModel.uniform(15, 2, 3, 10, 0.3, seed))
    res = run(ds, AlgorithmParams(Variant.A_OMP_SSC, d=2, b=1.0, p=0.5, seed=seed))
    assert row["error_rate"] == res.error_rate
    assert row["inner_products"] == res.inner_products


def test_omp_counter_scales_quadratically():
    counts = []
    for n in (20, 40):
        ds = generate(SubspaceModel.uniform(30, 3, 4, n, 0.3, seed=1))
        counts.append(run(ds, AlgorithmParams.omp(d=3)).inner_products)
        N = 3 * n
        assert counts[-1] == N * 3 * (N - 1)
    # (120 * 119) / (60 * 59): quadrupling up to the N - 1 factor
    assert counts[1] / counts[0] == pytest.approx(120 * 119 / (60 * 59))


def _write_results(path, rows):
    cols = ["variant", "b", "error_rate", "inner_products"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        w.writerows(rows)


def test_summarize_constant_group(tmp_path):
    _write_results(tmp_path / "r.csv", [["omp-ssc", "0", "0.25", "100"]] * 100)
    [row] = harness.summarize(tmp_path / "r.csv", ["variant"])
    assert row.count == 100
    assert row.stats["error_rate"] == (pytest.approx(0.25), 0.0)
    assert (tmp_path / "r_summary.csv").exists() and (tmp_path / "r_summary.dat").exists()


def test_summarize_hand_computed(tmp_path):
    rows = [["x", "0", "0.1", "1"], ["x", "0", "0.3", "3"], ["x", "1", "0.5", "5"], ["y", "1", "0.0", "2"]]
    _write_results(tmp_path / "r.csv", rows)
    out = {r.key: r for r in harness.summarize(tmp_path / "r.csv", ["variant", "b"], output=tmp_path / "s.csv")}
    assert out[("x", "0")].stats["error_rate"][0] == pytest.approx(0.2)
    # sample std of (0.1, 0.3) is 0.1414..., over sqrt(2)
    assert out[("x", "0")].stats["error_rate"][1] == pytest.approx(0.1)
    assert out[("x", "1")].stats["inner_products"] == (pytest.approx(5.0), 0.0)
    dat = (tmp_path / "s.dat").read_text().splitlines()
    assert dat[0].startswith("# variant b count")
    assert len(dat) == 4


def test_summarize_errors(tmp_path):
    _write_results(tmp_path / "r.csv", [["x", "0", "abc", "1"]])
    with pytest.raises(ValueError):
        harness.summarize(tmp_path / "r.csv", ["variant"])
    with pytest.raises(ValueError):
        harness.summarize(tmp_path / "r.csv", ["nope"])


def test_timing_comparison_sweep(tmp_path):
    text = """
ambient_dim = 30
n_subspaces = 3
subspace_dim = 5
samples_per_subspace = 30
noise_level = 0.5
variant = l1-ssc, omp-ssc, a-omp-ssc
d = 3
b = 1
p = 0.8
trials = 2
master_seed = 5
record_time = true
"""
    spec = harness.parse_config(text)
    out = harness.run_sweep(spec, output=tmp_path / "t.csv", jobs=1)
    summary = {r.key[0]: r.stats for r in harness.summarize(out, ["variant"])}
    assert summary["l1-ssc"]["wall_time"][0] > summary["omp-ssc"]["wall_time"][0]
    assert summary["l1-ssc"]["wall_time"][0] > summary["a-omp-ssc"]["wall_time"][0]
    assert summary["a-omp-ssc"]["inner_products"][0] <= summary["omp-ssc"]["inner_products"][0]


@pytest.fixture
def saved_dataset(tmp_path):
    ds = generate(SubspaceModel.uniform(20, 2, 3, 15, 0.3, seed=3))
    save_matrix(tmp_path / "x.csv", ds.X, tmp_path / "y.txt", ds.truth)
    return ds, tmp_path / "x.csv", tmp_path / "y.txt"


def test_run_single_matches_in_memory(saved_dataset):
    ds, x_path, y_path = saved_dataset
    params = AlgorithmParams(Variant.A_OMP_SSC, d=2, b=0.5, p=0.2, seed=4)
    record = harness.run_single(x_path, y_path, params)
    res = run(ds, params)
    assert record["error_rate"] == res.error_rate
    assert record["sdp_percentage"] == res.sdp_percentage
    assert record["inner_products"] == res.inner_products
    assert np.array_equal(record["labels"], res.labels)


def test_run_single_without_labels(saved_dataset):
    _, x_path, _ = saved_dataset
    record = harness.run_single(x_path, None, AlgorithmParams.omp(k=2))
    assert "error_rate" not in record and "sdp_percentage" not in record
    assert len(record["labels"]) == 30


def test_cli_single(saved_dataset, capsys):
    _, x_path, y_path = saved_dataset
    assert main(["single", str(x_path), "--labels", str(y_path), "--variant", "a-omp-ssc",
                 "--b", "0.5", "--p", "0.2", "--d", "3", "--k", "2", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "error_rate:" in out and "labels:" in out
    assert main(["single", str(x_path), "--k", "2", "--variant", "omp-ssc"]) == 0
    out = capsys.readouterr().out
    assert "error_rate" not in out and "labels:" in out


def test_cli_sweep_and_summarize(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(MINIMAL.replace("trials = 1", "trials = 2"))
    out = tmp_path / "r.csv"
    assert main(["--jobs", "1", "sweep", str(cfg), "--out", str(out)]) == 0
    assert len(_read(out)) == 3
    assert main(["summarize", str(out), "--group-by", "variant,p"]) == 0
    assert "a-omp-ssc" in capsys.readouterr().out


def test_cli_reports_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("ambient_dim = 4\n")
    assert main(["sweep", str(cfg)]) == 2
    assert "error:" in capsys.readouterr().err
    (tmp_path / "x.csv").write_text("1,0,1\n0,1,1\n")
    (tmp_path / "y.txt").write_text("0\n")
    assert main(["single", str(tmp_path / "x.csv"), "--labels", str(tmp_path / "y.txt")]) == 2


def test_subset_trials_on_synthetic_groups():
    ds = generate(SubspaceModel.uniform(30, 5, 3, 12, 0.2, seed=8))
    params = {"omp": AlgorithmParams.omp(d=2), "aomp": AlgorithmParams(Variant.A_OMP_SSC, d=2, b=0.5, p=0.2)}
    errs = harness.subset_trials(ds, k=2, trials=4, params=params, seed=3)
    assert set(errs) == {"omp", "aomp"}
    assert errs["omp"].shape == (4,)
    assert np.all((errs["aomp"] >= 0) & (errs["aomp"] <= 1))
    again = harness.subset_trials(ds, k=2, trials=4, params=params, seed=3)
    assert np.array_equal(errs["aomp"], again["aomp"])
    with pytest.raises(ValueError):
        harness.subset_trials(ds, k=6, trials=1, params=params)
