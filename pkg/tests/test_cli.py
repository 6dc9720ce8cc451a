import json

import numpy as np
import pytest

from rvbggm.cli import git_blob_hash, main, sweep_points
from rvbggm.lattice import parse_coverings
from rvbggm.scaling import ScalingSample, model, write_samples_csv


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_blob_hash_matches_git():
    # `printf 'hello\n' | git hash-object --stdin`
    assert git_blob_hash(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"


def test_coverings_2x2(capsys):
    code, out, _ = run(["coverings", "--m", "2", "--mp", "2", "--bc", "open"], capsys)
    assert code == 0
    spec, covs = parse_coverings(out)
    assert len(covs) == 2 and "# count=2" in out
    for key in ("config=", "input_hash=", "seed=0", "version="):
        assert key in out


def test_coverings_4x4_matches_transfer(capsys):
    code, out, _ = run(["--m", "4", "--mp", "4", "coverings"], capsys)
    assert code == 0 and len(parse_coverings(out)[1]) == 36


@pytest.mark.parametrize("args,code", [
    (["coverings", "--m", "3", "--mp", "3"], 2),
    (["coverings", "--m", "4"], 2),
    (["coverings", "--m", "4", "--mp", "4", "--cap-coverings", "10"], 4),
    (["ggm", "--m", "6", "--mp", "3", "--bc", "ph"], 4),
    (["certify", "--m", "6", "--mp", "3", "--bc", "ph"], 4),
    (["sweep", "--m-min", "8", "--m-max", "6"], 2),
    (["ggm", "--m", "4", "--mp", "2", "--families", "triples", "--restricted"], 2),
    (["fit", "--input", "/nonexistent/sweep.csv"], 3),
    (["coverings", "--m", "2", "--mp", "2", "--out", "/nonexistent/dir/x.txt"], 3),
    (["--cap-exhaustive", "0", "coverings", "--m", "2", "--mp", "2"], 2),
])
def test_exit_codes(args, code, capsys):
    assert run(args, capsys)[0] == code


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as err:
        main(["ggm", "--bc", "torus"])
    assert err.value.code == 2


def test_ggm_two_sites(capsys):
    code, out, _ = run(["ggm", "--m", "2", "--mp", "1"], capsys)
    report = json.loads(out)
    assert code == 0 and abs(report["value"] - 0.5) < 1e-12
    assert report["certification"]["certified"]
    assert set(report["meta"]) == {"config", "input_hash", "seed", "version"}


def test_ggm_exact_and_restricted(tmp_path, capsys):
    out = tmp_path / "g.json"
    state = tmp_path / "s.json"
    table = tmp_path / "t.json"
    code, _, _ = run(["ggm", "--m", "4", "--mp", "2", "--bc", "ph", "--restricted", "--out", str(out),
                      "--dump-state", str(state), "--dump-table", str(table)], capsys)
    assert code == 0
    report = json.loads(out.read_text())
    assert abs(report["exact"]["value"] - 0.2837301587301586) < 1e-10
    assert report["agreement"] and report["restricted_is_upper_bound"]
    assert {"num_sites", "basis", "re", "im", "meta"} <= set(json.loads(state.read_text()))
    assert {"k_dim", "alpha", "a", "z", "conventions", "meta"} <= set(json.loads(table.read_text()))


def test_ggm_restricted_above_cap(capsys):
    code, out, _ = run(["ggm", "--m", "6", "--mp", "3", "--bc", "ph", "--restricted"], capsys)
    report = json.loads(out)
    assert code == 0 and report["search"] == "restricted"
    assert report["restricted"]["bound"] == "upper"


def test_certify_4x3(capsys):
    code, out, _ = run(["certify", "--m", "4", "--mp", "3", "--bc", "ph"], capsys)
    report = json.loads(out)
    assert code == 0 and report["certified"]
    assert report["ssa"]["trials"] == 200 and report["ssa"]["min_slack"] >= -1e-10
    assert {"min_mixedness", "worst_partition", "partitions_checked", "certified"} <= set(report)


def test_sweep_points():
    assert sweep_points(4, 6, ["perfect"], 12) == [("perfect", 4, 4), ("perfect", 6, 6)]
    assert sweep_points(4, 6, ["imperfect"], 12) == [
        ("imperfect", 4, 3), ("imperfect", 4, 5), ("imperfect", 6, 5), ("imperfect", 6, 7)]
    assert sweep_points(4, 6, ["imperfect"], 5) == [("imperfect", 4, 3), ("imperfect", 4, 5), ("imperfect", 6, 5)]


def test_sweep_schema_and_rows(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(["sweep", "--m-min", "4", "--m-max", "4", "--cap-exhaustive", "12", "--out", str(out)], capsys)
    assert code == 0
    lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert lines[0].split(",")[:6] == ["n_total", "family", "G", "lambda_sq", "partition_family", "wall_time"]
    rows = [ln.split(",") for ln in lines[1:]]
    assert [(r[0], r[1], r[9]) for r in rows] == [
        ("12", "imperfect", "exhaustive"), ("16", "perfect", "restricted"), ("20", "imperfect", "restricted")]
    assert all(r[5] == "NA" for r in rows)


def test_sweep_flushes_partial_results(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    # adjacent column pairs are out of reach at height 5, so that point fails
    code, _, _ = run(["sweep", "--m-min", "4", "--m-max", "6", "--kinds", "imperfect", "--cap-mp", "5",
                      "--families", "adjacent_column_pairs", "--cap-exhaustive", "12", "--out", str(out)], capsys)
    rows = [ln.split(",") for ln in out.read_text().splitlines() if not ln.startswith("#")][1:]
    assert code == 4
    assert [r[-1] for r in rows] == ["ok", "ok", "error:CapExceeded"]


def _write_synthetic(path, params=(0.358, 1.77, 1.82)):
    sizes = (8, 16, 24, 36, 48)
    g = model(np.array(sizes, float), *params, 1)
    path.write_text(write_samples_csv([ScalingSample(n, float(v)) for n, v in zip(sizes, g)]))


def test_fit_synthetic(tmp_path, capsys):
    data = tmp_path / "samples.csv"
    _write_synthetic(data)
    out = tmp_path / "fit.json"
    code, _, _ = run(["fit", "--input", str(data), "--out", str(out)], capsys)
    assert code == 0
    fit = json.loads(out.read_text())["fit"]
    assert abs(fit["g_c"] - 0.358) < 1e-6 and abs(fit["k"] - 1.77) < 1e-5 and abs(fit["x"] - 1.82) < 1e-5
    curve = (tmp_path / "fit.curve.csv").read_text().splitlines()
    body = [ln for ln in curve if not ln.startswith("#")]
    assert body[0] == "n,G_fitted" and len(body) == 65


def test_fit_error_codes(tmp_path, capsys):
    three = tmp_path / "three.csv"
    three.write_text("n_total,g,family\n8,0.3,perfect\n16,0.2,perfect\n24,0.1,perfect\n")
    assert run(["fit", "--input", str(three)], capsys)[0] == 5
    bad = tmp_path / "bad.csv"
    bad.write_text("n_total,g,family\nabc,0.3,perfect\n")
    assert run(["fit", "--input", str(bad)], capsys)[0] == 2
    flat = tmp_path / "flat.csv"
    flat.write_text("n_total,g,family\n8,0.3,perfect\n16,0.3,perfect\n24,0.3,perfect\n32,0.3,perfect\n")
    assert run(["fit", "--input", str(flat)], capsys)[0] == 5


def test_input_hash_tracks_input(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _write_synthetic(a)
    _write_synthetic(b, (0.3, 1.0, 1.5))
    run(["fit", "--input", str(a), "--out", str(tmp_path / "fa.json")], capsys)
    run(["fit", "--input", str(b), "--out", str(tmp_path / "fb.json")], capsys)
    ha = json.loads((tmp_path / "fa.json").read_text())["meta"]["input_hash"]
    hb = json.loads((tmp_path / "fb.json").read_text())["meta"]["input_hash"]
    assert ha != hb


def test_record_timings_adds_wall_time(capsys):
    code, out, _ = run(["ggm", "--m", "2", "--mp", "2", "--record-timings"], capsys)
    assert code == 0 and "timings" in json.loads(out)
