import csv
import io
import json
import os
import subprocess
import sys

import pytest

from urndiv import bounds, cli, verify


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_figure_csv(capsys):
    code, out, _ = run(capsys, "figure", "--n", "100", "--k", "30")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 50
    assert list(rows[0]) == cli.FIGURE_COLUMNS
    assert abs(float(rows[0]["exact_D"]) - 0.04882251) <= 1e-8
    for r in rows:
        d = float(r["exact_D"])
        for col in ("stam_upper", "hm_upper", "thm1_upper", "prop12_upper"):
            assert d <= float(r[col])
    # 17 significant digits survive the round trip
    assert float(rows[0]["exact_D"]) == cli.figure_row(100, 30, 1)["exact_D"]


def test_figure_trivial_k1(capsys):
    code, out, _ = run(capsys, "figure", "--n", "10", "--k", "1")
    assert code == 0
    assert [float(r["exact_D"]) for r in rows_of(out)] == [0.0] * 5


@pytest.mark.parametrize("argv", [
    ["figure", "--c", "3"],
    ["figure", "--n", "10", "--k", "11"],
    ["figure", "--n", "10", "--ell-range", "0:3"],
    ["figure", "--threads", "0"],
    ["figure", "--bogus"],
    ["divergence", "--n", "4", "--k", "2", "--ell", "1,2"],
    ["bounds", "--n", "4", "--k", "2", "--ell", "a,b"],
    ["definetti", "--preset", "no-such-preset"],
    ["definetti"],
    ["definetti", "--preset", "iid-fair-coin", "--n-range", "1:3"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_csv_identical_across_runs_and_threads(tmp_path, capsys):
    paths = []
    for i, threads in enumerate(["1", "4", "1"]):
        p = tmp_path / f"fig{i}.csv"
        assert cli.main(["figure", "--n", "60", "--k", "20", "--threads", threads, "--out", str(p)]) == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] == paths[2]


def test_svg_does_not_touch_csv(tmp_path):
    plain, with_svg = tmp_path / "a.csv", tmp_path / "b.csv"
    svg1, svg2 = tmp_path / "a.svg", tmp_path / "b.svg"
    assert cli.main(["figure", "--n", "40", "--k", "12", "--out", str(plain)]) == 0
    assert cli.main(["figure", "--n", "40", "--k", "12", "--out", str(with_svg), "--svg", str(svg1)]) == 0
    assert plain.read_bytes() == with_svg.read_bytes()
    assert cli.main(["figure", "--n", "40", "--k", "12", "--out", str(with_svg), "--svg", str(svg2)]) == 0
    text = svg1.read_text()
    assert text.startswith("<?xml") and "<svg" in text
    assert svg1.read_bytes() == svg2.read_bytes()


def test_failed_write_leaves_previous_file(tmp_path, monkeypatch):
    target = tmp_path / "fig.csv"
    target.write_text("old\n")

    def boom(*args, **kwargs):
        raise RuntimeError("interrupted")

    monkeypatch.setattr(cli, "render_svg", boom)
    svg = tmp_path / "fig.svg"
    with pytest.raises(RuntimeError):
        cli.main(["figure", "--n", "20", "--k", "5", "--svg", str(svg), "--out", str(tmp_path / "new.csv")])
    assert not svg.exists()
    assert target.read_text() == "old\n"

    real_replace = os.replace
    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(RuntimeError):
        cli.main(["figure", "--n", "20", "--k", "5", "--out", str(target)])
    monkeypatch.setattr(os, "replace", real_replace)
    assert target.read_text() == "old\n"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["fig.csv", "new.csv"]


def test_json_format(capsys):
    code, out, _ = run(capsys, "figure", "--n", "10", "--k", "3", "--format", "json")
    data = json.loads(out)
    assert code == 0 and len(data) == 5 and data[0]["ell"] == 1


def test_bounds_and_divergence_commands(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "100", "--k", "60", "--ell", "30,70", "--format", "json")
    rep = json.loads(out)[0]
    assert code == 0 and rep["thm1_upper"] is None and rep["stam_upper"] > 0
    code, out, _ = run(capsys, "divergence", "--n", "100", "--k", "30", "--ell", "1,99",
                       "--certify", "--precision-bits", "96")
    row = rows_of(out)[0]
    assert code == 0
    assert float(row["certified_lo"]) <= 0.04882251409188014 <= float(row["certified_hi"])
    assert row["certified_contains"] == "true"


def test_definetti_presets(capsys):
    code, out, _ = run(capsys, "definetti", "--preset", "iid-fair-coin", "--n-range", "4:4", "--k-max", "2")
    rows = rows_of(out)
    assert code == 0 and list(rows[0]) == cli.DEFINETTI_COLUMNS
    assert abs(float(rows[1]["d"]) - 0.03226926) <= 5e-9
    code, out, _ = run(capsys, "definetti", "--preset", "point-mass-balanced", "--n-range", "4,6,8", "--k-max", "1")
    assert [float(r["d"]) for r in rows_of(out)] == [0.0, 0.0, 0.0]
    for preset in ("iid:0.2,0.3,0.5", "uniform:3", "uniform", "point-mass-balanced"):
        code, out, _ = run(capsys, "definetti", "--preset", preset, "--n-range", "3:9:3")
        assert code == 0
        for r in rows_of(out):
            assert float(r["d"]) <= float(r["chain_mid"]) + 1e-10 <= float(r["chain_max"]) + 2e-10
            assert r["monotone_in_k"] == "true"


def test_definetti_model_file(tmp_path, capsys):
    model = tmp_path / "fair.txt"
    model.write_text("# fair coin, n = 4\n4 2\n0 4 0.0625\n1 3 0.25\n2 2 0.375\n3 1 0.25\n4 0 0.0625000001\n")
    code, out, _ = run(capsys, "definetti", "--model", str(model), "--k-max", "2")
    assert code == 0 and abs(float(rows_of(out)[1]["d"]) - 0.03226926) <= 5e-9
    for bad in ["4 2\n0 4 0.5\n", "4\n2 2 1\n", "4 2\n2 2\n", "4 2\n2 1 1.0\n", "4 2\nx y 1\n", ""]:
        model.write_text(bad)
        code, _, err = run(capsys, "definetti", "--model", str(model))
        assert code == 2 and err
    code, _, _ = run(capsys, "definetti", "--model", str(tmp_path / "missing.txt"))
    assert code == 2


def test_verify_fast_passes(capsys):
    code, out, _ = run(capsys, "verify", "--level", "fast", "--threads", "2")
    assert code == 0
    assert "FAIL" not in out and out.count("PASS") == len(verify.SUITES)


def test_verify_catches_mistyped_stam_denominator(capsys, monkeypatch):
    def mistyped(n, k, c):
        if not 1 <= k <= n or c < 2:
            raise bounds.NotApplicable("out of range")
        num = (c - 1) * k * (k - 1)
        return num / (2 * (n - 1) * (n - k - 1)), num / (4 * (n - 1) ** 2)

    monkeypatch.setattr(bounds, "stam_bounds", mistyped)
    code, out, _ = run(capsys, "verify", "--level", "fast")
    assert code == 1
    assert "closed_form_values" in out and "FAIL" in out
    assert "stam upper (100,30,2)" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "urndiv", "figure", "--n", "6", "--k", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("ell,exact_D")


def test_full_level_certifies_twenty_specs():
    res = verify.suite_oracle("full")
    assert res.passed
    assert len(verify.oracle_specs(20)) == 20 and res.checked == 40
