import json
import math

import pytest

from schurdyn import samplers
from schurdyn.cli import ValidationError, main, validate_record
from schurdyn.kernels import draw


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


# ---------------------------------------------------------------- sample-spp


def test_sample_spp_figure_shape(capsys):
    code, out, _ = run(capsys, "sample-spp", "--A", "4", "--B", "3", "--pi", "2,1,1,0", "--q", "0.5",
                       "--samples", "10", "--seed", "1")
    assert code == 0
    recs = records(out)
    assert recs[0]["kind"] == "header" and recs[0]["config"]["pi"] == [2, 1, 1, 0]
    body = recs[1:]
    assert len(body) == 10
    for r in recs:
        validate_record(r)
    assert all(r["draws"] <= 24 and r["volume"] == sum(map(sum, r["entries"])) for r in body)
    assert [r["index"] for r in body] == list(range(10))


def test_zero_samples(capsys):
    code, out, _ = run(capsys, "sample-spp", "--A", "2", "--B", "2", "--samples", "0")
    assert code == 0
    assert [r["kind"] for r in records(out)] == ["header"]


def test_output_is_deterministic(tmp_path):
    outs = []
    path = tmp_path / "s.jsonl"
    for threads in ("1", "1", "2"):
        args = ["sample-spp", "--A", "3", "--B", "3", "--q", "0.6", "--samples", "1500", "--seed", "4",
                "--out", str(path), "--threads", threads]
        assert main(args) == 0
        outs.append(path.read_text().splitlines())
    assert outs[0] == outs[1]
    # the header echoes the thread count; the records do not depend on it
    assert outs[0][1:] == outs[2][1:]


@pytest.mark.parametrize("argv", [
    ["sample-spp", "--A", "2", "--B", "2", "--pi", "3"],
    ["sample-spp", "--q", "1.2"],
    ["sample-spp", "--q", "0"],
    ["sample-spp", "--samples", "-1"],
    ["sample-spp", "--threads", "0"],
    ["sample-spp", "--no-such-flag"],
    ["sample-spp", "--A", "two"],
    ["sample-gt", "--beta-plus", "1.5"],
    ["sample-gt", "--N", "0"],
    ["sample-gt", "--format", "svg", "--alpha-plus", "0.2"],
])
def test_validation_errors_exit_one(capsys, argv):
    code = None
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    capsys.readouterr()
    assert code == 1


def test_ascii_and_svg(capsys):
    code, out, _ = run(capsys, "sample-spp", "--A", "2", "--B", "3", "--pi", "1", "--samples", "2",
                       "--format", "ascii")
    assert code == 0 and out.count("# sample") == 2 and "." in out
    code, out, _ = run(capsys, "sample-spp", "--A", "3", "--B", "3", "--q", "0.8", "--samples", "1",
                       "--seed", "3", "--format", "svg")
    assert code == 0 and out.startswith("<svg") and out.rstrip().endswith("</svg>")
    assert "<polygon" in out


# ---------------------------------------------------------------- config


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"q": 0.3, "samples": 2, "A": 1, "B": 2}))
    code, out, _ = run(capsys, "sample-spp", "--config", str(cfg), "--samples", "3")
    assert code == 0
    header, *body = records(out)
    assert header["config"]["q"] == 0.3 and header["config"]["samples"] == 3
    assert header["config"]["A"] == 1 and len(body) == 3


@pytest.mark.parametrize("content", ['{"bogus": 1}', "[1, 2]", "{not json"])
def test_bad_config(tmp_path, capsys, content):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    code, _, err = run(capsys, "sample-spp", "--config", str(cfg))
    assert code == 1 and "error" in err


def test_gamma_rejected_with_message(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamma_plus": 0.5}))
    code, _, err = run(capsys, "sample-gt", "--config", str(cfg))
    assert code == 1 and "gamma" in err


# ---------------------------------------------------------------- sample-gt


def test_sample_gt_trivial_character(capsys):
    code, out, _ = run(capsys, "sample-gt", "--N", "3", "--samples", "4")
    assert code == 0
    recs = records(out)
    paths = [r for r in recs if r["kind"] == "gt_pattern"]
    assert len(paths) == 4
    assert all(r["levels"] == [[0], [0, 0], [0, 0, 0]] for r in paths)
    assert recs[-1]["kind"] == "summary" and recs[-1]["mean_levels"][2] == [0.0, 0.0, 0.0]


def test_sample_gt_large_character(capsys):
    code, out, _ = run(capsys, "sample-gt", "--alpha-plus", ",".join(["0.1"] * 10),
                       "--beta-plus", ",".join(["0.5"] * 5), "--alpha-minus", ",".join(["0.1"] * 10),
                       "--N", "40", "--samples", "3", "--seed", "2")
    assert code == 0
    paths = [r for r in records(out) if r["kind"] == "gt_pattern"]
    assert len(paths) == 3
    for r in paths:
        validate_record(r)
        assert len(r["levels"]) == 40


def test_sample_gt_ascii(capsys):
    code, out, _ = run(capsys, "sample-gt", "--alpha-plus", "0.5", "--N", "3", "--samples", "2",
                       "--format", "ascii")
    assert code == 0 and out.count("# path") == 2


# ---------------------------------------------------------------- stats


def test_stats_mean_volume_one_box(tmp_path, capsys):
    path = tmp_path / "s.jsonl"
    assert main(["sample-spp", "--A", "1", "--B", "1", "--q", "0.5", "--samples", "10", "--seed", "3",
                 "--out", str(path)]) == 0
    code, out, _ = run(capsys, "stats", "--input", str(path))
    assert code == 0
    rep = json.loads(out)
    assert rep["closed_form_mean_volume"] == pytest.approx(1.0)
    # the one-box volume has variance 2 at q = 1/2
    assert abs(rep["mean_volume"] - 1.0) <= 3 * math.sqrt(2 / 10)


def test_stats_duplicate_files_keep_the_mean(tmp_path, capsys):
    path = tmp_path / "s.jsonl"
    assert main(["sample-spp", "--A", "2", "--B", "2", "--samples", "50", "--seed", "1", "--out", str(path)]) == 0
    _, one, _ = run(capsys, "stats", "--input", str(path))
    _, two, _ = run(capsys, "stats", "--input", str(path), str(path))
    r1, r2 = json.loads(one), json.loads(two)
    assert r1["mean_height"] == r2["mean_height"] and r1["mean_volume"] == r2["mean_volume"]
    assert r2["samples"] == 100


def test_stats_inline_and_gt(capsys, tmp_path):
    code, out, _ = run(capsys, "stats", "--A", "2", "--B", "2", "--q", "0.3", "--samples", "200")
    assert code == 0 and json.loads(out)["samples"] == 200
    path = tmp_path / "g.jsonl"
    assert main(["sample-gt", "--alpha-plus", "0.3", "--N", "2", "--samples", "20", "--out", str(path)]) == 0
    code, out, _ = run(capsys, "stats", "--input", str(path))
    rep = json.loads(out)
    assert code == 0 and rep["records"] == "gt_pattern" and len(rep["mean_levels"]) == 2


def test_stats_errors(tmp_path, capsys):
    empty = tmp_path / "e.jsonl"
    empty.write_text("")
    assert run(capsys, "stats", "--input", str(empty))[0] == 1
    assert run(capsys, "stats", "--input", str(tmp_path / "missing.jsonl"))[0] == 1
    bad = tmp_path / "b.jsonl"
    bad.write_text(json.dumps({"kind": "plane_partition", "schema": 99}) + "\n")
    assert run(capsys, "stats", "--input", str(bad))[0] == 1


# ---------------------------------------------------------------- records


def test_validate_record_rejects_inconsistent_records():
    good = {"kind": "plane_partition", "schema": 1, "index": 0, "A": 1, "B": 2, "pi": [], "entries": [[2, 1]],
            "volume": 3, "draws": 2, "slices": [[], [2], [1], []]}
    validate_record(good)
    for change in ({"volume": 4}, {"entries": [[1, 2]]}, {"schema": 2}, {"kind": "other"}, {"draws": "x"}):
        with pytest.raises(ValidationError):
            validate_record({**good, **change})
    with pytest.raises(ValidationError):
        validate_record({"kind": "gt_pattern", "schema": 1, "index": 0, "levels": [[3], [1, 0]]})


# ---------------------------------------------------------------- verify


def test_verify_subset(tmp_path, capsys):
    out_path = tmp_path / "v.json"
    code, out, _ = run(capsys, "verify", "--only", "commutation", "--out", str(out_path))
    assert code == 0 and "[PASS] commutation" in out
    doc = json.loads(out_path.read_text())
    assert doc["passed"] and list(doc["checks"]) == ["commutation"]


def test_verify_unknown_check(capsys):
    assert run(capsys, "verify", "--only", "nonsense")[0] == 1


def test_verify_catches_an_off_by_one_window(monkeypatch, capsys):
    def shifted_up_up(lam, mu, xi, rng, counter):
        # lower window end raised by one on the first coordinate
        lo = max(lam[0] if lam else 0, mu[0] if mu else 0) + 1
        v = draw(xi, lo, math.inf, rng, counter)
        return [v] if v else []

    monkeypatch.setattr(samplers, "_up_up", shifted_up_up)
    code, out, _ = run(capsys, "verify", "--only", "exactness-1x1", "--quick")
    assert code == 2 and "[FAIL] exactness-1x1" in out
