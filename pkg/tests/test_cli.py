import csv
import json

import pytest
import yaml

from cubicml.cli import build_parser, main
from cubicml.store import JobStore

QUICK_LOOP = {
    "bootstrap_budget": 20,
    "rounds": 1,
    "mlp": {"members": 2, "hidden": 32, "epochs": 10},
    "searcher": {"trials": 1, "samples_per_trial": 150, "top_k": 5},
}


def _manifest(tmp_path, **extra):
    doc = {"space": "ads_fsdp_reduced", "simulator": "fsdp", "seed": 0, "loop": QUICK_LOOP, **extra}
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_search_writes_artifacts(tmp_path, out_dir, capsys):
    assert main(["search", "--manifest", _manifest(tmp_path), "--out", str(out_dir)]) == 0
    records = JobStore(out_dir / "history.jsonl").load()
    assert 20 < len(records) <= 25
    frontier = _rows(out_dir / "frontier.csv")
    assert len(frontier) == len(records)
    vals = [float(r["frontier"]) for r in frontier if r["frontier"]]
    assert vals == sorted(vals)
    corr = _rows(out_dir / "round_corr.csv")
    assert [r["round"] for r in corr] == ["random", "rl-round-1"]
    best = json.loads((out_dir / "best_config.json").read_text())
    assert best["metric"] == max(r.metric for r in records if r.completed)
    assert "jobs=" in capsys.readouterr().out


def test_search_is_reproducible(tmp_path, monkeypatch):
    monkeypatch.delenv("CUBIC_OUT_DIR", raising=False)
    man = _manifest(tmp_path)
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["search", "--manifest", man, "--out", str(o)]) == 0
    for name in ("history.jsonl", "frontier.csv", "round_corr.csv", "best_config.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    # rerunning into the same directory replaces, rather than appends to, the history
    assert main(["search", "--manifest", man, "--out", str(outs[0])]) == 0
    assert (outs[0] / "history.jsonl").read_bytes() == (outs[1] / "history.jsonl").read_bytes()


def test_flags_override_manifest(tmp_path, out_dir):
    assert main(["search", "--manifest", _manifest(tmp_path), "--bootstrap", "12", "--top-k", "3",
                 "--out", str(out_dir)]) == 0
    records = JobStore(out_dir / "history.jsonl").load()
    assert sum(r.round == "random" for r in records) == 12
    assert sum(r.round == "rl-round-1" for r in records) <= 3


def test_out_dir_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "envout"
    monkeypatch.setenv("CUBIC_OUT_DIR", str(target))
    assert main(["gen-dataset", "--count", "10"]) == 0
    assert (target / "dataset.jsonl").is_file()


def test_missing_space_file_is_usage_error(tmp_path, out_dir, capsys):
    missing = tmp_path / "nope.space"
    code = main(["search", "--space", str(missing), "--sim", "fsdp", "--out", str(out_dir)])
    assert code == 2
    assert str(missing) in capsys.readouterr().err


def test_missing_manifest_is_usage_error(tmp_path, out_dir, capsys):
    assert main(["search", "--manifest", str(tmp_path / "x.yaml"), "--out", str(out_dir)]) == 2
    assert "x.yaml" in capsys.readouterr().err


def test_unknown_manifest_key_is_usage_error(tmp_path, out_dir):
    man = _manifest(tmp_path, loop={**QUICK_LOOP, "warp_speed": 9})
    assert main(["search", "--manifest", man, "--out", str(out_dir)]) == 2


def test_bad_flag_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["search", "--backend", "svm"])
    assert exc.value.code == 2


def test_report_on_empty_history(tmp_path, out_dir, capsys):
    hist = tmp_path / "h.jsonl"
    hist.write_text("")
    assert main(["report", "--history", str(hist), "--out", str(out_dir)]) == 3
    assert "no completed jobs" in capsys.readouterr().err


def test_report_rebuilds_search_outputs(tmp_path, out_dir):
    assert main(["search", "--manifest", _manifest(tmp_path), "--out", str(out_dir)]) == 0
    again = tmp_path / "again"
    assert main(["report", "--history", str(out_dir / "history.jsonl"), "--out", str(again)]) == 0
    for name in ("frontier.csv", "round_corr.csv", "best_config.json"):
        assert (again / name).read_bytes() == (out_dir / name).read_bytes()
    norm = tmp_path / "norm"
    assert main(["report", "--history", str(out_dir / "history.jsonl"), "--normalize", "2", "--out", str(norm)]) == 0
    a, b = _rows(out_dir / "frontier.csv")[-1], _rows(norm / "frontier.csv")[-1]
    assert float(b["frontier"]) == pytest.approx(float(a["frontier"]) / 2)


def test_gen_dataset(tmp_path, out_dir):
    out = tmp_path / "d.jsonl"
    assert main(["gen-dataset", "--count", "568", "--output", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 568
    first = out.read_bytes()
    assert main(["gen-dataset", "--count", "568", "--output", str(out)]) == 0
    assert out.read_bytes() == first


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("ds") / "d.jsonl"
    assert main(["gen-dataset", "--count", "300", "--output", str(path)]) == 0
    return path


@pytest.mark.parametrize("split", ["random", "temporal", "scale"])
def test_fit_eval(dataset, out_dir, split):
    assert main(["fit-eval", "--history", str(dataset), "--split", split, "--out", str(out_dir)]) == 0
    report = _rows(out_dir / "corr_report.csv")
    assert len(report) == 1 and report[0]["split"] == split
    for key in ("kendall", "pearson", "spearman"):
        assert -1 <= float(report[0][key]) <= 1
    preds = _rows(out_dir / "predictions.csv")
    assert len(preds) == int(report[0]["n_valid"])


def test_fit_eval_missing_history(tmp_path, out_dir, capsys):
    assert main(["fit-eval", "--history", str(tmp_path / "none.jsonl"), "--out", str(out_dir)]) == 2
    assert "none.jsonl" in capsys.readouterr().err


def test_curve(dataset, out_dir):
    assert main(["curve", "--history", str(dataset), "--sizes", "20,40,60,80,100,150,200",
                 "--perturbations", "2", "--out", str(out_dir)]) == 0
    rows = _rows(out_dir / "learning_curve.csv")
    assert [int(r["size"]) for r in rows] == [20, 40, 60, 80, 100, 150, 200]
    for r in rows:
        for m in ("kendall", "pearson", "spearman"):
            assert float(r[f"{m}_lo"]) <= float(r[f"{m}_mean"]) <= float(r[f"{m}_hi"])
            assert float(r[f"{m}_std"]) >= 0


def test_space_info(capsys):
    assert main(["space-info", "--space", "ads_fsdp"]) == 0
    assert "cardinality: 8857350" in capsys.readouterr().out
    assert main(["space-info", "--space", "ads_fsdp_reduced"]) == 0
    assert "cardinality: 1350" in capsys.readouterr().out


@pytest.mark.parametrize("command", ["search", "fit-eval", "gen-dataset", "curve", "report", "space-info"])
def test_subcommand_help(command, capsys):
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    assert "usage:" in text
    if command != "space-info":
        assert "history.jsonl" in text and "CUBIC_OUT_DIR" in text


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([])
    assert exc.value.code == 2
