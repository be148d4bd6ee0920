import csv
import io
import json

import pytest

from memplan.cli import main
from memplan.trace import load_trace


@pytest.fixture(scope="module")
def trace_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "trace.json"
    assert main(["gen-trace", "--model", "gpt2-1b", "--batch", "4", "--out", str(path)]) == 0
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_trace(trace_path):
    t = load_trace(open(trace_path).read())
    assert t.n_blocks == 32


def test_list_presets(capsys):
    code, out, _ = run(capsys, "list-presets")
    doc = json.loads(out)
    assert code == 0 and "gpt2-10b" in json.dumps(doc) and "a100x4" in json.dumps(doc)


def test_pack(capsys, trace_path):
    code, out, _ = run(capsys, "pack", "--trace", trace_path)
    assert code == 0 and json.loads(out)


def test_plan_feeds_estimate_and_simulate(capsys, trace_path, tmp_path):
    plan = tmp_path / "plan.json"
    assert main(["plan", "--trace", trace_path, "--hw", "rtx3090x4", "--frontier", "--out", str(plan)]) == 0
    code, out, _ = run(capsys, "estimate", "--trace", trace_path, "--hw", "rtx3090x4", "--plan", str(plan))
    assert code == 0
    est = json.loads(out)
    assert est["config"] == json.loads(plan.read_text())["config"]
    events = tmp_path / "ev.csv"
    chrome = tmp_path / "trace.json"
    code, out, _ = run(capsys, "simulate", "--trace", trace_path, "--hw", "rtx3090x4", "--plan", str(plan),
                       "--events", str(events), "--chrome", str(chrome))
    assert code == 0
    sim = json.loads(out)
    assert sim["config"] == est["config"]
    assert 0.9 < est["estimate"]["t_iter"] / sim["result"]["t_iter"] < 1.1
    assert events.read_text().startswith("time_ns,resource,event,subject")
    json.loads(chrome.read_text())


def test_estimate_csv(capsys, trace_path):
    code, out, _ = run(capsys, "estimate", "--trace", trace_path, "--hw", "a100x4", "--n-persist", "2",
                       "--n-buffer", "2", "--csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1 and float(rows[0]["t_iter"]) > 0


def test_sweep_and_validate(capsys, trace_path):
    code, out, _ = run(capsys, "sweep", "--trace", trace_path, "--hw", "rtx3090x4", "--n-persist", "0:2",
                       "--feasible-only")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows and all(int(r["n_persist"]) <= 2 for r in rows)
    code, out, _ = run(capsys, "validate", "--trace", trace_path, "--hw", "rtx3090x4", "--n-samples", "3")
    assert code == 0 and len(out.strip().splitlines()) == 4


def test_hardware_override_makes_plan_infeasible(capsys, trace_path):
    code, _, err = run(capsys, "plan", "--trace", trace_path, "--hw", "rtx3090x4", "--gpu-mem", "1000")
    assert code == 1 and err.startswith("NoFeasibleConfig")


def test_domain_errors_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run(capsys, "pack", "--trace", str(bad))
    assert code == 1 and err.startswith("MalformedTrace")
    code, _, err = run(capsys, "plan", "--trace", str(bad), "--hw", "nope")
    assert code == 1
    code, _, err = run(capsys, "pack", "--trace", str(tmp_path / "missing.json"))
    assert code == 1


def test_usage_errors_exit_2(capsys, trace_path):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["plan", "--trace", trace_path])
    assert exc.value.code == 2
