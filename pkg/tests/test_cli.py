import json
import subprocess
import sys

import numpy as np
import pytest

from chiralwalk import cli
from chiralwalk.chiral import ChiralPhaseAssignment
from chiralwalk.unitary import ProbabilityTrace


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_walk_type1_plan_example(capsys):
    code, out, _ = run(["walk", "--graph", "type1:4,3", "--phases", "plan", "--init", "uniform:1,3,5,7",
                        "--t", "0:5:0.01"], capsys)
    assert code == 0
    trace = ProbabilityTrace.from_csv(out)
    assert trace.times.size == 501
    assert trace.vertex(9).max() < 1e-18
    assert out.splitlines()[0] == "t," + ",".join(f"v{j}" for j in range(1, 10))


def test_zero_check_c4_example(capsys):
    code, out, _ = run(["zero-check", "--graph", "cycle:4", "--phases", "1,2:pi"], capsys)
    assert code == 0
    fields = dict(line.split("=", 1) for line in out.splitlines())
    assert float(fields["residual"]) == 0.0 and fields["zero_transfer"] == "yes"
    assert fields["target"] == "3"


def test_zero_check_failure_exits_one(capsys):
    code, out, _ = run(["zero-check", "--graph", "type1:3,3", "--phases", "1,2:pi"], capsys)
    assert code == 1
    assert "zero_transfer=no" in out


def test_estimate_zero_hits_example(capsys):
    code, out, _ = run(["estimate", "--hits", "0", "--trials", "1000"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["omega_hat"] <= 0.05 and rec["trials"] == 1000


def test_estimate_simulated_records_seed(capsys):
    code, out, _ = run(["estimate", "--simulate", "0.3", "--trials", "100000", "--seed", "11"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["seed"] == 11 and rec["source"] == "simulated"
    assert 0.27 <= rec["omega_hat"] <= 0.33


def test_estimate_from_samples_and_table(tmp_path, capsys):
    table = tmp_path / "ref.csv"
    assert run(["reference", "--out", str(table)], capsys)[0] == 0
    samples = tmp_path / "s.txt"
    samples.write_text("0\n1\n0\n0\n1\n")
    code, out, _ = run(["estimate", "--table", str(table), "--samples", str(samples)], capsys)
    assert code == 0 and json.loads(out)["hits"] == 2
    samples.write_text("0\n3\n")
    assert run(["estimate", "--table", str(table), "--samples", str(samples)], capsys)[0] == 2


def test_plan_file_feeds_walk(tmp_path, capsys):
    plan = tmp_path / "plan.json"
    assert run(["plan", "--graph", "type2:3,4", "--out", str(plan)], capsys)[0] == 0
    a = ChiralPhaseAssignment.from_json(plan.read_text())
    assert len(a) == 3
    code, out, _ = run(["walk", "--graph", "type2:3,4", "--phases", str(plan), "--t", "0:5:0.05"], capsys)
    assert code == 0
    assert ProbabilityTrace.from_csv(out).vertex(8).max() < 1e-18
    assert run(["zero-check", "--graph", "type2:3,4", "--phases", str(plan)], capsys)[0] == 0


def test_qsw_with_rho_dump(tmp_path, capsys):
    dump = tmp_path / "rho.json"
    code, out, _ = run(["qsw", "--graph", "type2:2,3", "--phases", "1,2:pi", "--init", "basis:1",
                        "--t", "0:2:0.5", "--omega", "0.1", "--rho-dump", str(dump)], capsys)
    assert code == 0
    trace = ProbabilityTrace.from_csv(out)
    data = json.loads(dump.read_text())
    assert len(data["snapshots"]) == trace.times.size == 5
    rho = np.array(data["snapshots"][-1]["rho"])
    assert rho[3][3][0] == pytest.approx(trace.probs[-1, 3], abs=1e-15)


def test_graph_file_input(tmp_path, capsys):
    from chiralwalk.graph import merged_star_type2, GraphFamilyParams
    g, d = merged_star_type2(GraphFamilyParams(2, 3))
    data = g.to_dict()
    data["decomposition"] = d.to_dict()
    f = tmp_path / "c4.json"
    f.write_text(json.dumps(data))
    code, out, _ = run(["zero-check", "--graph", str(f), "--phases", "1,2:pi"], capsys)
    assert code == 0 and "target=4" in out


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("graph: type2:2,3\nphases: '1,2:pi'\ninit: basis:1\nt: '0:1:0.5'\n")
    code, out, _ = run(["--config", str(cfg), "walk"], capsys)
    assert code == 0 and ProbabilityTrace.from_csv(out).times.tolist() == [0.0, 0.5, 1.0]
    code, out, _ = run(["--config", str(cfg), "walk", "--t", "0:1:0.25"], capsys)
    assert code == 0 and ProbabilityTrace.from_csv(out).times.size == 5
    bad = tmp_path / "bad.yaml"
    bad.write_text("graph: type2:2,3\nwarp: 9\n")
    code, _, err = run(["--config", str(bad), "walk"], capsys)
    assert code == 2 and "warp" in err


@pytest.mark.parametrize(
    "argv, code, field",
    [
        (["walk", "--graph", "path:3", "--init", "basis:1", "--t", "0:1:0"], 2, "t"),
        (["walk", "--graph", "nonsense:3"], 2, "graph"),
        (["walk", "--graph", "path:3", "--init", "basis:x"], 2, "init"),
        (["walk"], 2, "graph"),
        (["walk", "--graph", "type2:1,3"], 3, ""),
        (["walk", "--graph", "cycle:4", "--phases", "1,3:pi"], 3, ""),
        (["zero-check", "--graph", "path:3", "--phases", "plan"], 3, ""),
        (["zero-check", "--graph", "complete:3"], 3, ""),
        (["estimate"], 2, "hits"),
        (["estimate", "--hits", "1", "--trials", "0"], 3, ""),
    ],
)
def test_exit_codes(argv, code, field, capsys):
    got, _, err = run(argv, capsys)
    assert got == code
    assert err.startswith("chiralwalk: error:")
    if field:
        assert f"{field}:" in err


def test_numerical_failure_exit_code(monkeypatch, capsys):
    def broken(*_a, **_k):
        raise np.linalg.LinAlgError("eigh did not converge")

    monkeypatch.setattr(np.linalg, "eigh", broken)
    code, _, err = run(["walk", "--graph", "path:3", "--init", "basis:1", "--t", "0:1:0.5"], capsys)
    assert code == 4 and "did not converge" in err


def test_outputs_byte_identical(tmp_path, capsys):
    argv = ["qsw", "--graph", "type2:2,3", "--phases", "1,2:pi", "--init", "basis:1", "--t", "0:3:0.1"]
    run(argv + ["--out", str(tmp_path / "a.csv")], capsys)
    run(argv + ["--out", str(tmp_path / "b.csv")], capsys)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    est = ["estimate", "--simulate", "0.5", "--trials", "5000", "--seed", "3"]
    run(est + ["--out", str(tmp_path / "e1.json")], capsys)
    run(est + ["--out", str(tmp_path / "e2.json")], capsys)
    assert (tmp_path / "e1.json").read_bytes() == (tmp_path / "e2.json").read_bytes()


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    assert run(["plan", "--graph", "type1:2,3", "--out", "p.json"], capsys)[0] == 0
    assert (tmp_path / "p.json").exists()
    assert not list(tmp_path.glob(".*.tmp"))


def test_seventeen_digit_output(capsys):
    from chiralwalk.graph import path_graph
    from chiralwalk.unitary import basis_state, build_propagator, trace_probabilities

    _, out, _ = run(["walk", "--graph", "path:2", "--init", "basis:1", "--t", "0:1:1"], capsys)
    last = [float(x) for x in out.splitlines()[-1].split(",")]
    direct = trace_probabilities(build_propagator(path_graph(2)), basis_state(2, 1), [0.0, 1.0])
    assert last[1:] == direct.probs[-1].tolist()  # lossless round trip
    assert last[1] == pytest.approx(np.cos(1.0) ** 2, abs=1e-15)


@pytest.fixture(scope="module")
def figure_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("figs")
    assert cli.main(["figures", "--outdir", str(d)]) == 0
    return d


def test_figures_then_verify(figure_dir, capsys):
    assert sorted(p.name for p in figure_dir.glob("*.csv")) == [f"{s}.csv" for s in sorted(cli.FIGURES)]
    code, out, _ = run(["verify", "--dir", str(figure_dir)], capsys)
    assert code == 0
    assert len(out.splitlines()) == 10 and all(line.startswith("PASS") for line in out.splitlines())


def test_verify_catches_tampering(figure_dir, tmp_path, capsys):
    for p in figure_dir.glob("*.csv"):
        (tmp_path / p.name).write_text(p.read_text())
    lines = (tmp_path / "fig9.csv").read_text().splitlines()
    cells = lines[5].split(",")
    cells[4] = "1e-6"
    lines[5] = ",".join(cells)
    (tmp_path / "fig9.csv").write_text("\n".join(lines) + "\n")
    code, out, _ = run(["verify", "--dir", str(tmp_path)], capsys)
    assert code == 1 and "FAIL fig9: max v4 < 1e-18" in out


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "chiralwalk", "zero-check", "--graph", "cycle:4",
                          "--phases", "1,2:pi"], capture_output=True, text=True)
    assert res.returncode == 0 and "residual=0" in res.stdout
