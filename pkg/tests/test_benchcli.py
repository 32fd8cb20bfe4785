import csv

import numpy as np
import pytest

from liftedocp.benchcli import compare, read_trace, run, summarize_trace
from liftedocp.solver import TRACE_COLUMNS


def write_trace(path, kkts, ms=(1.0, 2.0, 0.5)):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for k, r in enumerate(kkts):
            last = k == len(kkts) - 1
            w.writerow([k, r, 0 if last else 1, 0 if last else 1, ms[0], 0 if last else ms[1], 0 if last else ms[2]])
    return path


def test_identical_traces_give_unit_ratios(tmp_path):
    k = list(np.geomspace(1.0, 1e-9, 11))
    a = write_trace(tmp_path / "trace_lifted.csv", k)
    b = write_trace(tmp_path / "trace_nonlifted.csv", k)
    rep = compare([a, b])
    assert rep.iteration_ratio == 1.0
    assert rep.speedup == 1.0
    assert rep.per_iteration_ratio == 1.0


def test_iteration_ratio_arithmetic(tmp_path):
    a = write_trace(tmp_path / "l.csv", list(np.geomspace(1.0, 1e-9, 21)))
    b = write_trace(tmp_path / "n.csv", list(np.geomspace(1.0, 1e-9, 51)))
    rep = compare({"lifted": a, "nonlifted": b})
    assert rep.modes["lifted"].iterations == 20
    assert rep.modes["nonlifted"].iterations == 50
    assert rep.iteration_ratio == 2.5
    assert "iteration ratio (nonlifted/lifted): 2.500" in rep.render()


def test_nonconverged_mode_marks_ratio_unavailable(tmp_path):
    a = write_trace(tmp_path / "trace_lifted.csv", [1.0, 0.1, 1e-9])
    b = write_trace(tmp_path / "trace_nonlifted.csv", [1.0, 0.5, 0.2])
    rep = compare([a, b])
    assert not rep.all_converged
    assert rep.iteration_ratio is None and rep.speedup is None
    assert "iteration ratio (nonlifted/lifted): unavailable" in rep.render()


def test_summary_by_independent_arithmetic(tmp_path):
    p = write_trace(tmp_path / "t.csv", [1.0, 0.1, 1e-9], ms=(2.0, 3.0, 1.0))
    s = summarize_trace("lifted", read_trace(p), 1e-8)
    # two Newton steps of 6 ms and a final 2 ms residual evaluation
    assert s.iterations == 2 and s.converged
    assert s.total_ms == 14.0 and s.mean_iteration_ms == 6.0
    assert s.mean_linearize_ms == 2.0 and s.mean_riccati_ms == 3.0 and s.mean_expand_ms == 1.0


def test_malformed_trace_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        read_trace(p)


def test_missing_scenario_exits_1_naming_path(tmp_path, capsys):
    missing = tmp_path / "nope" / "absent.cfg"
    assert run(["--scenario", str(missing), "--out", str(tmp_path / "o")]) == 1
    assert str(missing) in capsys.readouterr().err


def test_malformed_scenario_exits_1(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("gait = hop\nwarp = 9\n")
    assert run(["--scenario", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "warp" in capsys.readouterr().err


def test_monoped_hop_run_writes_rederivable_report(tmp_path, capsys):
    out = tmp_path / "bench"
    code = run(["--scenario", "monoped_hop.cfg", "--mode", "both", "--out", str(out)])
    assert code == 0
    rep_text = (out / "report.txt").read_text()
    traces = {m: read_trace(out / f"trace_{m}.csv") for m in ("lifted", "nonlifted")}
    for m, t in traces.items():
        assert list(t["iteration"]) == list(range(len(t["iteration"])))
        assert t["kkt_norm"][-1] < 1e-8
        assert np.all(t["alpha_primal"][:-1] > 0) and t["alpha_primal"][-1] == 0
    # the ratio line follows from the iteration columns alone
    ratio = (len(traces["nonlifted"]["iteration"]) - 1) / (len(traces["lifted"]["iteration"]) - 1)
    assert f"iteration ratio (nonlifted/lifted): {ratio:.3f}" in rep_text
    assert rep_text == capsys.readouterr().out


def test_iteration_columns_reproducible(tmp_path):
    cols = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        assert run(["--scenario", "monoped_hop.cfg", "--mode", "lifted", "--max-iters", "5", "--out", str(out)]) == 2
        t = read_trace(out / "trace_lifted.csv")
        cols.append((t["iteration"], t["kkt_norm"], t["alpha_primal"], t["alpha_dual"]))
    for a, b in zip(*cols):
        np.testing.assert_array_equal(a, b)


def test_invalid_option_value_exits_1(tmp_path):
    assert run(["--scenario", "monoped_hop.cfg", "--eps", "-1", "--out", str(tmp_path)]) == 1


@pytest.mark.slow
def test_trot_cli_examples(tmp_path):
    out = tmp_path / "lifted"
    assert run(["--scenario", "trot.cfg", "--mode", "lifted", "--eps", "1e-1", "--out", str(out)]) == 0
    kkt = read_trace(out / "trace_lifted.csv")["kkt_norm"]
    tail = kkt[len(kkt) // 2:]
    assert np.all(np.diff(tail) < 0)
    out = tmp_path / "both"
    assert run(["--scenario", "trot.cfg", "--mode", "both", "--eps", "1e-4", "--out", str(out)]) == 0
    rep = compare([out / "trace_lifted.csv", out / "trace_nonlifted.csv"])
    assert rep.modes["lifted"].iterations <= rep.modes["nonlifted"].iterations
