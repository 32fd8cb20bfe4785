"""Benchmark harness: run a scenario in one or both solver modes and report.

Each run writes ``<out>/trace_<mode>.csv`` with the columns of
:data:`liftedocp.solver.TRACE_COLUMNS` (one row per evaluated iterate; the
last row is the final residual evaluation with zero step sizes) and a
plain-text ``<out>/report.txt``. The report is computed from the CSV files
alone, so every number in it can be re-derived by parsing the traces.

Exit codes: 0 if every requested mode converged, 2 if some mode did not,
1 on errors (missing or malformed scenario, solver failure).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ocpdef import Scenario, load_scenario, scenario_path
from .solver import MODES, TRACE_COLUMNS, SolverOptions, default_threads, solve

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


@dataclass
class ModeSummary:
    mode: str
    converged: bool
    iterations: int
    final_kkt: float
    total_ms: float
    mean_iteration_ms: float
    mean_linearize_ms: float
    mean_riccati_ms: float
    mean_expand_ms: float


@dataclass
class BenchReport:
    scenario: str
    modes: dict = field(default_factory=dict)  # mode -> ModeSummary
    tolerance: float = 1e-8

    def _both(self):
        a, b = self.modes.get("lifted"), self.modes.get("nonlifted")
        if a is None or b is None or not (a.converged and b.converged):
            return None
        return a, b

    @property
    def iteration_ratio(self) -> float | None:
        """Non-lifted over lifted iteration count; ``None`` unless both converged."""
        pair = self._both()
        if pair is None:
            return None
        lifted, nonlifted = pair[0].iterations, pair[1].iterations
        if lifted == 0:
            return 1.0 if nonlifted == 0 else None
        return nonlifted / lifted

    @property
    def per_iteration_ratio(self) -> float | None:
        """Lifted over non-lifted mean time per iteration."""
        pair = self._both()
        if pair is None or pair[1].mean_iteration_ms == 0:
            return None
        return pair[0].mean_iteration_ms / pair[1].mean_iteration_ms

    @property
    def speedup(self) -> float | None:
        """Non-lifted over lifted total wall time."""
        pair = self._both()
        if pair is None or pair[0].total_ms == 0:
            return None
        return pair[1].total_ms / pair[0].total_ms

    @property
    def all_converged(self) -> bool:
        return all(m.converged for m in self.modes.values())

    def render(self) -> str:
        lines = [f"scenario: {self.scenario}", f"kkt tolerance: {self.tolerance:g}", ""]
        head = ("mode", "converged", "iterations", "final_kkt", "total_ms", "iter_ms",
                "linearize_ms", "riccati_ms", "expand_ms")
        lines.append("{:<10} {:>9} {:>10} {:>10} {:>10} {:>9} {:>12} {:>10} {:>9}".format(*head))
        for m in self.modes.values():
            lines.append("{:<10} {:>9} {:>10d} {:>10.3e} {:>10.1f} {:>9.2f} {:>12.2f} {:>10.2f} {:>9.2f}".format(
                m.mode, "yes" if m.converged else "no", m.iterations, m.final_kkt, m.total_ms,
                m.mean_iteration_ms, m.mean_linearize_ms, m.mean_riccati_ms, m.mean_expand_ms))
        lines.append("")

        def fmt(x):
            return "unavailable" if x is None else f"{x:.3f}"

        if len(self.modes) > 1:
            lines.append(f"iteration ratio (nonlifted/lifted): {fmt(self.iteration_ratio)}")
            lines.append(f"per-iteration time ratio (lifted/nonlifted): {fmt(self.per_iteration_ratio)}")
            lines.append(f"total time speedup (nonlifted/lifted): {fmt(self.speedup)}")
        return "\n".join(lines) + "\n"


def read_trace(path) -> dict:
    """Parse a trace CSV into column arrays, checking the header."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"{path}: unexpected trace header {header}")
        rows = [[float(x) for x in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: trace has no rows")
    data = np.array(rows)
    return {name: data[:, j] for j, name in enumerate(TRACE_COLUMNS)}


def summarize_trace(mode: str, trace: dict, tol: float) -> ModeSummary:
    n = len(trace["iteration"])
    k = n - 1  # Newton steps; the last row only evaluates the residual
    lin, ric, exp = trace["t_linearize_ms"], trace["t_riccati_ms"], trace["t_expand_ms"]
    per = lin[:k] + ric[:k] + exp[:k]

    def mean(x):
        return float(np.mean(x)) if x.size else 0.0

    return ModeSummary(
        mode=mode,
        converged=bool(trace["kkt_norm"][-1] < tol),
        iterations=k,
        final_kkt=float(trace["kkt_norm"][-1]),
        total_ms=float(np.sum(lin + ric + exp)),
        mean_iteration_ms=mean(per),
        mean_linearize_ms=mean(lin[:k]),
        mean_riccati_ms=mean(ric[:k]),
        mean_expand_ms=mean(exp[:k]),
    )


def compare(traces, scenario: str = "", tol: float = 1e-8) -> BenchReport:
    """Build a report from trace files.

    ``traces`` is either a ``{mode: path}`` mapping or a list of paths named
    ``trace_<mode>.csv``.
    """
    if not isinstance(traces, dict):
        mapping = {}
        for p in traces:
            stem = Path(p).stem
            mode = stem[len("trace_"):] if stem.startswith("trace_") else stem
            mapping[mode] = p
        traces = mapping
    report = BenchReport(scenario=scenario, tolerance=tol)
    for mode, path in traces.items():
        report.modes[mode] = summarize_trace(mode, read_trace(path), tol)
    return report


def _resolve_scenario(arg: str) -> Path:
    path = Path(arg)
    if path.exists():
        return path
    shipped = scenario_path(arg)
    if path.parent == Path(".") and shipped.exists():
        return shipped
    raise FileNotFoundError(f"scenario file not found: {path}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="liftedocp-bench", description=__doc__.split("\n")[0])
    ap.add_argument("--scenario", required=True,
                    help="scenario file; bare names also resolve to the shipped scenarios")
    ap.add_argument("--mode", choices=("lifted", "nonlifted", "both"), default=None,
                    help="solver mode (default: the scenario's, else both)")
    ap.add_argument("--eps", type=float, default=None, help="barrier parameter")
    ap.add_argument("--max-iters", type=int, default=None)
    ap.add_argument("--tol", type=float, default=None, help="KKT-norm tolerance")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (fallback: LIFTEDOCP_THREADS)")
    ap.add_argument("--out", default="bench_out", help="output directory")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scen: Scenario = load_scenario(_resolve_scenario(args.scenario))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    mode = args.mode or scen.mode
    modes = MODES if mode == "both" else (mode,)
    eps = args.eps if args.eps is not None else scen.eps
    tol = args.tol if args.tol is not None else scen.tol
    max_iters = args.max_iters if args.max_iters is not None else scen.max_iters
    threads = args.threads if args.threads is not None else default_threads()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for m in modes:
        try:
            opts = SolverOptions(mode=m, max_iters=max_iters, kkt_tolerance=tol, eps=eps, threads=threads)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR
        res = solve(scen.definition, scen.x0, opts)
        if res.status == "error":
            print(f"error: {m} solve failed: {res.message}", file=sys.stderr)
            return EXIT_ERROR
        paths[m] = out / f"trace_{m}.csv"
        res.trace.write_csv(paths[m])
        print(f"{m}: {res.status} after {res.iterations} iterations", file=sys.stderr)
    report = compare(paths, scen.name, tol)
    text = report.render()
    (out / "report.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if report.all_converged else EXIT_NOT_CONVERGED


def main() -> None:
    sys.exit(run())
