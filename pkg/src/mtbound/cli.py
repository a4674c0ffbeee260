"""``mtbound`` command line: generate, bound, feasible, compare, plot.

Exit codes: 0 success, 1 I/O or parse failure, 2 unsupported configuration or
usage error, 3 no solution found.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from . import graph as graph_mod
from .bounds import SamplingParams, Variant
from .feasible import find_feasible
from .generator import GenerationFailed, GeneratorConfig, generate
from .gtsp import TooManyClusters, solve_exact
from .model import Kind, ParseError, ValidationError, load, save
from .plot import render_svg

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NO_SOLUTION = 0, 1, 2, 3
REPORT_SCHEMA = 1

log = logging.getLogger("mtbound")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


@dataclass
class RunReport:
    schema_version: int
    instance: str
    kind: str
    n: int
    variant: str
    level: str
    delta: Optional[float]
    lower_bound: Optional[float]
    feasible_cost: Optional[float]
    percent_deviation: Optional[float]
    graph_gen_seconds: Optional[float]
    total_seconds: Optional[float]
    lb_exact: bool
    outlier: bool
    error: str = ""

    @staticmethod
    def columns() -> list:
        return [f.name for f in fields(RunReport)]

    def csv_row(self) -> dict:
        row = asdict(self)
        for key in ("delta", "lower_bound", "feasible_cost", "graph_gen_seconds", "total_seconds"):
            if row[key] is not None:
                row[key] = f"{row[key]:.6f}"
        if row["percent_deviation"] is not None:
            row["percent_deviation"] = f"{row['percent_deviation']:.2f}"
        return {k: "" if v is None else v for k, v in row.items()}


def percent_deviation(feasible_cost, lower_bound) -> Optional[float]:
    if feasible_cost is None or lower_bound is None or not feasible_cost > 0:
        return None
    return (feasible_cost - lower_bound) / feasible_cost * 100.0


def write_csv(reports, path=None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RunReport.columns(), lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.csv_row())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _load_instance(path):
    try:
        return load(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from exc
    except (ParseError, ValidationError) as exc:
        raise CliError(EXIT_IO, f"{path}: {exc}") from exc


def _delta(args) -> tuple:
    if getattr(args, "delta", None) is not None:
        if not args.delta > 0:
            raise CliError(EXIT_CONFIG, "--delta must be positive")
        return "custom", args.delta
    return str(args.level), graph_mod.delta_for_level(args.level)


def run_bound(inst, variant: str, delta: float, params: SamplingParams):
    """Partition, build and solve; returns (graph, solution or None, total seconds)."""
    t0 = time.perf_counter()
    g = graph_mod.build(inst, delta, variant, params)
    sol = solve_exact(g)
    return g, sol, time.perf_counter() - t0


def solution_doc(g, sol, level: str) -> dict:
    doc = sol.to_dict()
    doc.update({
        "variant": g.variant,
        "delta": g.delta,
        "level": level,
        "intervals": [[g.nodes[u].target_id, g.nodes[u].t_lo, g.nodes[u].t_hi]
                      for u in sol.node_sequence[1:-1]],
    })
    return doc


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    if args.n < 1:
        raise CliError(EXIT_CONFIG, "--n must be at least 1")
    if args.count < 1:
        raise CliError(EXIT_CONFIG, "--count must be at least 1")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create {out}: {exc}") from exc
    for k in range(args.count):
        seed = args.seed + k
        cfg = GeneratorConfig(args.n, Kind(args.kind), seed)
        try:
            inst = generate(cfg)
        except GenerationFailed as exc:
            raise CliError(EXIT_NO_SOLUTION, f"seed {seed}: {exc}") from exc
        path = out / f"{args.kind}_n{args.n}_s{seed}.json"
        save(inst, path)
        print(path)
    return EXIT_OK


def cmd_bound(args) -> int:
    inst = _load_instance(args.instance)
    level, delta = _delta(args)
    params = SamplingParams(args.k, args.eps)
    try:
        g, sol, total = run_bound(inst, args.variant, delta, params)
    except graph_mod.VariantUnsupported as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from exc
    except TooManyClusters as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from exc
    if args.graph_out:
        graph_mod.dump(g, args.graph_out)
    if sol is None:
        raise CliError(EXIT_NO_SOLUTION, "the clustered graph has no finite tour")
    report = RunReport(REPORT_SCHEMA, Path(args.instance).stem, inst.kind.value, inst.n, g.variant,
                       level, delta, sol.cost, None, None, g.build_seconds, total, sol.exact, False)
    if args.out:
        Path(args.out).write_text(json.dumps(solution_doc(g, sol, level), indent=2) + "\n", encoding="utf-8")
    text = write_csv([report], args.report)
    if not args.report:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_feasible(args) -> int:
    inst = _load_instance(args.instance)
    if args.samples < 1:
        raise CliError(EXIT_CONFIG, "--samples must be at least 1")
    t0 = time.perf_counter()
    tour = find_feasible(inst, args.samples, args.effort)
    total = time.perf_counter() - t0
    if tour is None:
        raise CliError(EXIT_NO_SOLUTION, "no feasible tour found; try a larger --samples")
    if args.out:
        tour.save(args.out)
    report = RunReport(REPORT_SCHEMA, Path(args.instance).stem, inst.kind.value, inst.n, "feasible",
                       "", None, None, tour.completion_time, None, None, total, False, False)
    text = write_csv([report], args.report)
    if not args.report:
        sys.stdout.write(text)
    return EXIT_OK


def _compare_one(path: Path, variants, levels, params, samples):
    inst = _load_instance(path)
    tour = find_feasible(inst, samples)
    ub = None if tour is None else tour.completion_time
    rows = []
    for variant in variants:
        for level in levels:
            delta = graph_mod.delta_for_level(level)
            base = dict(schema_version=REPORT_SCHEMA, instance=path.stem, kind=inst.kind.value, n=inst.n,
                        variant=variant, level=str(level), delta=delta, feasible_cost=ub)
            try:
                g, sol, total = run_bound(inst, variant, delta, params)
            except (graph_mod.VariantUnsupported, TooManyClusters) as exc:
                rows.append(RunReport(**base, lower_bound=None, percent_deviation=None,
                                      graph_gen_seconds=None, total_seconds=None, lb_exact=False,
                                      outlier=True, error=type(exc).__name__))
                continue
            lb = None if sol is None else sol.cost
            rows.append(RunReport(**base, lower_bound=lb, percent_deviation=percent_deviation(ub, lb),
                                  graph_gen_seconds=g.build_seconds, total_seconds=total,
                                  lb_exact=sol is not None, outlier=sol is None or ub is None,
                                  error="" if sol is not None else "NoTour"))
    return rows


def summarize(rows) -> list:
    groups = {}
    for r in rows:
        groups.setdefault((r.variant, r.n, r.level), []).append(r)
    out = []
    for (variant, n, level), rs in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0], kv[0][2])):
        devs = [r.percent_deviation for r in rs if r.percent_deviation is not None and not r.outlier]
        out.append({"variant": variant, "n": n, "level": level, "instances": len(rs),
                    "outliers": sum(r.outlier for r in rs),
                    "mean_percent_deviation": (sum(devs) / len(devs)) if devs else None})
    return out


def cmd_compare(args) -> int:
    root = Path(args.instances)
    if not root.is_dir():
        raise CliError(EXIT_IO, f"{root} is not a directory")
    files = sorted(root.glob("*.json"))
    if not files:
        raise CliError(EXIT_CONFIG, f"no instance files in {root}")
    variants = [Variant(v).value for v in args.variants.split(",")]
    levels = [int(x) for x in args.levels.split(",")]
    for lv in levels:
        graph_mod.delta_for_level(lv)
    params = SamplingParams(args.k, args.eps)
    rows = []
    for f in files:
        try:
            rows.extend(_compare_one(f, variants, levels, params, args.samples))
        except CliError as exc:
            log.warning("skipping %s: %s", f, exc)
            rows.append(RunReport(REPORT_SCHEMA, f.stem, "", 0, "", "", None, None, None, None, None,
                                  None, False, True, "LoadError"))
    text = write_csv(rows, args.out)
    summary = summarize(rows)
    if args.json:
        Path(args.json).write_text(json.dumps({"schema_version": REPORT_SCHEMA,
                                               "rows": [asdict(r) for r in rows],
                                               "summary": summary}, indent=2) + "\n", encoding="utf-8")
    if not args.out:
        sys.stdout.write(text)
    for s in summary:
        dev = s["mean_percent_deviation"]
        dev_s = "n/a" if dev is None else f"{dev:.2f}"
        print(f"# n={s['n']} variant={s['variant']} level={s['level']} "
              f"mean_dev%={dev_s} outliers={s['outliers']}/{s['instances']}")
    return EXIT_OK


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_IO, str(ParseError("json", exc.lineno, exc.msg))) from exc


def cmd_plot(args) -> int:
    inst = _load_instance(args.instance)
    lb = tour = None
    if args.solution:
        doc = _read_json(args.solution)
        if "intervals" in doc:
            lb = doc
        elif "order" in doc and "arrivals" in doc:
            tour = doc
        else:
            raise CliError(EXIT_IO, str(ParseError("solution", detail="expected intervals or order/arrivals")))
    svg = render_svg(inst, lower_bound=lb, tour=tour)
    try:
        Path(args.out).write_text(svg, encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mtbound", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write random instances")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--kind", choices=[k.value for k in Kind], default="simple")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    def bounding(p):
        p.add_argument("--k", type=int, default=10)
        p.add_argument("--eps", type=float, default=0.05)

    b = sub.add_parser("bound", help="lower bound for one instance")
    b.add_argument("--instance", required=True)
    b.add_argument("--variant", choices=[v.value for v in Variant], default="linear")
    lv = b.add_mutually_exclusive_group()
    lv.add_argument("--level", type=int, choices=sorted(graph_mod.LEVELS), default=4)
    lv.add_argument("--delta", type=float)
    bounding(b)
    b.add_argument("--out", help="solution JSON")
    b.add_argument("--graph-out", help="graph dump JSON")
    b.add_argument("--report", help="CSV report (stdout if omitted)")
    b.set_defaults(func=cmd_bound)

    f = sub.add_parser("feasible", help="feasible tour for one instance")
    f.add_argument("--instance", required=True)
    f.add_argument("--samples", type=int, default=32)
    f.add_argument("--effort", choices=["fast", "default", "thorough"], default="default")
    f.add_argument("--out", help="tour JSON")
    f.add_argument("--report", help="CSV report (stdout if omitted)")
    f.set_defaults(func=cmd_feasible)

    c = sub.add_parser("compare", help="variants x levels over a directory of instances")
    c.add_argument("--instances", required=True)
    c.add_argument("--variants", default="lite,geometric,sampling,linear")
    c.add_argument("--levels", default="1,2,3,4")
    c.add_argument("--samples", type=int, default=32)
    bounding(c)
    c.add_argument("--out", help="CSV report (stdout if omitted)")
    c.add_argument("--json", help="JSON report with raw values and summary")
    c.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot", help="SVG of an instance and optional solution")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", help="lower-bound solution or feasible tour JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"mtbound: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"mtbound: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
