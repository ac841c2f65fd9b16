"""Command-line entry points: validate, run, compare, corpus.

Exit codes: 0 pass, 1 verdict failure, 2 usage/parse error.
LSASIM_OUT_ROOT sets the default output root (default ./runs).
"""

import argparse
import os
import sys
from importlib import resources

from . import __version__
from .reporting import SchemaMismatch, compare_runs, sha256_text, write_outputs
from .scenario import ScenarioValidationError, parse_scenario
from .simulation import Simulation

CORPUS_SCENARIOS = {
    "coastal_radar": "location-dependent availability: a maritime-radar activation clears the coastal zone only",
    "mocn_shared": "two operators pooling their LSA sub-bands on shared cells under the neutral-host SLA policy",
    "standalone_A": "operator A alone on its static half of the LSA band (SLA comparison baseline)",
    "standalone_B": "operator B alone on its static half of the LSA band (SLA comparison baseline)",
    "batch_vs_realtime": "reporting-latency contrast scenario; run with sensing mode realtime or batch",
    "dca_grid": "4 cells x 3 channels with static mutual interference for DCA convergence checks",
    "coverage_field": "stationary interference field for coverage-map convergence checks",
}


def corpus_text(name: str) -> str:
    path = resources.files("lsasim").joinpath(f"corpus/{name}.json")
    return path.read_text(encoding="utf-8")


def _load_scenario(path: str):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None, None
    try:
        return parse_scenario(text), text
    except ScenarioValidationError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return None, text


def cmd_validate(args) -> int:
    scenario, _text = _load_scenario(args.scenario)
    if scenario is None:
        return 2
    print(f"{args.scenario}: valid ({scenario.name}, horizon {scenario.horizon_ttis} TTIs)")
    return 0


def cmd_run(args) -> int:
    scenario, text = _load_scenario(args.scenario)
    if scenario is None:
        return 2
    sim = Simulation(scenario, seed_override=args.seed, trace=args.trace)
    result = sim.run()
    out_root = os.environ.get("LSASIM_OUT_ROOT", "runs")
    out_dir = args.out or os.path.join(out_root, f"{scenario.name}-seed{result.seed}")
    summary = write_outputs(
        result,
        out_dir,
        scenario_path=os.path.abspath(args.scenario),
        scenario_sha256=sha256_text(text),
        tool_version=__version__,
        trace_lines=sim.trace_lines,
        coverage_map=sim.coverage_map,
    )
    failing = sorted(k for k, v in result.verdicts.items() if not v["pass"])
    for name in sorted(result.verdicts):
        status = "PASS" if result.verdicts[name]["pass"] else "FAIL"
        print(f"{name}: {status}")
    print(f"outputs: {out_dir}")
    if failing:
        print("failed verdicts: " + ", ".join(failing), file=sys.stderr)
        return 1
    return 0


def cmd_compare(args) -> int:
    try:
        outcome = compare_runs(args.run_a, args.run_b, args.metric, args.relation, args.tolerance)
    except (SchemaMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    status = "PASS" if outcome["pass"] else "FAIL"
    print(
        f"{status}: {outcome['a']:.6g} {args.relation} {outcome['b']:.6g} "
        f"(metric {args.metric}, tolerance {args.tolerance})"
    )
    return 0 if outcome["pass"] else 1


def cmd_corpus(args) -> int:
    for name in sorted(CORPUS_SCENARIOS):
        print(f"{name}: {CORPUS_SCENARIOS[name]}")
    if args.export:
        os.makedirs(args.export, exist_ok=True)
        for name in sorted(CORPUS_SCENARIOS):
            dest = os.path.join(args.export, f"{name}.json")
            with open(dest, "w", encoding="utf-8", newline="\n") as f:
                f.write(corpus_text(name))
        print(f"exported to {args.export}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsasim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"lsasim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a scenario file")
    p_validate.add_argument("scenario")
    p_validate.set_defaults(func=cmd_validate)

    p_run = sub.add_parser("run", help="run a scenario to its horizon and write reports")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario master seed")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--trace", action="store_true", help="write the event-log trace")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="compare a summary metric between two run directories")
    p_cmp.add_argument("run_a")
    p_cmp.add_argument("run_b")
    p_cmp.add_argument("--metric", required=True, help="dotted path into summary.json")
    p_cmp.add_argument("--relation", choices=("ge", "le"), default="ge")
    p_cmp.add_argument("--tolerance", type=float, default=0.0)
    p_cmp.set_defaults(func=cmd_compare)

    p_corpus = sub.add_parser("corpus", help="list (and optionally export) bundled scenarios")
    p_corpus.add_argument("--export", default=None, help="directory to copy the corpus into")
    p_corpus.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors already
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
