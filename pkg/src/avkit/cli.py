"""Command-line entry point.

Subcommands: analyze (expected-utility grid), best-response, classify
(ballot-log proportions), compare (published-grid reconciliation), mc
(Monte Carlo estimate), serve (experiment service).

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .analysis import (
    collapse_category,
    comparison_report,
    heuristic_grid,
    model_name,
    read_ballot_log,
    render_comparison_csv,
    render_comparison_text,
    render_grid_csv,
    render_grid_text,
    render_proportions_csv,
    render_proportions_text,
    strategy_proportions,
)
from .money import dollars
from .scenarios import (
    Scenario,
    ScenarioFormatError,
    builtin_scenarios,
    load_scenario_file,
)
from .strategies import best_response
from .uncertainty import expected_utility_mc, parse_model_spec

DEFAULT_DATA_PATH = os.environ.get("AVKIT_DATA", "avkit-events.ndjson")


class DataError(Exception):
    """Bad input data (missing file, unknown scenario, malformed log): exit 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_scenario(selector: str) -> Scenario:
    for scenario in builtin_scenarios():
        if scenario.id == selector:
            return scenario
    if selector.endswith(".json") or os.sep in selector or Path(selector).exists():
        try:
            return load_scenario_file(selector)
        except FileNotFoundError:
            raise DataError(f"scenario file not found: {selector}") from None
        except ScenarioFormatError as exc:
            raise DataError(f"bad scenario file {selector}: {exc}") from None
    known = ", ".join(s.id for s in builtin_scenarios())
    raise DataError(f"unknown scenario {selector!r}: not a built-in id ({known}) or a file")


def _resolve_model(spec: str):
    try:
        return parse_model_spec(spec)
    except FileNotFoundError as exc:
        raise DataError(f"model file not found: {exc.filename}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> _Parser:
    parser = _Parser(prog="avkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_model(p):
        p.add_argument(
            "--model",
            default="uniform-subsets",
            help="completion model: uniform-subsets | independent-approval:P | "
            "single-vote[:abstain] | weighted:FILE (default: uniform-subsets)",
        )

    p = sub.add_parser("analyze", help="expected-utility grid for one scenario")
    p.add_argument("--scenario", required=True, help="built-in id (1a..4) or scenario JSON file")
    p.add_argument("--k", type=_int_list, default=(1, 2, 3), help="winner counts, e.g. 1,2,3")
    p.add_argument("--n", type=_int_list, default=(0, 1, 3), help="missing-vote counts, e.g. 0,1,3")
    add_model(p)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--exact", action="store_true", help="print exact rational cents")

    p = sub.add_parser("best-response", help="exact best response for one cell")
    p.add_argument("--scenario", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, default=None, help="override the scenario's missing votes")
    add_model(p)
    p.add_argument("--exact", action="store_true")

    p = sub.add_parser("classify", help="strategy proportions from a ballot-log CSV")
    p.add_argument("--log", required=True, help="CSV: session_id,scenario_id,k,n,ballot")
    p.add_argument("--format", choices=("table", "csv"), default="table")

    p = sub.add_parser("compare", help="reconcile computed grids against the published values")
    add_model(p)
    p.add_argument("--format", choices=("table", "csv"), default="table")

    p = sub.add_parser("mc", help="Monte Carlo expected-utility estimate")
    p.add_argument("--scenario", required=True)
    p.add_argument("--ballot", required=True, help='compact ballot string, e.g. ABE ("" = abstain)')
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    add_model(p)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="run the experiment service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data", default=DEFAULT_DATA_PATH, help="event-log path (env: AVKIT_DATA)")
    add_model(p)
    p.add_argument("--playlists", default=None, help="JSON playlist override file")
    p.add_argument("--static", default=None, help="directory of UI files to serve at /")

    return parser


def _cmd_analyze(args) -> str:
    scenario = _resolve_scenario(args.scenario)
    grid = heuristic_grid(scenario, args.k, args.n, _resolve_model(args.model))
    render = render_grid_csv if args.format == "csv" else render_grid_text
    return render(grid, exact=args.exact)


def _cmd_best_response(args) -> str:
    scenario = _resolve_scenario(args.scenario)
    if args.n is not None:
        scenario = scenario.with_missing_voters(args.n)
    model = _resolve_model(args.model)
    result = best_response(scenario, args.k, model)
    lines = [
        f"scenario {scenario.id}, k={args.k}, n={scenario.missing_voters}, "
        f"model {model_name(model)}",
        f"max expected utility: {dollars(result.max_eu)}"
        + (f"  (exact {result.max_eu} cents)" if args.exact else ""),
        "maximizers:",
    ]
    for ballot in sorted(result.maximizers, key=lambda b: (len(b), sorted(b))):
        text = scenario.candidates.ballot_to_string(ballot) or "(abstain)"
        lines.append(f"  {text:<6} {collapse_category(ballot, scenario)}")
    return "\n".join(lines) + "\n"


def _cmd_classify(args) -> str:
    try:
        text = Path(args.log).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"ballot log not found: {args.log}") from None
    try:
        rows = read_ballot_log(text)
        scenarios = {s.id: s for s in builtin_scenarios()}
        records = [
            (r.scenario_id, r.k, r.n, scenarios[r.scenario_id].candidates.ballot_from_string(r.ballot))
            if r.scenario_id in scenarios
            else (r.scenario_id, r.k, r.n, frozenset(r.ballot))
            for r in rows
        ]
        summaries = strategy_proportions(records)
    except (ValueError, KeyError) as exc:
        raise DataError(f"bad ballot log {args.log}: {exc}") from None
    render = render_proportions_csv if args.format == "csv" else render_proportions_text
    return render(summaries)


def _cmd_compare(args) -> str:
    report = comparison_report(_resolve_model(args.model))
    render = render_comparison_csv if args.format == "csv" else render_comparison_text
    return render(report)


def _cmd_mc(args) -> str:
    scenario = _resolve_scenario(args.scenario)
    if args.n is not None:
        scenario = scenario.with_missing_voters(args.n)
    try:
        ballot = scenario.candidates.ballot_from_string(args.ballot)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    model = _resolve_model(args.model)
    mean, se = expected_utility_mc(scenario, ballot, args.k, model, args.samples, args.seed)
    return (
        f"scenario {scenario.id}, ballot {args.ballot or '(abstain)'}, k={args.k}, "
        f"n={scenario.missing_voters}, model {model_name(model)}\n"
        f"estimate: {mean / 100:.6f} dollars  (std error {se / 100:.6f}, "
        f"{args.samples} samples, seed {args.seed})\n"
    )


def _cmd_serve(args) -> str:
    import uvicorn

    from .service import ExperimentStore, create_app, parse_playlists

    playlists = None
    if args.playlists:
        try:
            playlists = parse_playlists(args.playlists)
        except (OSError, ValueError) as exc:
            raise DataError(f"bad playlist file {args.playlists}: {exc}") from None
    store = ExperimentStore(args.data, model=_resolve_model(args.model), playlists=playlists)
    app = create_app(store, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port)
    return ""


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors (exit 1) and --help (exit 0)
        return int(exc.code or 0)
    handlers = {
        "analyze": _cmd_analyze,
        "best-response": _cmd_best_response,
        "classify": _cmd_classify,
        "compare": _cmd_compare,
        "mc": _cmd_mc,
        "serve": _cmd_serve,
    }
    try:
        output = handlers[args.command](args)
    except DataError as exc:
        print(f"avkit: {exc}", file=sys.stderr)
        return 2
    if output:
        sys.stdout.write(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
