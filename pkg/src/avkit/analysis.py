"""Expected-utility grids, strategy proportions, and the comparison report.

Ballot classification can attach several labels to one ballot; whenever a
single mutually-exclusive category is needed (proportions tables), labels
collapse by the fixed precedence Truth > Regret > Take-X > Abstain > Other.
Reports state this convention in their headers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import reference
from .elections import Ballot
from .money import dollars, round_cents
from .scenarios import Scenario, builtin_scenarios
from .strategies import (
    ABSTAIN,
    REGRET_MIN,
    TRUTHFUL,
    best_response,
    classify_ballot,
    regret_min_ballot,
    take_x_best,
    truthful_ballot,
    valid_take_x_range,
)
from .uncertainty import CompletionModel, expected_utility_exact

CATEGORY_PRECEDENCE_NOTE = (
    "categories are mutually exclusive by the precedence "
    "Truth > Regret > Take-X > Abstain > Other"
)


def heuristic_ballots(scenario: Scenario) -> dict[str, Ballot]:
    """The named heuristic ballots for this scenario, in display order.

    Take-x appears for every x where it is defined; it may coincide with the
    truthful ballot when the scenario has exactly x liked candidates.
    """
    u, c = scenario.utilities, scenario.candidates
    out: dict[str, Ballot] = {"Truth": truthful_ballot(u, c)}
    for x in valid_take_x_range(u):
        out[f"Take-{x}"] = take_x_best(u, x, c)
    out["Regret"] = regret_min_ballot(u, c)
    out["Abstain"] = frozenset()
    return out


def collapse_category(ballot: Ballot, scenario: Scenario) -> str:
    """Single mutually-exclusive category for a ballot (see module docstring)."""
    cls = classify_ballot(ballot, scenario.utilities, scenario.candidates)
    if TRUTHFUL in cls.labels:
        return "Truth"
    if REGRET_MIN in cls.labels:
        return "Regret"
    for label in cls.labels:
        if label.kind == "take-x":
            return str(label)
    if ABSTAIN in cls.labels:
        return "Abstain"
    return "Other"


# --- expected-utility grids -------------------------------------------------


@dataclass(frozen=True)
class GridCell:
    k: int
    n: int
    heuristic_eu: dict[str, Fraction]  # cents, keyed by heuristic name
    max_eu: Fraction  # cents, over all 2^m ballots
    maximizer_names: tuple[str, ...]  # heuristics attaining max_eu exactly
    other_maximizers: tuple[str, ...]  # non-heuristic maximizer ballots, compact strings
    all_ballots_tie: bool  # every ballot attains max_eu

    @property
    def max_display(self) -> str:
        return dollars(self.max_eu)


@dataclass(frozen=True)
class HeuristicGrid:
    scenario: Scenario
    ks: tuple[int, ...]
    ns: tuple[int, ...]
    model: CompletionModel
    cells: dict[tuple[int, int], GridCell]


def _grid_cell(scenario: Scenario, k: int, n: int, model: CompletionModel) -> GridCell:
    scn = scenario.with_missing_voters(n)
    named = heuristic_ballots(scn)
    eu = {name: expected_utility_exact(scn, b, k, model) for name, b in named.items()}
    br = best_response(scn, k, model)
    assert all(value <= br.max_eu for value in eu.values())
    maximizer_names = tuple(name for name, value in eu.items() if value == br.max_eu)
    named_ballots = set(named.values())
    others = sorted(
        (scn.candidates.ballot_to_string(b) for b in br.maximizers if b not in named_ballots),
        key=lambda s: (len(s), s),
    )
    return GridCell(
        k=k,
        n=n,
        heuristic_eu=eu,
        max_eu=br.max_eu,
        maximizer_names=maximizer_names,
        other_maximizers=tuple(others),
        all_ballots_tie=len(br.maximizers) == 1 << scn.m,
    )


def heuristic_grid(
    scenario: Scenario,
    ks: Sequence[int],
    ns: Sequence[int],
    model: CompletionModel,
) -> HeuristicGrid:
    """Per-(k, n) cell: every heuristic's exact EU plus the overall best response."""
    cells = {(k, n): _grid_cell(scenario, k, n, model) for n in ns for k in ks}
    return HeuristicGrid(scenario, tuple(ks), tuple(ns), model, cells)


def _cell_strategies(cell: GridCell) -> str:
    parts = list(cell.maximizer_names)
    parts.extend(f"[{s or 'abstain'}]" for s in cell.other_maximizers)
    return ", ".join(parts)


def render_grid_text(grid: HeuristicGrid, exact: bool = False) -> str:
    fmt = (lambda v: f"{v} c") if exact else dollars
    lines = [
        f"scenario {grid.scenario.id}: {grid.scenario.description}",
        f"model: {model_name(grid.model)}; cells show max expected utility (dollars)"
        + (" [exact cents]" if exact else ""),
    ]
    width = 34
    header = "n\\k".ljust(6) + "".join(f"k={k}".ljust(width) for k in grid.ks)
    lines.append(header)
    for n in grid.ns:
        row = [f"n={n}".ljust(6)]
        for k in grid.ks:
            cell = grid.cells[(k, n)]
            text = f"{fmt(cell.max_eu)}  {_cell_strategies(cell)}"
            row.append(text.ljust(width))
        lines.append("".join(row).rstrip())
    lines.append("")
    lines.append("per-heuristic expected utility:")
    names = list(grid.cells[(grid.ks[0], grid.ns[0])].heuristic_eu)
    lines.append("k".ljust(4) + "n".ljust(4) + "".join(name.ljust(12) for name in names))
    for n in grid.ns:
        for k in grid.ks:
            cell = grid.cells[(k, n)]
            lines.append(
                f"{k}".ljust(4)
                + f"{n}".ljust(4)
                + "".join(fmt(cell.heuristic_eu[name]).ljust(12) for name in names)
            )
    return "\n".join(lines) + "\n"


def render_grid_csv(grid: HeuristicGrid, exact: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(grid.cells[(grid.ks[0], grid.ns[0])].heuristic_eu)
    writer.writerow(
        ["scenario_id", "k", "n", "max", "maximizers", "other_maximizers", *names]
    )
    fmt = (lambda v: str(v)) if exact else dollars
    for n in grid.ns:
        for k in grid.ks:
            cell = grid.cells[(k, n)]
            writer.writerow(
                [
                    grid.scenario.id,
                    k,
                    n,
                    fmt(cell.max_eu),
                    " ".join(cell.maximizer_names),
                    " ".join(cell.other_maximizers),
                    *[fmt(cell.heuristic_eu[name]) for name in names],
                ]
            )
    return buf.getvalue()


# --- ballot logs and strategy proportions -----------------------------------

BALLOT_LOG_HEADER = ("session_id", "scenario_id", "k", "n", "ballot")


@dataclass(frozen=True)
class BallotLogRow:
    session_id: str
    scenario_id: str
    k: int
    n: int
    ballot: str  # compact label string, "" = abstain


def format_ballot_log(rows: Iterable[BallotLogRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BALLOT_LOG_HEADER)
    for row in rows:
        writer.writerow([row.session_id, row.scenario_id, row.k, row.n, row.ballot])
    return buf.getvalue()


def read_ballot_log(text: str) -> list[BallotLogRow]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise ValueError("empty ballot log (expected a header row)") from None
    if header != BALLOT_LOG_HEADER:
        raise ValueError(f"bad ballot-log header {header!r}, expected {BALLOT_LOG_HEADER!r}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != 5:
            raise ValueError(f"line {lineno}: expected 5 fields, got {len(rec)}")
        try:
            rows.append(BallotLogRow(rec[0], rec[1], int(rec[2]), int(rec[3]), rec[4]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return rows


@dataclass
class ConditionSummary:
    scenario_id: str
    k: int
    n: int
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def percentages(self) -> dict[str, float]:
        total = self.total
        return {name: 100.0 * count / total for name, count in self.counts.items()}


def strategy_proportions(
    records: Iterable[tuple[str, int, int, Ballot]],
    scenarios: Mapping[str, Scenario] | None = None,
) -> list[ConditionSummary]:
    """Classify ballots and aggregate category counts per (scenario, k, n)."""
    if scenarios is None:
        scenarios = {s.id: s for s in builtin_scenarios()}
    summaries: dict[tuple[str, int, int], ConditionSummary] = {}
    for scenario_id, k, n, ballot in records:
        try:
            scenario = scenarios[scenario_id]
        except KeyError:
            raise KeyError(f"unknown scenario id {scenario_id!r} in ballot records") from None
        category = collapse_category(ballot, scenario)
        summary = summaries.setdefault(
            (scenario_id, k, n), ConditionSummary(scenario_id, k, n)
        )
        summary.counts[category] = summary.counts.get(category, 0) + 1
    return [summaries[key] for key in sorted(summaries)]


def _category_order(names: Iterable[str]) -> list[str]:
    def rank(name: str) -> tuple[int, int]:
        if name == "Truth":
            return (0, 0)
        if name == "Regret":
            return (1, 0)
        if name.startswith("Take-"):
            return (2, int(name.split("-")[1]))
        if name == "Abstain":
            return (3, 0)
        return (4, 0)

    return sorted(set(names), key=rank)


def render_proportions_text(summaries: Sequence[ConditionSummary]) -> str:
    lines = [f"strategy proportions ({CATEGORY_PRECEDENCE_NOTE})"]
    if not summaries:
        lines.append("(no records)")
        return "\n".join(lines) + "\n"
    categories = _category_order(
        name for summary in summaries for name in summary.counts
    )
    header = "scenario".ljust(10) + "k".ljust(4) + "n".ljust(4) + "total".ljust(7)
    header += "".join(name.ljust(10) for name in categories)
    lines.append(header)
    for s in summaries:
        pct = s.percentages()
        row = s.scenario_id.ljust(10) + f"{s.k}".ljust(4) + f"{s.n}".ljust(4)
        row += f"{s.total}".ljust(7)
        row += "".join(
            (f"{pct[name]:.1f}%" if name in pct else "-").ljust(10) for name in categories
        )
        lines.append(row.rstrip())
    return "\n".join(lines) + "\n"


def render_proportions_csv(summaries: Sequence[ConditionSummary]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario_id", "k", "n", "category", "count", "percent"])
    for s in summaries:
        pct = s.percentages()
        for name in _category_order(s.counts):
            writer.writerow([s.scenario_id, s.k, s.n, name, s.counts[name], f"{pct[name]:.4f}"])
    return buf.getvalue()


# --- comparison against the published grids ---------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    scenario_id: str
    k: int
    n: int
    published_display: str
    published_strategies: tuple[str, ...]
    published_ballots: tuple[str, ...]
    published_all_tie: bool
    computed_eu: Fraction  # cents
    computed_display: str
    value_match: bool
    names_match: bool
    computed_strategies: tuple[str, ...]
    computed_ballots: tuple[str, ...]
    computed_all_tie: bool
    notes: tuple[str, ...]

    @property
    def verdict(self) -> str:
        return "MATCH" if self.value_match else "MISMATCH"


@dataclass(frozen=True)
class ComparisonReport:
    model: CompletionModel
    rows: tuple[ComparisonRow, ...]

    def row(self, scenario_id: str, k: int, n: int) -> ComparisonRow:
        for r in self.rows:
            if (r.scenario_id, r.k, r.n) == (scenario_id, k, n):
                return r
        raise KeyError(f"no comparison row for scenario {scenario_id}, k={k}, n={n}")


def comparison_report(
    model: CompletionModel, scenarios: Sequence[Scenario] | None = None
) -> ComparisonReport:
    """Reconcile computed best responses against every published grid cell.

    Every cell of every bundled reference grid is covered; a row is MATCH
    when the computed maximum, rounded half-up to display cents, equals the
    published value.  Known irreconcilable cells carry explanatory notes but
    are still reported as MISMATCH.
    """
    if scenarios is None:
        scenarios = builtin_scenarios()
    rows = []
    for scenario in scenarios:
        grid = reference.REFERENCE_GRIDS.get(scenario.id)
        if not grid:
            continue
        for (k, n) in sorted(grid, key=lambda kn: (kn[1], kn[0])):
            cell = grid[(k, n)]
            computed = _grid_cell(scenario, k, n, model)
            value_match = round_cents(computed.max_eu) == cell.display_cents
            if cell.all_ballots_tie:
                names_match = computed.all_ballots_tie
            else:
                names_match = set(cell.strategies) <= set(computed.maximizer_names) and set(
                    cell.ballots
                ) <= set(computed.other_maximizers)
            rows.append(
                ComparisonRow(
                    scenario_id=scenario.id,
                    k=k,
                    n=n,
                    published_display=dollars(cell.display_cents),
                    published_strategies=cell.strategies,
                    published_ballots=cell.ballots,
                    published_all_tie=cell.all_ballots_tie,
                    computed_eu=computed.max_eu,
                    computed_display=computed.max_display,
                    value_match=value_match,
                    names_match=names_match,
                    computed_strategies=computed.maximizer_names,
                    computed_ballots=computed.other_maximizers,
                    computed_all_tie=computed.all_ballots_tie,
                    notes=tuple(reference.notes_for(scenario.id, k, n)),
                )
            )
    return ComparisonReport(model, tuple(rows))


def _strategies_text(strategies: tuple[str, ...], ballots: tuple[str, ...], all_tie: bool) -> str:
    if all_tie:
        return "(all ballots tie)"
    parts = list(strategies)
    parts.extend(f"[{b or 'abstain'}]" for b in ballots)
    return ", ".join(parts) if parts else "-"


def render_comparison_text(report: ComparisonReport) -> str:
    lines = [
        "comparison of computed maximum expected utility against the published grids",
        f"model: {model_name(report.model)}",
        "",
        f"{'scenario':<9}{'k':<3}{'n':<3}{'published':<11}{'computed':<10}"
        f"{'exact (cents)':<19}{'verdict':<10}{'strategies agree':<17}",
    ]
    for r in report.rows:
        lines.append(
            f"{r.scenario_id:<9}{r.k:<3}{r.n:<3}{r.published_display:<11}"
            f"{r.computed_display:<10}{str(r.computed_eu):<19}{r.verdict:<10}"
            f"{'yes' if r.names_match else 'NO':<17}"
        )
        lines.append(
            f"    published: {_strategies_text(r.published_strategies, r.published_ballots, r.published_all_tie)}"
            f" | computed: {_strategies_text(r.computed_strategies, r.computed_ballots, r.computed_all_tie)}"
        )
        for note in r.notes:
            lines.append(f"    note: {note}")
    matches = sum(1 for r in report.rows if r.value_match)
    lines.append("")
    lines.append(f"{matches}/{len(report.rows)} cells match at 2-decimal display rounding")
    return "\n".join(lines) + "\n"


def render_comparison_csv(report: ComparisonReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "scenario_id",
            "k",
            "n",
            "published",
            "computed",
            "exact_cents",
            "verdict",
            "strategies_agree",
            "published_strategies",
            "computed_strategies",
            "computed_ballot_maximizers",
            "notes",
        ]
    )
    for r in report.rows:
        writer.writerow(
            [
                r.scenario_id,
                r.k,
                r.n,
                r.published_display,
                r.computed_display,
                str(r.computed_eu),
                r.verdict,
                "yes" if r.names_match else "no",
                " ".join(r.published_strategies)
                + (" (all ballots tie)" if r.published_all_tie else ""),
                " ".join(r.computed_strategies)
                + (" (all ballots tie)" if r.computed_all_tie else ""),
                " ".join(r.computed_ballots),
                "; ".join(r.notes),
            ]
        )
    return buf.getvalue()


def model_name(model: CompletionModel) -> str:
    from .uncertainty import model_to_json

    doc = model_to_json(model)
    kind = doc.pop("kind")
    if not doc:
        return kind
    args = ", ".join(f"{key}={value}" for key, value in doc.items())
    return f"{kind}({args})"
