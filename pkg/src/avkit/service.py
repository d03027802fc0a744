"""Experiment service: sessions, election playlists, ballots, outcomes.

A session walks one participant through a fixed playlist of elections:
every single-winner election first (ordered by increasing missing votes),
then the multi-winner elections of the participant's assigned group.  All
randomness (group assignment, missing ballots, tie-breaks) is derived from
the session's seed root, so a session's outcomes are a pure function of
(seed, submitted ballots).

State is kept in memory and persisted to an append-only event log; replaying
the log after a restart reconstructs identical sessions.  Missing ballots are
drawn at submission time, which keeps responses free of any lookahead.
"""

# No `from __future__ import annotations` here: the HTTP request models are
# defined inside create_app and FastAPI needs their annotations evaluated.

import json
import hashlib
import random
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .analysis import BallotLogRow, format_ballot_log
from .elections import Ballot, _sample_winner_indices
from .eventlog import EventLog, EventLogError, read_events
from .money import dollars, signed_dollars
from .scenarios import Scenario, builtin_scenarios
from .uncertainty import CompletionModel, UniformSubsets, model_from_json, model_to_json

GROUPS = ("2-winner", "3-winner")

SINGLE_WINNER_SCENARIOS = ("1a", "1b", "2a", "3", "4")
MISSING_VOTE_STEPS = (0, 1, 3)


class UnknownSessionError(KeyError):
    pass


class ConflictError(RuntimeError):
    pass


@dataclass(frozen=True)
class ElectionSpec:
    scenario_id: str
    k: int
    n: int


def default_playlist(group: str) -> tuple[ElectionSpec, ...]:
    """Single-winner elections for everyone, then the group's multi-winner ones.

    Both blocks are ordered by increasing number of missing votes.  Scenario 4
    appears in the multi-winner block only without missing votes; scenario 2a
    is a 1-/2-winner scenario and 2b a 3-winner one.
    """
    if group not in GROUPS:
        raise ValueError(f"group must be one of {GROUPS}, got {group!r}")
    playlist = [
        ElectionSpec(sid, 1, n) for n in MISSING_VOTE_STEPS for sid in SINGLE_WINNER_SCENARIOS
    ]
    k = 2 if group == "2-winner" else 3
    scenario_ids = ("1a", "1b", "2a", "3") if k == 2 else ("1a", "1b", "2b", "3")
    for n in MISSING_VOTE_STEPS:
        for sid in scenario_ids:
            playlist.append(ElectionSpec(sid, k, n))
        if n == 0:
            playlist.append(ElectionSpec("4", k, 0))
    return tuple(playlist)


def parse_playlists(path: str | Path) -> dict[str, tuple[ElectionSpec, ...]]:
    """Load a playlist override file: {"2-winner": [["1b", 2, 0], ...], ...}."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    playlists = {}
    for group, entries in doc.items():
        if group not in GROUPS:
            raise ValueError(f"unknown group {group!r} in playlist file")
        playlists[group] = tuple(ElectionSpec(str(s), int(k), int(n)) for s, k, n in entries)
    return playlists


@dataclass(frozen=True)
class ElectionResult:
    ballot: Ballot
    missing_ballots: tuple[Ballot, ...]
    winners: frozenset[str]
    delta_cents: int


@dataclass
class SessionRecord:
    session_id: str
    group: str
    seed_root: int
    playlist: tuple[ElectionSpec, ...]
    model: CompletionModel
    results: list[ElectionResult] = field(default_factory=list)

    @property
    def cursor(self) -> int:
        return len(self.results)

    @property
    def done(self) -> bool:
        return self.cursor >= len(self.playlist)

    @property
    def raw_total_cents(self) -> int:
        return sum(r.delta_cents for r in self.results)

    @property
    def payout_cents(self) -> int:
        # Earnings can go negative when a disliked candidate wins; the
        # participant-facing payout is clamped at zero, the raw total kept.
        return max(self.raw_total_cents, 0)


def _derive_seed(root: int, index: int, purpose: str) -> int:
    digest = hashlib.sha256(f"{root}:{index}:{purpose}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class ExperimentStore:
    """Session state machine backed by an append-only event log."""

    def __init__(
        self,
        log_path: str | Path,
        model: CompletionModel | None = None,
        playlists: Mapping[str, Sequence[ElectionSpec]] | None = None,
        scenarios: Sequence[Scenario] | None = None,
    ):
        self.model = model if model is not None else UniformSubsets()
        self._playlists = {
            group: tuple(playlists[group]) if playlists else default_playlist(group)
            for group in GROUPS
        }
        self._scenarios = {s.id: s for s in (scenarios or builtin_scenarios())}
        self._sessions: dict[str, SessionRecord] = {}
        self._order: list[str] = []
        self._lock = threading.RLock()
        self._replay(log_path)
        self._log = EventLog(log_path)

    # -- persistence ---------------------------------------------------------

    def _replay(self, log_path: str | Path) -> None:
        for event in read_events(log_path):
            kind = event.get("type")
            if kind == "session_created":
                record = SessionRecord(
                    session_id=event["session_id"],
                    group=event["group"],
                    seed_root=event["seed_root"],
                    playlist=tuple(ElectionSpec(s, k, n) for s, k, n in event["playlist"]),
                    model=model_from_json(event["model"]),
                )
                self._sessions[record.session_id] = record
                self._order.append(record.session_id)
            elif kind == "ballot_submitted":
                record = self._sessions[event["session_id"]]
                if event["index"] != record.cursor:
                    raise EventLogError(
                        f"session {record.session_id}: event for election "
                        f"{event['index']} but cursor is at {record.cursor}"
                    )
                scenario = self._scenarios[record.playlist[record.cursor].scenario_id]
                ballot = scenario.candidates.ballot_from_string(event["ballot"])
                result = self._resolve(record, record.cursor, ballot)
                logged = (
                    sorted(event["missing"]),
                    event["winners"],
                    event["delta_cents"],
                )
                replayed = (
                    sorted(scenario.candidates.ballot_to_string(b) for b in result.missing_ballots),
                    "".join(sorted(result.winners)),
                    result.delta_cents,
                )
                if logged != replayed:
                    raise EventLogError(
                        f"event log outcome for session {record.session_id} "
                        f"election {record.cursor} does not replay: {logged} != {replayed}"
                    )
                record.results.append(result)
            else:
                raise EventLogError(f"unknown event type {kind!r}")

    def close(self) -> None:
        self._log.close()

    # -- core operations -----------------------------------------------------

    def _get(self, session_id: str) -> SessionRecord:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(f"no session {session_id!r}") from None

    def create_session(self, group: str | None = None, seed: int | None = None) -> SessionRecord:
        with self._lock:
            seed_root = seed if seed is not None else secrets.randbits(63)
            if group is None:
                if seed is not None:
                    group = random.Random(_derive_seed(seed_root, -1, "group")).choice(GROUPS)
                else:
                    group = secrets.choice(GROUPS)
            elif group not in GROUPS:
                raise ValueError(f"group must be one of {GROUPS}, got {group!r}")
            session_id = f"s{len(self._order) + 1:04d}"
            record = SessionRecord(
                session_id=session_id,
                group=group,
                seed_root=seed_root,
                playlist=self._playlists[group],
                model=self.model,
            )
            self._log.append(
                {
                    "type": "session_created",
                    "session_id": session_id,
                    "group": group,
                    "seed_root": seed_root,
                    "model": model_to_json(record.model),
                    "playlist": [[e.scenario_id, e.k, e.n] for e in record.playlist],
                }
            )
            self._sessions[session_id] = record
            self._order.append(session_id)
            return record

    def _resolve(self, record: SessionRecord, index: int, ballot: Ballot) -> ElectionResult:
        """Deterministic outcome of submitting `ballot` for playlist[index]."""
        spec = record.playlist[index]
        scenario = self._scenarios[spec.scenario_id]
        candidates = scenario.candidates
        candidates.validate_ballot(ballot)

        rng_missing = random.Random(_derive_seed(record.seed_root, index, "missing"))
        draw = record.model.make_ballot_sampler(candidates, rng_missing)
        missing = tuple(draw() for _ in range(spec.n))

        scores = list(scenario.base_scores)
        for cast in (ballot, *missing):
            for lab in cast:
                scores[candidates.index(lab)] += 1

        rng_tie = random.Random(_derive_seed(record.seed_root, index, "tiebreak"))
        winner_indices = _sample_winner_indices(scores, spec.k, rng_tie)
        winners = frozenset(candidates.labels[i] for i in winner_indices)
        delta = sum(scenario.utilities[i] for i in winner_indices)
        return ElectionResult(ballot, missing, winners, delta)

    def submit_ballot(
        self, session_id: str, ballot: Ballot, election_index: int | None = None
    ) -> dict:
        with self._lock:
            record = self._get(session_id)
            if record.done:
                raise ConflictError(f"session {session_id} has finished its playlist")
            if election_index is not None and election_index != record.cursor:
                raise ConflictError(
                    f"election {election_index} is not open for voting "
                    f"(current index is {record.cursor}); ballot already submitted?"
                )
            index = record.cursor
            spec = record.playlist[index]
            scenario = self._scenarios[spec.scenario_id]
            result = self._resolve(record, index, ballot)
            self._log.append(
                {
                    "type": "ballot_submitted",
                    "session_id": session_id,
                    "index": index,
                    "ballot": scenario.candidates.ballot_to_string(result.ballot),
                    "missing": [
                        scenario.candidates.ballot_to_string(b) for b in result.missing_ballots
                    ],
                    "winners": "".join(sorted(result.winners)),
                    "delta_cents": result.delta_cents,
                }
            )
            record.results.append(result)
            return {
                "index": index,
                "scenario_id": spec.scenario_id,
                "k": spec.k,
                "n": spec.n,
                "ballot": sorted(result.ballot),
                "winners": sorted(result.winners),
                "delta_cents": result.delta_cents,
                "delta_dollars": signed_dollars(result.delta_cents),
                "missing_ballots": [sorted(b) for b in result.missing_ballots],
                "cumulative_cents": record.raw_total_cents,
                "done": record.done,
            }

    def current_election(self, session_id: str) -> dict:
        with self._lock:
            record = self._get(session_id)
            if record.done:
                return {
                    "done": True,
                    "elections_played": record.cursor,
                    "raw_total_cents": record.raw_total_cents,
                    "payout_cents": record.payout_cents,
                    "payout_dollars": dollars(record.payout_cents),
                }
            spec = record.playlist[record.cursor]
            scenario = self._scenarios[spec.scenario_id]
            if spec.n == 0:
                remaining = "All other voters have already voted."
            elif spec.n == 1:
                remaining = "1 voter has not voted yet."
            else:
                remaining = f"{spec.n} voters have not voted yet."
            return {
                "done": False,
                "index": record.cursor,
                "total": len(record.playlist),
                "scenario_id": spec.scenario_id,
                "k": spec.k,
                "missing_voters": spec.n,
                "voters_remaining": remaining,
                "candidates": [
                    {
                        "label": lab,
                        "votes": scenario.base_scores[i],
                        "payout_cents": scenario.utilities[i],
                        "payout_dollars": signed_dollars(scenario.utilities[i]),
                    }
                    for i, lab in enumerate(scenario.candidates.labels)
                ],
            }

    def session_summary(self, session_id: str) -> dict:
        with self._lock:
            record = self._get(session_id)
            history = []
            for index, result in enumerate(record.results):
                spec = record.playlist[index]
                scenario = self._scenarios[spec.scenario_id]
                # Earnings accounting: each stored delta must equal the
                # utility sum of its winning set.
                assert result.delta_cents == sum(
                    scenario.utility_of(lab) for lab in result.winners
                )
                history.append(
                    {
                        "index": index,
                        "scenario_id": spec.scenario_id,
                        "k": spec.k,
                        "n": spec.n,
                        "ballot": sorted(result.ballot),
                        "winners": sorted(result.winners),
                        "delta_cents": result.delta_cents,
                    }
                )
            return {
                "session_id": record.session_id,
                "group": record.group,
                "done": record.done,
                "elections_played": record.cursor,
                "playlist_length": len(record.playlist),
                "raw_total_cents": record.raw_total_cents,
                "payout_cents": record.payout_cents,
                "payout_dollars": dollars(record.payout_cents),
                "history": history,
            }

    def export_csv(
        self, scenario: str | None = None, k: int | None = None, n: int | None = None
    ) -> str:
        """Ballot-log CSV of every submitted ballot, ordered by (session, index)."""
        with self._lock:
            rows = []
            for session_id in sorted(self._order):
                record = self._sessions[session_id]
                for index, result in enumerate(record.results):
                    spec = record.playlist[index]
                    if scenario is not None and spec.scenario_id != scenario:
                        continue
                    if k is not None and spec.k != k:
                        continue
                    if n is not None and spec.n != n:
                        continue
                    ballot_str = self._scenarios[spec.scenario_id].candidates.ballot_to_string(
                        result.ballot
                    )
                    rows.append(
                        BallotLogRow(session_id, spec.scenario_id, spec.k, spec.n, ballot_str)
                    )
            return format_ballot_log(rows)


def create_app(store: ExperimentStore, static_dir: str | Path | None = None):
    """Wire an ExperimentStore into the HTTP/JSON surface."""
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import PlainTextResponse
    from pydantic import BaseModel

    class CreateSessionRequest(BaseModel):
        group: str | None = None
        seed: int | None = None

    class BallotRequest(BaseModel):
        approved: list[str]
        election_index: int | None = None

    app = FastAPI(title="approval-voting experiment service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def _http(call, *args, **kwargs):
        try:
            return call(*args, **kwargs)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest) -> dict:
        record = _http(store.create_session, group=req.group, seed=req.seed)
        return {
            "session_id": record.session_id,
            "group": record.group,
            "playlist_length": len(record.playlist),
        }

    @app.get("/sessions/{session_id}/current")
    def current(session_id: str) -> dict:
        return _http(store.current_election, session_id)

    @app.post("/sessions/{session_id}/ballot")
    def submit(session_id: str, req: BallotRequest) -> dict:
        ballot = frozenset(req.approved)
        if len(ballot) != len(req.approved):
            raise HTTPException(status_code=400, detail="repeated candidate in ballot")
        return _http(store.submit_ballot, session_id, ballot, req.election_index)

    @app.get("/sessions/{session_id}/summary")
    def summary(session_id: str) -> dict:
        return _http(store.session_summary, session_id)

    @app.get("/export", response_class=PlainTextResponse)
    def export(scenario: str | None = None, k: int | None = None, n: int | None = None) -> str:
        return PlainTextResponse(
            store.export_csv(scenario=scenario, k=k, n=n), media_type="text/csv"
        )

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
