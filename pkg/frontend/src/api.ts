// Typed client for the experiment service HTTP/JSON API.
// All outcome data (winners, earnings, revealed ballots) comes from the
// server; the client never computes election results itself.

export interface CreateSessionResponse {
  session_id: string;
  group: string;
  playlist_length: number;
}

export interface CandidateView {
  label: string;
  votes: number;
  payout_cents: number;
  payout_dollars: string;
}

export interface ActiveElection {
  done: false;
  index: number;
  total: number;
  scenario_id: string;
  k: number;
  missing_voters: number;
  voters_remaining: string;
  candidates: CandidateView[];
}

export interface FinishedSession {
  done: true;
  elections_played: number;
  raw_total_cents: number;
  payout_cents: number;
  payout_dollars: string;
}

export type CurrentElection = ActiveElection | FinishedSession;

export interface BallotOutcome {
  index: number;
  scenario_id: string;
  k: number;
  n: number;
  ballot: string[];
  winners: string[];
  delta_cents: number;
  delta_dollars: string;
  missing_ballots: string[][];
  cumulative_cents: number;
  done: boolean;
}

export interface SessionSummary {
  session_id: string;
  group: string;
  done: boolean;
  elections_played: number;
  playlist_length: number;
  raw_total_cents: number;
  payout_cents: number;
  payout_dollars: string;
  history: Array<{
    index: number;
    scenario_id: string;
    k: number;
    n: number;
    ballot: string[];
    winners: string[];
    delta_cents: number;
  }>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ExperimentClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      const detail = await res
        .json()
        .then((doc: { detail?: unknown }) => String(doc.detail ?? res.statusText))
        .catch(() => res.statusText);
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  createSession(group?: string, seed?: number): Promise<CreateSessionResponse> {
    const body: Record<string, unknown> = {};
    if (group !== undefined) body.group = group;
    if (seed !== undefined) body.seed = seed;
    return this.request<CreateSessionResponse>("POST", "/sessions", body);
  }

  currentElection(sessionId: string): Promise<CurrentElection> {
    return this.request<CurrentElection>("GET", `/sessions/${sessionId}/current`);
  }

  submitBallot(
    sessionId: string,
    approved: string[],
    electionIndex?: number,
  ): Promise<BallotOutcome> {
    const body: Record<string, unknown> = { approved };
    if (electionIndex !== undefined) body.election_index = electionIndex;
    return this.request<BallotOutcome>("POST", `/sessions/${sessionId}/ballot`, body);
  }

  summary(sessionId: string): Promise<SessionSummary> {
    return this.request<SessionSummary>("GET", `/sessions/${sessionId}/summary`);
  }
}
