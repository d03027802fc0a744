// Participant-facing flow: instructions -> one screen per election
// (ballot form, then outcome reveal) -> final earnings summary.
//
// The app is stateless beyond the session id (kept in storage so a page
// reload resumes wherever the server's cursor is); everything shown on the
// outcome screen is rendered verbatim from the service response.

import {
  ActiveElection,
  ApiError,
  BallotOutcome,
  CurrentElection,
  ExperimentClient,
  SessionSummary,
} from "./api.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export const SESSION_STORAGE_KEY = "avkit-session-id";

type Screen = "loading" | "instructions" | "election" | "outcome" | "summary" | "fatal";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function money(dollars: string): string {
  // "0.25" -> "$0.25", "+0.25" -> "+$0.25", "-1.00" -> "-$1.00"
  if (dollars.startsWith("-")) return `-$${dollars.slice(1)}`;
  if (dollars.startsWith("+")) return `+$${dollars.slice(1)}`;
  return `$${dollars}`;
}

function ballotText(labels: string[]): string {
  return labels.length ? labels.join(", ") : "(abstained)";
}

const INSTRUCTIONS_HTML = `
  <h1>Voting study</h1>
  <p>You will take part in a series of unrelated hypothetical elections.
  Each election uses <strong>approval voting</strong>: you may vote for as many
  candidates as you like &mdash; none, some, or all of them.</p>
  <p>Each candidate shows how much you earn if that candidate ends up among
  the winners. The candidates with the most votes win. <strong>Ties are broken
  at random:</strong> if two candidates tie for the last winning spot, each is
  equally likely to get it.</p>
  <p>Example: candidates A and B both have 4 votes, C has 3, and one winner is
  elected. A coin flip decides between A and B, so each wins half the time.
  Example: with two winners, A and B win outright.</p>
  <p>Some elections are still waiting on other voters. Their ballots are cast
  after yours, and you will see them once the election is decided.</p>
  <p>After each election you will see the winners, what you earned, and the
  ballots of any missing voters. Your bonus is the total you earn across all
  elections.</p>
`;

export class ParticipantApp {
  private screen: Screen = "loading";
  private sessionId: string | null = null;
  private view: ActiveElection | null = null;
  private outcome: BallotOutcome | null = null;
  private summaryData: SessionSummary | null = null;
  private selected = new Set<string>();
  private inFlight = false;
  private errorMessage: string | null = null;
  private fatalMessage = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ExperimentClient,
    private readonly storage: StorageLike,
  ) {}

  async start(): Promise<void> {
    const stored = this.storage.getItem(SESSION_STORAGE_KEY);
    if (stored) {
      // Reload mid-study: resume at the server's cursor, no instructions.
      this.sessionId = stored;
      await this.loadCurrent();
      return;
    }
    this.render();
    try {
      const created = await this.client.createSession();
      this.sessionId = created.session_id;
      this.storage.setItem(SESSION_STORAGE_KEY, created.session_id);
      this.screen = "instructions";
    } catch (err) {
      this.fail(err);
    }
    this.render();
  }

  async beginElections(): Promise<void> {
    await this.loadCurrent();
  }

  private async loadCurrent(): Promise<void> {
    if (!this.sessionId) return;
    try {
      // Deliberately leaves any error banner up: a 409 resync should still
      // show the server's message on the refreshed screen.
      const current: CurrentElection = await this.client.currentElection(this.sessionId);
      if (current.done) {
        await this.loadSummary();
        return;
      }
      this.view = current;
      this.outcome = null;
      this.selected = new Set();
      this.screen = "election";
    } catch (err) {
      this.fail(err);
    }
    this.render();
  }

  private async loadSummary(): Promise<void> {
    if (!this.sessionId) return;
    try {
      this.summaryData = await this.client.summary(this.sessionId);
      this.screen = "summary";
    } catch (err) {
      this.fail(err);
    }
    this.render();
  }

  toggle(label: string): void {
    if (this.selected.has(label)) {
      this.selected.delete(label);
    } else {
      this.selected.add(label);
    }
  }

  async submitBallot(): Promise<void> {
    if (!this.sessionId || !this.view || this.inFlight) return;
    const approved = this.view.candidates
      .map((c) => c.label)
      .filter((label) => this.selected.has(label));
    this.inFlight = true;
    this.errorMessage = null;
    this.render();
    try {
      this.outcome = await this.client.submitBallot(this.sessionId, approved, this.view.index);
      this.screen = "outcome";
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Already submitted (e.g. double click straddling a reload): surface
        // the server's message and resync to its cursor.
        this.errorMessage = err.message;
        this.inFlight = false;
        await this.loadCurrent();
        return;
      }
      // Network failure or server error: keep the marked ballot for retry.
      this.errorMessage = err instanceof Error ? err.message : String(err);
    }
    this.inFlight = false;
    this.render();
  }

  async continueFromOutcome(): Promise<void> {
    if (!this.outcome) return;
    if (this.outcome.done) {
      await this.loadSummary();
    } else {
      await this.loadCurrent();
    }
  }

  private fail(err: unknown): void {
    this.fatalMessage = err instanceof Error ? err.message : String(err);
    this.screen = "fatal";
  }

  // --- rendering -----------------------------------------------------------

  render(): void {
    this.root.innerHTML = this.html();
    this.bind();
  }

  private html(): string {
    const banner = this.errorMessage
      ? `<div id="error-banner" role="alert">${esc(this.errorMessage)}
           <button id="retry-button" type="button">Try again</button></div>`
      : "";
    switch (this.screen) {
      case "loading":
        return `<main id="screen-loading"><p>Loading&hellip;</p></main>`;
      case "instructions":
        return `<main id="screen-instructions">${INSTRUCTIONS_HTML}
          <button id="begin-button" type="button">Begin</button></main>`;
      case "election":
        return `<main id="screen-election">${banner}${this.electionHtml()}</main>`;
      case "outcome":
        return `<main id="screen-outcome">${banner}${this.outcomeHtml()}</main>`;
      case "summary":
        return `<main id="screen-summary">${this.summaryHtml()}</main>`;
      case "fatal":
        return `<main id="screen-fatal"><p>Something went wrong: ${esc(this.fatalMessage)}</p></main>`;
    }
  }

  private electionHtml(): string {
    const view = this.view;
    if (!view) return "";
    const rows = view.candidates
      .map(
        (c) => `<tr>
          <td><label><input type="checkbox" data-label="${esc(c.label)}"
            ${this.selected.has(c.label) ? "checked" : ""}
            ${this.inFlight ? "disabled" : ""}> ${esc(c.label)}</label></td>
          <td>${c.votes}</td>
          <td>${esc(money(c.payout_dollars))}</td>
        </tr>`,
      )
      .join("");
    return `
      <h1>Election ${view.index + 1} of ${view.total}</h1>
      <p id="election-kind">${view.k} winner${view.k > 1 ? "s" : ""} will be elected.</p>
      <p id="missing-banner">${esc(view.voters_remaining)}</p>
      <table id="candidate-table">
        <thead><tr><th>Vote</th><th>Votes so far</th><th>You earn if elected</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      <p>Vote for as many candidates as you like (0 to ${view.candidates.length}).</p>
      <button id="submit-button" type="button" ${this.inFlight ? "disabled" : ""}>
        Submit ballot</button>`;
  }

  private outcomeHtml(): string {
    const outcome = this.outcome;
    if (!outcome) return "";
    const missing = outcome.missing_ballots.length
      ? `<section id="missing-ballots"><h2>Missing voters' ballots</h2><ul>
          ${outcome.missing_ballots
            .map((b, i) => `<li>Missing voter ${i + 1} voted: ${esc(ballotText(b))}</li>`)
            .join("")}
         </ul></section>`
      : "";
    return `
      <h1>Election ${outcome.index + 1} results</h1>
      <p id="your-ballot">Your ballot: ${esc(ballotText(outcome.ballot))}</p>
      <p id="winners">Winner${outcome.winners.length > 1 ? "s" : ""}: ${esc(
        outcome.winners.join(", "),
      )}</p>
      <p id="earned">You earned: ${esc(money(outcome.delta_dollars))}</p>
      ${missing}
      <button id="continue-button" type="button">
        ${outcome.done ? "See your total" : "Next election"}</button>`;
  }

  private summaryHtml(): string {
    const summary = this.summaryData;
    if (!summary) return "";
    return `
      <h1>All done!</h1>
      <p>You voted in ${summary.elections_played} elections.</p>
      <p id="total-earnings">Your bonus: ${esc(money(summary.payout_dollars))}</p>
      <p>Thank you for taking part.</p>`;
  }

  private bind(): void {
    this.root.querySelector<HTMLButtonElement>("#begin-button")?.addEventListener("click", () => {
      void this.beginElections();
    });
    this.root.querySelectorAll<HTMLInputElement>("input[data-label]").forEach((box) => {
      box.addEventListener("change", () => this.toggle(box.dataset.label ?? ""));
    });
    this.root.querySelector<HTMLButtonElement>("#submit-button")?.addEventListener("click", () => {
      void this.submitBallot();
    });
    this.root
      .querySelector<HTMLButtonElement>("#continue-button")
      ?.addEventListener("click", () => {
        void this.continueFromOutcome();
      });
    this.root.querySelector<HTMLButtonElement>("#retry-button")?.addEventListener("click", () => {
      void this.submitBallot();
    });
  }
}
