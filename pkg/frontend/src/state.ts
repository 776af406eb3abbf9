/**
 * Console state machine.
 *
 * One request is in flight at a time (the pending gate doubles as the
 * input-disabled flag).  Candidates are active only immediately after
 * an ambiguous response and are cleared by the next action, success or
 * not.  Refreshing the page clears everything; the server's feedback
 * log is the record of truth.
 */

import { Api } from "./api.js";

export const MAX_CANDIDATES = 5;

export type Turn =
  | { kind: "user"; text: string }
  | { kind: "answer"; class: string; confidence: number | null }
  | { kind: "rejection"; bestConfidence: number }
  | { kind: "prompt"; count: number }
  | { kind: "error"; message: string };

export interface ActiveCandidate {
  class: string;
  confidence: number;
  exampleQuery: string;
  queryId: string;
}

export interface ViewState {
  transcript: Turn[];
  pending: boolean;
  activeCandidates: ActiveCandidate[];
}

export function initialState(): ViewState {
  return { transcript: [], pending: false, activeCandidates: [] };
}

export class Console {
  state: ViewState = initialState();

  constructor(
    private readonly api: Api,
    private readonly onChange: (state: ViewState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  /** Send a query; no-op while a request is pending or for blank text. */
  async submitQuery(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || this.state.pending) {
      return;
    }
    this.state.pending = true;
    this.state.activeCandidates = [];
    this.state.transcript.push({ kind: "user", text: trimmed });
    this.emit();
    try {
      const response = await this.api.classify(trimmed);
      if (response.status === "answered" && response.class !== null) {
        this.state.transcript.push({
          kind: "answer",
          class: response.class,
          confidence: response.confidence,
        });
      } else if (response.status === "ambiguous") {
        const offered = response.candidates.slice(0, MAX_CANDIDATES);
        this.state.transcript.push({ kind: "prompt", count: offered.length });
        this.state.activeCandidates = offered.map((candidate) => ({
          class: candidate.class,
          confidence: candidate.confidence,
          exampleQuery: candidate.example_query,
          queryId: response.query_id,
        }));
      } else {
        this.state.transcript.push({
          kind: "rejection",
          bestConfidence: response.confidence,
        });
      }
    } catch (error) {
      this.state.transcript.push({ kind: "error", message: String(error) });
    } finally {
      this.state.pending = false;
      this.emit();
    }
  }

  /** Resolve an ambiguous answer by picking one of the offered candidates. */
  async pickCandidate(index: number): Promise<void> {
    const candidate = this.state.activeCandidates[index];
    if (!candidate || this.state.pending) {
      return;
    }
    this.state.pending = true;
    this.emit();
    try {
      await this.api.feedback(candidate.queryId, candidate.class);
      this.state.transcript.push({
        kind: "answer",
        class: candidate.class,
        confidence: candidate.confidence,
      });
    } catch (error) {
      this.state.transcript.push({ kind: "error", message: String(error) });
    } finally {
      this.state.activeCandidates = [];
      this.state.pending = false;
      this.emit();
    }
  }
}
