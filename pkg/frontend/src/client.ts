// Session client: REST turns plus the live event-stream subscription.
//
// One stream is opened right after the session is created and feeds the
// reducer for the whole conversation, so filler events render while the
// model call is still running. The POST response doubles as the turn's
// end marker: once its events have been applied, the input unlocks.

import {
  applyEvents,
  beginTurn,
  canSubmit,
  finishTurn,
  initialViewState,
  type EventLogger,
} from "./reducer.js";
import type {
  ChatViewState,
  CreateSessionResponse,
  ServerEvent,
  UtteranceResponse,
} from "./types.js";

export type FetchLike = typeof fetch;

export interface SessionClientOptions {
  baseUrl: string;
  onState?: (state: ChatViewState) => void;
  fetchFn?: FetchLike;
  log?: EventLogger;
}

export class SessionClient {
  readonly baseUrl: string;
  state: ChatViewState = initialViewState;
  sessionId: string | null = null;

  private readonly onState: (state: ChatViewState) => void;
  private readonly fetchFn: FetchLike;
  private readonly log: EventLogger;
  private streamAbort: AbortController | null = null;

  constructor(options: SessionClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, "");
    this.onState = options.onState ?? (() => undefined);
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
    this.log = options.log ?? (() => undefined);
  }

  private setState(state: ChatViewState): void {
    if (state !== this.state) {
      this.state = state;
      this.onState(state);
    }
  }

  private apply(events: ServerEvent[]): void {
    this.setState(applyEvents(this.state, events, this.log));
  }

  async createSession(): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/sessions`, {
      method: "POST",
    });
    if (!response.ok) {
      throw new Error(`session create failed: HTTP ${response.status}`);
    }
    const body = (await response.json()) as CreateSessionResponse;
    this.sessionId = body.session_id;
    this.apply(body.events);
    this.setState(finishTurn(this.state));
    void this.subscribe();
    return body.session_id;
  }

  /** Send one user utterance. Disabled input makes this a no-op. */
  async submitUtterance(text: string): Promise<void> {
    if (!canSubmit(this.state, text) || this.sessionId === null) {
      return;
    }
    this.setState(beginTurn(this.state, text));
    let response: Response;
    try {
      response = await this.fetchFn(
        `${this.baseUrl}/v1/sessions/${this.sessionId}/utterances`,
        {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify({ text }),
        },
      );
    } catch (error) {
      // network failure: keep the transcript, offer a retry
      this.setState(finishTurn(this.state, "送信に失敗しました。もう一度お試しください。"));
      return;
    }
    if (response.status === 409) {
      this.setState({
        ...this.state,
        ended: true,
        inputEnabled: false,
        notice: "対話は終了しました",
      });
      return;
    }
    if (!response.ok) {
      this.setState(finishTurn(this.state, `エラーが発生しました (HTTP ${response.status})`));
      return;
    }
    const body = (await response.json()) as UtteranceResponse;
    // the stream usually applied these already; seq dedup makes this safe
    this.apply(body.events);
    this.setState(finishTurn(this.state));
  }

  /** Follow the server-push stream; events render in seq order as they land. */
  async subscribe(): Promise<void> {
    if (this.sessionId === null) {
      return;
    }
    this.streamAbort?.abort();
    this.streamAbort = new AbortController();
    const url =
      `${this.baseUrl}/v1/sessions/${this.sessionId}/events?after=${this.state.lastSeq}`;
    try {
      const response = await this.fetchFn(url, { signal: this.streamAbort.signal });
      if (!response.ok || response.body === null) {
        return;
      }
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      const parser = new SseParser();
      for (;;) {
        const { value, done } = await reader.read();
        if (done) {
          break;
        }
        for (const payload of parser.push(decoder.decode(value, { stream: true }))) {
          this.apply([JSON.parse(payload) as ServerEvent]);
        }
      }
    } catch (error) {
      if (!this.streamAbort.signal.aborted) {
        this.log(`event stream dropped: ${String(error)}`, { type: "end", seq: -1 });
      }
    }
  }

  close(): void {
    this.streamAbort?.abort();
  }
}

/** Incremental text/event-stream parser; yields the data payloads. */
export class SseParser {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const payloads: string[] = [];
    let index: number;
    while ((index = this.buffer.indexOf("\n\n")) >= 0) {
      const block = this.buffer.slice(0, index);
      this.buffer = this.buffer.slice(index + 2);
      const data = block
        .split("\n")
        .filter((line) => line.startsWith("data: "))
        .map((line) => line.slice("data: ".length))
        .join("\n");
      if (data.length > 0) {
        payloads.push(data);
      }
      // comment-only blocks (heartbeats) carry no data and are ignored
    }
    return payloads;
  }
}
