// Pure view-state reducer over the service's ordered event stream.
//
// Events carry a per-session strictly increasing seq; anything at or below
// the last applied seq is dropped (the live stream and the POST response
// overlap, so duplicates are routine, not errors).

import type { ChatViewState, RoutePanel, ServerEvent } from "./types.js";

export const initialViewState: ChatViewState = {
  messages: [],
  imagePanel: null,
  routePanel: null,
  inputEnabled: false,
  ended: false,
  lastSeq: 0,
  notice: null,
};

export type EventLogger = (message: string, event: ServerEvent) => void;

const noopLog: EventLogger = () => undefined;

export function applyEvent(
  state: ChatViewState,
  event: ServerEvent,
  log: EventLogger = noopLog,
): ChatViewState {
  if (event.seq <= state.lastSeq) {
    log(`dropped out-of-order event seq=${event.seq} (have ${state.lastSeq})`, event);
    return state;
  }
  const next: ChatViewState = { ...state, lastSeq: event.seq };
  switch (event.type) {
    case "utterance":
      next.messages = [...state.messages, { side: "system", text: event.text }];
      return next;
    case "filler":
      next.messages = [...state.messages, { side: "filler", text: event.text }];
      return next;
    case "image":
      next.imagePanel = event.image_id;
      return next;
    case "routes": {
      if (event.routes.length !== 2) {
        log(`routes event without exactly 2 routes (${event.routes.length})`, event);
        return state;
      }
      const panel: RoutePanel = {
        routes: [event.routes[0]!, event.routes[1]!],
        reasons: [...event.reasons],
      };
      next.routePanel = panel;
      return next;
    }
    case "end":
      next.ended = true;
      next.inputEnabled = false;
      next.notice = "対話は終了しました";
      return next;
    default:
      log("unknown event type", event);
      return state;
  }
}

export function applyEvents(
  state: ChatViewState,
  events: ServerEvent[],
  log: EventLogger = noopLog,
): ChatViewState {
  return events.reduce((acc, event) => applyEvent(acc, event, log), state);
}

/** User pressed send: append the bubble optimistically and lock the input. */
export function beginTurn(state: ChatViewState, text: string): ChatViewState {
  return {
    ...state,
    messages: [...state.messages, { side: "user", text }],
    inputEnabled: false,
    notice: null,
  };
}

/** Turn delivered in full (or failed): unlock unless the dialogue ended. */
export function finishTurn(state: ChatViewState, notice: string | null = null): ChatViewState {
  return {
    ...state,
    inputEnabled: !state.ended,
    notice: state.ended ? state.notice : notice,
  };
}

export function canSubmit(state: ChatViewState, text: string): boolean {
  return state.inputEnabled && !state.ended && text.trim().length > 0;
}
