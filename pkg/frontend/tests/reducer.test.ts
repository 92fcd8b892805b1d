import { describe, expect, it } from "vitest";

import {
  applyEvent,
  applyEvents,
  beginTurn,
  canSubmit,
  finishTurn,
  initialViewState,
} from "../src/reducer.js";
import type { RouteCard, ServerEvent } from "../src/types.js";

const route = (id: string): RouteCard => ({
  route_id: id,
  name: `ルート${id}`,
  spots: ["甲", "乙"],
  transport: "バス",
});

describe("applyEvent", () => {
  it("appends system utterances in order", () => {
    let s = applyEvent(initialViewState, { type: "utterance", text: "こんにちは？", seq: 1 });
    s = applyEvent(s, { type: "utterance", text: "お元気ですか？", seq: 2 });
    expect(s.messages.map((m) => m.text)).toEqual(["こんにちは？", "お元気ですか？"]);
    expect(s.messages.every((m) => m.side === "system")).toBe(true);
    expect(s.lastSeq).toBe(2);
  });

  it("styles filler messages distinctly and keeps input disabled", () => {
    const s = applyEvent(initialViewState, { type: "filler", text: "少々お待ちください", seq: 1 });
    expect(s.messages[0]).toEqual({ side: "filler", text: "少々お待ちください" });
    expect(s.inputEnabled).toBe(false);
  });

  it("sets the image panel", () => {
    const s = applyEvent(initialViewState, { type: "image", image_id: "quiz_kinkakuji", seq: 1 });
    expect(s.imagePanel).toBe("quiz_kinkakuji");
  });

  it("renders a routes event as exactly two cards with reasons", () => {
    const s = applyEvent(initialViewState, {
      type: "routes",
      routes: [route("r1"), route("r2")],
      reasons: ["バスがお好きと伺ったので"],
      seq: 1,
    });
    expect(s.routePanel).not.toBeNull();
    expect(s.routePanel!.routes.map((r) => r.route_id)).toEqual(["r1", "r2"]);
    expect(s.routePanel!.reasons).toHaveLength(1);
  });

  it("rejects a routes event that does not carry two routes", () => {
    const dropped: ServerEvent[] = [];
    const s = applyEvent(
      initialViewState,
      { type: "routes", routes: [route("r1")], reasons: [], seq: 1 },
      (_message, event) => dropped.push(event),
    );
    expect(s.routePanel).toBeNull();
    expect(dropped).toHaveLength(1);
  });

  it("end sets ended and disables input permanently", () => {
    let s = { ...initialViewState, inputEnabled: true };
    s = applyEvent(s, { type: "end", seq: 1 });
    expect(s.ended).toBe(true);
    expect(s.inputEnabled).toBe(false);
    // finishing a turn afterwards must not re-enable
    expect(finishTurn(s).inputEnabled).toBe(false);
  });

  it("drops stale and duplicate seqs, logging them", () => {
    const logged: string[] = [];
    let s = applyEvent(initialViewState, { type: "utterance", text: "一", seq: 3 });
    s = applyEvent(s, { type: "utterance", text: "古い", seq: 2 }, (m) => logged.push(m));
    s = applyEvent(s, { type: "utterance", text: "重複", seq: 3 }, (m) => logged.push(m));
    expect(s.messages.map((m) => m.text)).toEqual(["一"]);
    expect(logged).toHaveLength(2);
  });

  it("is pure: same input state and event give the same output, untouched input", () => {
    const event: ServerEvent = { type: "utterance", text: "同じ？", seq: 1 };
    const before = JSON.stringify(initialViewState);
    const a = applyEvent(initialViewState, event);
    const b = applyEvent(initialViewState, event);
    expect(a).toEqual(b);
    expect(JSON.stringify(initialViewState)).toBe(before);
  });
});

describe("randomized streams", () => {
  // deterministic LCG so failures are reproducible
  const lcg = (seed: number) => () => {
    seed = (seed * 1664525 + 1013904223) >>> 0;
    return seed / 2 ** 32;
  };

  const randomEvent = (seq: number, rand: () => number): ServerEvent => {
    const roll = rand();
    if (roll < 0.5) return { type: "utterance", text: `msg-${seq}`, seq };
    if (roll < 0.7) return { type: "filler", text: `filler-${seq}`, seq };
    if (roll < 0.85) return { type: "image", image_id: `img_${seq}`, seq };
    return { type: "routes", routes: [route("a"), route("b")], reasons: [], seq };
  };

  it("rendered message order equals seq order on 100 streams", () => {
    for (let run = 0; run < 100; run++) {
      const rand = lcg(run + 1);
      const n = 1 + Math.floor(rand() * 30);
      const events: ServerEvent[] = [];
      for (let seq = 1; seq <= n; seq++) {
        events.push(randomEvent(seq, rand));
      }
      // delivery replays some events (duplicates), never reorders fresh ones
      const delivered: ServerEvent[] = [];
      for (const event of events) {
        delivered.push(event);
        if (rand() < 0.3 && delivered.length > 1) {
          delivered.push(delivered[Math.floor(rand() * (delivered.length - 1))]!);
        }
      }
      const state = applyEvents(initialViewState, delivered);
      const expected = events
        .filter((e) => e.type === "utterance" || e.type === "filler")
        .map((e) => ("text" in e ? e.text : ""));
      expect(state.messages.map((m) => m.text)).toEqual(expected);
      expect(state.lastSeq).toBe(n);
    }
  });
});

describe("turn bookkeeping", () => {
  it("beginTurn appends the user bubble and locks input", () => {
    const s = beginTurn({ ...initialViewState, inputEnabled: true }, "はい");
    expect(s.messages.at(-1)).toEqual({ side: "user", text: "はい" });
    expect(s.inputEnabled).toBe(false);
  });

  it("finishTurn unlocks unless ended", () => {
    const open = finishTurn({ ...initialViewState, inputEnabled: false });
    expect(open.inputEnabled).toBe(true);
    const closed = finishTurn({ ...initialViewState, ended: true });
    expect(closed.inputEnabled).toBe(false);
  });

  it("canSubmit requires enabled input and non-blank text", () => {
    const enabled = { ...initialViewState, inputEnabled: true };
    expect(canSubmit(enabled, "はい")).toBe(true);
    expect(canSubmit(enabled, "   ")).toBe(false);
    expect(canSubmit(initialViewState, "はい")).toBe(false);
    expect(canSubmit({ ...enabled, ended: true }, "はい")).toBe(false);
  });
});
