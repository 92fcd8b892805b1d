// @vitest-environment jsdom

import { describe, expect, it } from "vitest";

import { applyEvents, initialViewState } from "../src/reducer.js";
import { FILLER_CLASS, USER_CLASS, renderView, type UiElements } from "../src/ui.js";
import type { ServerEvent } from "../src/types.js";

function elements(): UiElements {
  document.body.innerHTML = `
    <div id="transcript"></div>
    <section id="image-panel"></section>
    <section id="route-panel"></section>
    <div id="notice" hidden></div>
    <input id="input" type="text">
    <button id="send">送信</button>`;
  return {
    transcript: document.getElementById("transcript")!,
    imagePanel: document.getElementById("image-panel")!,
    routePanel: document.getElementById("route-panel")!,
    notice: document.getElementById("notice")!,
    input: document.getElementById("input") as HTMLInputElement,
    sendButton: document.getElementById("send") as HTMLButtonElement,
  };
}

const sampleEvents: ServerEvent[] = [
  { type: "image", image_id: "quiz_kinkakuji", seq: 1 },
  { type: "utterance", text: "ここはどこかわかりますか？", seq: 2 },
  { type: "filler", text: "少々お待ちください", seq: 3 },
  {
    type: "routes",
    routes: [
      { route_id: "r1", name: "北ルート", spots: ["甲", "乙"], transport: "バス" },
      { route_id: "r2", name: "南ルート", spots: ["丙", "丁"], transport: "電車" },
    ],
    reasons: ["バスがお好きと伺ったので"],
    seq: 4,
  },
];

describe("renderView", () => {
  it("flags filler bubbles with their own class", () => {
    const ui = elements();
    const state = applyEvents({ ...initialViewState, inputEnabled: true }, sampleEvents);
    renderView(state, ui);
    const bubbles = [...ui.transcript.children];
    expect(bubbles).toHaveLength(2);
    expect(bubbles[1]!.className).toContain(FILLER_CLASS);
    expect(bubbles[0]!.className).not.toContain(FILLER_CLASS);
  });

  it("renders a user bubble with the user class", () => {
    const ui = elements();
    renderView({
      ...initialViewState,
      messages: [{ side: "user", text: "はい" }],
    }, ui);
    expect(ui.transcript.children[0]!.className).toContain(USER_CLASS);
  });

  it("shows the quiz image panel and two route cards with reasons", () => {
    const ui = elements();
    const state = applyEvents(initialViewState, sampleEvents);
    renderView(state, ui);
    expect(ui.imagePanel.querySelector(".quiz-image")).not.toBeNull();
    const cards = ui.routePanel.querySelectorAll(".route-card");
    expect(cards).toHaveLength(2);
    expect(cards[0]!.textContent).toContain("北ルート");
    expect(ui.routePanel.querySelectorAll(".route-reasons li")).toHaveLength(1);
  });

  it("disables the composer while a turn is in flight and after end", () => {
    const ui = elements();
    renderView({ ...initialViewState, inputEnabled: false }, ui);
    expect(ui.input.disabled).toBe(true);
    expect(ui.sendButton.disabled).toBe(true);

    renderView({ ...initialViewState, inputEnabled: true }, ui);
    expect(ui.input.disabled).toBe(false);

    const ended = applyEvents({ ...initialViewState, inputEnabled: true },
                              [{ type: "end", seq: 1 }]);
    renderView(ended, ui);
    expect(ui.input.disabled).toBe(true);
    expect(ui.notice.hidden).toBe(false);
    expect(ui.notice.textContent).toContain("終了");
  });
});
