// DOM rendering: transcript column plus the two side panels that play the
// guide robot's monitor role (quiz image, route cards with reasons).

import type { ChatViewState } from "./types.js";

export const FILLER_CLASS = "bubble-filler";
export const USER_CLASS = "bubble-user";
export const SYSTEM_CLASS = "bubble-system";

export interface UiElements {
  transcript: HTMLElement;
  imagePanel: HTMLElement;
  routePanel: HTMLElement;
  notice: HTMLElement;
  input: HTMLInputElement;
  sendButton: HTMLButtonElement;
}

const SIDE_CLASS: Record<string, string> = {
  user: USER_CLASS,
  system: SYSTEM_CLASS,
  filler: FILLER_CLASS,
};

export function renderView(state: ChatViewState, ui: UiElements): void {
  const doc = ui.transcript.ownerDocument;

  ui.transcript.replaceChildren();
  for (const message of state.messages) {
    const bubble = doc.createElement("div");
    bubble.className = `bubble ${SIDE_CLASS[message.side] ?? SYSTEM_CLASS}`;
    bubble.textContent = message.text;
    ui.transcript.appendChild(bubble);
  }
  ui.transcript.scrollTop = ui.transcript.scrollHeight;

  ui.imagePanel.replaceChildren();
  if (state.imagePanel !== null) {
    const figure = doc.createElement("div");
    figure.className = "quiz-image";
    figure.dataset.imageId = state.imagePanel;
    figure.textContent = `📷 ${state.imagePanel}`;
    ui.imagePanel.appendChild(figure);
  }

  ui.routePanel.replaceChildren();
  if (state.routePanel !== null) {
    for (const route of state.routePanel.routes) {
      const card = doc.createElement("div");
      card.className = "route-card";
      card.dataset.routeId = route.route_id;
      const title = doc.createElement("h3");
      title.textContent = route.name;
      const spots = doc.createElement("p");
      spots.textContent = `${route.spots.join(" → ")}（${route.transport}）`;
      card.append(title, spots);
      if (route.description) {
        const description = doc.createElement("p");
        description.textContent = route.description;
        card.appendChild(description);
      }
      ui.routePanel.appendChild(card);
    }
    if (state.routePanel.reasons.length > 0) {
      const reasons = doc.createElement("ul");
      reasons.className = "route-reasons";
      for (const reason of state.routePanel.reasons) {
        const item = doc.createElement("li");
        item.textContent = reason;
        reasons.appendChild(item);
      }
      ui.routePanel.appendChild(reasons);
    }
  }

  ui.notice.textContent = state.notice ?? "";
  ui.notice.hidden = state.notice === null;

  ui.input.disabled = !state.inputEnabled || state.ended;
  ui.sendButton.disabled = !state.inputEnabled || state.ended;
}
