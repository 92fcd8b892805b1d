import { SessionClient } from "./client.js";
import { renderView, type UiElements } from "./ui.js";

function grab(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el;
}

function boot(): void {
  const ui: UiElements = {
    transcript: grab("transcript"),
    imagePanel: grab("image-panel"),
    routePanel: grab("route-panel"),
    notice: grab("notice"),
    input: grab("utterance-input") as HTMLInputElement,
    sendButton: grab("send-button") as HTMLButtonElement,
  };

  const base = (window as { TOURGUIDE_BASE_URL?: string }).TOURGUIDE_BASE_URL
    ?? window.location.origin;
  const client = new SessionClient({
    baseUrl: base,
    onState: (state) => renderView(state, ui),
    log: (message) => console.warn(message),
  });

  const submit = () => {
    const text = ui.input.value;
    ui.input.value = "";
    void client.submitUtterance(text);
  };
  ui.sendButton.addEventListener("click", submit);
  ui.input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      submit();
    }
  });

  renderView(client.state, ui);
  void client.createSession().catch((error) => {
    ui.notice.textContent = `接続できませんでした: ${error}`;
    ui.notice.hidden = false;
  });
}

boot();
