/** Message thread per patient: compose text, attach a voice note, delivery state. */

import { playableUrl, type Api } from "../api.js";
import { clear, el } from "../dom.js";
import type { Message } from "../types.js";

export const MAX_VOICE_NOTE_BYTES = 5 * 1024 * 1024;

async function messageRow(api: Api, message: Message): Promise<HTMLElement> {
  const row = el("div", {
    class: `message message-from-${message.from} ${message.delivered ? "delivered" : "undelivered"}`,
    "data-message": message.id,
  },
    el("span", { class: "message-meta" }, `${message.from} · ${message.created_at}`),
  );
  if (message.kind === "text") {
    row.append(el("p", { class: "message-text" }, message.text ?? ""));
  } else if (message.payload_ref) {
    try {
      const url = await playableUrl(await api.audioBlob(`/audio/${message.payload_ref}`));
      row.append(el("audio", { controls: true, src: url, class: "voice-note" }));
    } catch {
      row.append(el("span", { class: "audio-missing" }, "voice note unavailable"));
    }
  }
  row.append(
    el("span", { class: "delivery-status" }, message.delivered ? "delivered" : "pending"),
  );
  return row;
}

export async function renderMessages(api: Api, patientId: string): Promise<HTMLElement> {
  const thread = el("div", { class: "message-thread" });
  const root = el("section", { class: "messages-view", "data-patient": patientId },
    el("h2", {}, "Messages"), thread);

  const reload = async () => {
    const messages = await api.messages(patientId);
    clear(thread);
    for (const message of messages) {
      thread.append(await messageRow(api, message));
    }
    if (!messages.length) thread.append(el("p", { class: "empty-state" }, "No messages yet."));
  };

  const input = el("input", { class: "compose-text", type: "text", placeholder: "Instruction for the patient" }) as HTMLInputElement;
  const send = el("button", { class: "send-text", disabled: true }, "Send") as HTMLButtonElement;
  input.addEventListener("input", () => {
    send.disabled = input.value.trim().length === 0;
  });
  send.addEventListener("click", () => {
    const text = input.value.trim();
    if (!text) return;
    void api.sendText(patientId, text).then(() => {
      input.value = "";
      send.disabled = true;
      return reload();
    });
  });

  const file = el("input", { class: "attach-voice", type: "file", accept: "audio/wav" }) as HTMLInputElement;
  const attachStatus = el("span", { class: "attach-status" });
  file.addEventListener("change", () => {
    const blob = file.files?.[0];
    if (!blob) return;
    if (blob.size > MAX_VOICE_NOTE_BYTES) {
      attachStatus.textContent = "file too large (5 MB limit)";
      file.value = "";
      return; // rejected client-side, nothing hits the network
    }
    attachStatus.textContent = "sending…";
    void api.sendVoice(patientId, blob, blob.name || "note.wav").then(() => {
      attachStatus.textContent = "voice note sent";
      file.value = "";
      return reload();
    });
  });

  root.append(
    el("div", { class: "composer" }, input, send, file, attachStatus),
    el("button", { class: "refresh-thread", onclick: () => void reload() }, "Refresh"),
  );
  await reload();
  return root;
}
