/** Session review: per-attempt playback, score, overlays, spectrogram. */

import { playableUrl, type Api } from "../api.js";
import { contourOverlay, renderSpectrogram } from "../charts.js";
import { el } from "../dom.js";
import type { SessionEntry } from "../types.js";

async function attemptRow(api: Api, entry: SessionEntry): Promise<HTMLElement> {
  const row = el("article", { class: "attempt-row", "data-utterance": entry.utterance_id },
    el("header", {},
      el("strong", {}, entry.item_text ?? entry.item_id),
      el("span", { class: `decision decision-${entry.decision}` }, entry.decision),
      el("span", { class: "closeness" }, `closeness ${entry.closeness.toFixed(2)}`),
      el("time", {}, entry.at),
    ),
  );

  if (entry.audio_url) {
    try {
      const url = await playableUrl(await api.audioBlob(entry.audio_url));
      row.append(el("audio", { controls: true, src: url, class: "attempt-audio" }));
    } catch {
      row.append(el("span", { class: "audio-missing" }, "audio unavailable"));
    }
  } else {
    row.append(el("span", { class: "audio-missing" }, "audio unavailable"));
  }

  const worst = entry.feedback?.worst_features ?? [];
  if (worst.length) {
    row.append(
      el("div", { class: "worst-chips" },
        ...worst.map((name) => el("span", { class: "chip" }, name))),
    );
  }

  const graphs = entry.feedback?.graph_payload;
  if (graphs?.pitch_hz) row.append(contourOverlay(graphs.pitch_hz, "pitch (Hz)"));
  if (graphs?.energy_db) row.append(contourOverlay(graphs.energy_db, "energy (dB)"));

  const canvas = el("canvas", { class: "spectrogram" });
  row.append(canvas);
  try {
    renderSpectrogram(await api.spectrogram(entry.utterance_id), canvas);
  } catch {
    canvas.replaceWith(el("span", { class: "spectrogram-missing" }, "spectrogram unavailable"));
  }
  return row;
}

export async function renderSession(api: Api, sessionId: string): Promise<HTMLElement> {
  const detail = await api.sessionDetail(sessionId);
  const root = el("section", { class: "session-view", "data-session": detail.id },
    el("h2", {}, `Session ${detail.started_at}`),
    el("p", { class: "session-meta" },
      `${detail.entries.length} attempts, ${Math.round(detail.total_practice_seconds)}s practiced, mode ${detail.mode}`),
  );
  for (const entry of detail.entries) {
    root.append(await attemptRow(api, entry));
  }
  if (!detail.entries.length) {
    root.append(el("p", { class: "empty-state" }, "No attempts in this session."));
  }
  return root;
}
