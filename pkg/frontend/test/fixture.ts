/**
 * In-memory fixture server implementing the console's slice of the API.
 * Records every program edit it accepts so tests can assert on exact wire
 * traffic, and can simulate the patient fetching their inbox.
 */

import type { FetchFn } from "../src/api.js";
import type {
  Message,
  PatientDetail,
  PatientSummary,
  Program,
  ProgramEdit,
  SessionDetail,
  SessionEntry,
  SessionSummary,
  SpectrogramMatrix,
} from "../src/types.js";

export const THERAPIST = "ther_fixture";
export const FOREIGN_THERAPIST = "ther_foreign";
export const PATIENT = "pat_fixture";
export const PROGRAM = "prog_fixture";

const WAV_STUB = new Uint8Array([0x52, 0x49, 0x46, 0x46, 1, 2, 3, 4, 5, 6, 7, 8]);

function graphPair(shift: number) {
  const reference = Array.from({ length: 100 }, (_, i) => 200 + 20 * Math.sin(i / 9));
  return { patient: reference.map((v) => v + shift), reference };
}

function entry(i: number, decision: SessionEntry["decision"], closeness: number, worst: string[]): SessionEntry {
  return {
    item_id: `item_${i}`,
    item_text: ["one", "two", "three"][i] ?? `word ${i}`,
    utterance_id: `utt_${i}`,
    closeness,
    decision,
    at: `2026-03-0${i + 1}T10:0${i}:00+00:00`,
    audio_url: i === 2 ? null : `/audio/utt_audio_${i}`,
    features_url: `/utterances/utt_${i}/features`,
    spectrogram_url: `/utterances/utt_${i}/spectrogram`,
    report: {
      deviations: worst.map((name, rank) => ({
        feature: name,
        patient_value: 1,
        reference_value: 1,
        distance: 0.5 - 0.1 * rank,
        deviation: 0.5 - 0.1 * rank,
        weight: 0.2,
        available: true,
        detail: null,
      })),
      closeness,
      pass: decision === "advance",
      threshold: 0.6,
      profile: "default",
    },
    feedback: {
      verdict: decision === "advance" ? "pass" : "repeat",
      worst_features: worst,
      graph_payload: { pitch_hz: graphPair(decision === "advance" ? 0 : 30), energy_db: graphPair(0) },
      reference_audio_ref: "aud_ref",
    },
  };
}

export class FixtureServer {
  receivedEdits: ProgramEdit[] = [];
  audioUploads = 0;
  failNextEdit = false;

  program: Program = {
    id: PROGRAM,
    patient_id: PATIENT,
    items: ["one", "two", "three", "four"].map((text, i) => ({
      id: `item_${i}`,
      text,
      category: "number",
      target_sounds: [],
      disorder_tags: ["cleft_palate"],
      reference_audio_id: `aud_ref_${i}`,
      prompt_image_id: null,
      pass_threshold_override: null,
    })),
    pass_threshold: 0.6,
    max_repeats: 3,
    created_by: THERAPIST,
    language: "en",
    version: 1,
    audit: [],
  };

  messages: Message[] = [];
  private messageSeq = 0;

  sessionDetailDoc: SessionDetail = {
    id: "ses_fixture",
    patient_id: PATIENT,
    mode: "offline_auto",
    started_at: "2026-03-01T10:00:00+00:00",
    ended_at: "2026-03-01T10:12:00+00:00",
    total_practice_seconds: 720,
    entries: [
      entry(0, "advance", 1.0, []),
      entry(1, "repeat", 0.41, ["duration", "pitch", "jitter"]),
      entry(2, "advance_flagged", 0.33, ["pitch", "mean_f1"]),
    ],
  };

  private audio = new Map<string, Uint8Array>([
    ["utt_audio_0", WAV_STUB],
    ["utt_audio_1", WAV_STUB],
  ]);

  spectrogram: SpectrogramMatrix = {
    db: [
      [-80, -40, -10, -40],
      [-70, -20, 0, -30],
      [-80, -60, -50, -70],
    ],
    frequencies_hz: [0, 31.25, 62.5],
    frame_times_s: [0, 0.01, 0.02, 0.03],
    n_fft: 512,
  };

  summary(): PatientSummary {
    return {
      id: PATIENT,
      name: "Asha",
      age: 6,
      disorder: "cleft_palate",
      progress: 0.5,
      status: "active",
      flagged_items: ["item_2"],
      program_id: PROGRAM,
      last_session_at: "2026-03-01T10:00:00+00:00",
      total_practice_seconds: 720,
    };
  }

  detail(): PatientDetail {
    return {
      id: PATIENT,
      name: "Asha",
      age: 6,
      gender: "female",
      medical_history: "cleft palate repair",
      disorder: "cleft_palate",
      surgery: { nature: "palatoplasty", date: "2025-04-18" },
      therapist_id: THERAPIST,
      registered_at: "2026-02-01T09:00:00+00:00",
      program_id: PROGRAM,
      progress: 0.5,
      program_version: this.program.version,
      program_status: "active",
      flagged_items: ["item_2"],
    };
  }

  sessionSummaries(): SessionSummary[] {
    return [
      {
        id: this.sessionDetailDoc.id,
        patient_id: PATIENT,
        mode: "offline_auto",
        started_at: this.sessionDetailDoc.started_at,
        ended_at: this.sessionDetailDoc.ended_at,
        n_entries: this.sessionDetailDoc.entries.length,
        total_practice_seconds: this.sessionDetailDoc.total_practice_seconds,
      },
    ];
  }

  /** The patient pulling their inbox marks therapist messages delivered. */
  simulatePatientFetch(): void {
    for (const message of this.messages) {
      if (message.from === "therapist" && !message.delivered) {
        message.delivered = true;
        message.delivered_at = "2026-03-02T08:00:00+00:00";
      }
    }
  }

  private applyEdit(edit: ProgramEdit): { status: number; body: unknown } {
    if (this.failNextEdit) {
      this.failNextEdit = false;
      return { status: 422, body: { code: "invalid_edit", detail: "conflicting edit" } };
    }
    if (edit.op === "reorder") {
      const byId = new Map(this.program.items.map((it) => [it.id, it]));
      const wanted = edit.item_ids.map((id) => byId.get(id));
      if (wanted.some((it) => !it) || wanted.length !== this.program.items.length) {
        return { status: 422, body: { code: "invalid_edit", detail: "bad permutation" } };
      }
      this.program.items = wanted as Program["items"];
    } else if (edit.op === "remove") {
      this.program.items = this.program.items.filter((it) => it.id !== edit.item_id);
    } else if (edit.op === "set_threshold") {
      this.program.pass_threshold = edit.value;
    } else if (edit.op === "set_max_repeats") {
      this.program.max_repeats = edit.value;
    } else {
      return { status: 422, body: { code: "invalid_edit", detail: "unknown op" } };
    }
    this.program.version += 1;
    this.receivedEdits.push(edit);
    return { status: 200, body: { program: this.program, state: {} } };
  }

  fetch: FetchFn = async (url, init = {}) => {
    const method = (init.method ?? "GET").toUpperCase();
    const path = url.replace(/^https?:\/\/[^/]+/, "").split("?")[0]!;
    const auth = (init.headers as Record<string, string> | undefined)?.["Authorization"] ?? "";
    const actor = auth.replace(/^Bearer\s+/i, "");

    const json = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), { status, headers: { "Content-Type": "application/json" } });
    const forbidden = () => json({ code: "forbidden", detail: "not your patient" }, 403);

    if (!actor) return json({ code: "not_authenticated", detail: "missing bearer" }, 401);
    const foreign = actor !== THERAPIST;

    if (method === "GET" && path === `/therapists/${actor}/patients`) {
      return json(foreign ? [] : [this.summary()]);
    }
    if (path === `/patients/${PATIENT}` && method === "GET") {
      return foreign ? forbidden() : json(this.detail());
    }
    if (path === `/patients/${PATIENT}/sessions` && method === "GET") {
      return foreign ? forbidden() : json(this.sessionSummaries());
    }
    if (path === `/sessions/${this.sessionDetailDoc.id}` && method === "GET") {
      return foreign ? forbidden() : json(this.sessionDetailDoc);
    }
    if (path === `/programs/${PROGRAM}`) {
      if (foreign) return forbidden();
      if (method === "GET") {
        return json({ program: this.program, state: { program_id: PROGRAM, cursor: 2, attempts_on_current: 0, status: "active" } });
      }
      if (method === "PUT") {
        const edit = JSON.parse(init.body as string) as ProgramEdit;
        const { status, body } = this.applyEdit(edit);
        return json(body, status);
      }
    }
    if (path === `/patients/${PATIENT}/messages`) {
      if (foreign) return forbidden();
      if (method === "GET") return json(this.messages);
      if (method === "POST") {
        const payload = JSON.parse(init.body as string) as { kind: "text" | "voice"; text?: string; audio_id?: string };
        const message: Message = {
          id: `msg_${this.messageSeq++}`,
          from: "therapist",
          patient_id: PATIENT,
          kind: payload.kind,
          text: payload.text ?? null,
          payload_ref: payload.audio_id ?? null,
          created_at: "2026-03-02T07:00:00+00:00",
          delivered: false,
          delivered_at: null,
        };
        this.messages.push(message);
        return json(message, 201);
      }
    }
    if (path === "/audio" && method === "POST") {
      this.audioUploads += 1;
      const id = `aud_upload_${this.audioUploads}`;
      const file = (init.body as FormData).get("file");
      // jsdom's File lacks arrayBuffer(); bytes only matter for playback stubs
      let bytes = WAV_STUB;
      if (file instanceof Blob && typeof file.arrayBuffer === "function") {
        bytes = new Uint8Array(await file.arrayBuffer());
      }
      this.audio.set(id, bytes);
      return json({ audio_id: id }, 201);
    }
    if (path.startsWith("/audio/") && method === "GET") {
      const id = path.slice("/audio/".length);
      const bytes = this.audio.get(id);
      if (!bytes) return json({ code: "not_found", detail: id }, 404);
      return new Response(bytes.slice().buffer, { status: 200, headers: { "Content-Type": "audio/wav" } });
    }
    const spectro = path.match(/^\/utterances\/([^/]+)\/spectrogram$/);
    if (spectro && method === "GET") {
      return foreign ? forbidden() : json(this.spectrogram);
    }
    return json({ code: "not_found", detail: `${method} ${path}` }, 404);
  };
}
