/**
 * Typed client over the console's slice of the JSON API.
 * The fetch implementation is injectable so tests can run against a fixture
 * server without any network.
 */

import type {
  Message,
  PatientDetail,
  PatientSummary,
  Program,
  ProgramEdit,
  ProgramEnvelope,
  SessionDetail,
  SessionSummary,
  SpectrogramMatrix,
} from "./types.js";

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(`${status} ${code}: ${detail}`);
  }
}

export class Api {
  constructor(
    private readonly baseUrl: string,
    private therapistId: string,
    private readonly fetchFn: FetchFn = (url, init) => fetch(url, init),
  ) {}

  get therapist(): string {
    return this.therapistId;
  }

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    const headers: Record<string, string> = {
      Authorization: `Bearer ${this.therapistId}`,
      ...(init.body && !(init.body instanceof FormData) ? { "Content-Type": "application/json" } : {}),
    };
    const response = await this.fetchFn(this.baseUrl + path, { ...init, headers });
    if (!response.ok) {
      let code = "error";
      let detail = response.statusText;
      try {
        const body = await response.json();
        code = body.code ?? code;
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
      } catch {
        // non-JSON error body
      }
      throw new ApiError(response.status, code, detail);
    }
    return response;
  }

  private async json<T>(path: string, init: RequestInit = {}): Promise<T> {
    return (await this.request(path, init)).json() as Promise<T>;
  }

  roster(): Promise<PatientSummary[]> {
    return this.json(`/therapists/${this.therapistId}/patients`);
  }

  patient(patientId: string): Promise<PatientDetail> {
    return this.json(`/patients/${patientId}`);
  }

  sessions(patientId: string): Promise<SessionSummary[]> {
    return this.json(`/patients/${patientId}/sessions`);
  }

  sessionDetail(sessionId: string): Promise<SessionDetail> {
    return this.json(`/sessions/${sessionId}`);
  }

  program(programId: string): Promise<ProgramEnvelope> {
    return this.json(`/programs/${programId}`);
  }

  editProgram(programId: string, edit: ProgramEdit): Promise<{ program: Program }> {
    return this.json(`/programs/${programId}`, { method: "PUT", body: JSON.stringify(edit) });
  }

  messages(patientId: string): Promise<Message[]> {
    return this.json(`/patients/${patientId}/messages`);
  }

  sendText(patientId: string, text: string): Promise<Message> {
    return this.json(`/patients/${patientId}/messages`, {
      method: "POST",
      body: JSON.stringify({ kind: "text", text }),
    });
  }

  async sendVoice(patientId: string, wav: Blob, filename: string): Promise<Message> {
    const form = new FormData();
    form.append("file", wav, filename);
    const upload = await this.json<{ audio_id: string }>("/audio", { method: "POST", body: form });
    return this.json(`/patients/${patientId}/messages`, {
      method: "POST",
      body: JSON.stringify({ kind: "voice", audio_id: upload.audio_id }),
    });
  }

  spectrogram(utteranceId: string): Promise<SpectrogramMatrix> {
    return this.json(`/utterances/${utteranceId}/spectrogram`);
  }

  /** Audio needs the bearer header, so it cannot be a bare <audio src>. */
  async audioBlob(path: string): Promise<Blob> {
    return (await this.request(path)).blob();
  }
}

/** Blob -> something an <audio> element can play (object URL when available). */
export async function playableUrl(blob: Blob): Promise<string> {
  if (typeof URL.createObjectURL === "function") {
    try {
      return URL.createObjectURL(blob);
    } catch {
      // fall through to the data URL path (test DOMs)
    }
  }
  const bytes = new Uint8Array(await blob.arrayBuffer());
  let binary = "";
  for (const b of bytes) binary += String.fromCharCode(b);
  return `data:audio/wav;base64,${btoa(binary)}`;
}
