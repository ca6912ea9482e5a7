/** Wire types mirrored from the server's JSON API (docs/openapi.json). */

export interface PatientSummary {
  id: string;
  name: string;
  age: number;
  disorder: string;
  progress: number;
  status: "active" | "completed";
  flagged_items: string[];
  program_id: string;
  last_session_at: string | null;
  total_practice_seconds: number;
}

export interface PatientDetail {
  id: string;
  name: string;
  age: number;
  gender: string;
  medical_history: string;
  disorder: string;
  surgery: { nature: string; date: string } | null;
  therapist_id: string;
  registered_at: string;
  program_id: string;
  progress: number;
  program_version: number;
  program_status: string;
  flagged_items: string[];
}

export interface WordItem {
  id: string;
  text: string;
  category: string;
  target_sounds: string[];
  disorder_tags: string[];
  reference_audio_id: string;
  prompt_image_id: string | null;
  pass_threshold_override: number | null;
}

export interface Program {
  id: string;
  patient_id: string;
  items: WordItem[];
  pass_threshold: number;
  max_repeats: number;
  created_by: string;
  language: string;
  version: number;
  audit: unknown[];
}

export interface ProgramEnvelope {
  program: Program;
  state: {
    program_id: string;
    cursor: number;
    attempts_on_current: number;
    status: string;
  };
}

export type ProgramEdit =
  | { op: "reorder"; item_ids: string[] }
  | { op: "insert"; item: Partial<WordItem>; position?: number }
  | { op: "remove"; item_id: string }
  | { op: "set_threshold"; value: number }
  | { op: "set_max_repeats"; value: number };

export interface SessionSummary {
  id: string;
  patient_id: string;
  mode: string;
  started_at: string;
  ended_at: string | null;
  n_entries: number;
  total_practice_seconds: number;
}

export interface FeatureDeviation {
  feature: string;
  patient_value: number | null;
  reference_value: number | null;
  distance: number | null;
  deviation: number;
  weight: number;
  available: boolean;
  detail: { patient: number[]; reference: number[] } | null;
}

export interface Report {
  deviations: FeatureDeviation[];
  closeness: number;
  pass: boolean;
  threshold: number;
  profile: string;
}

export interface GraphPair {
  patient: number[];
  reference: number[];
}

export interface Feedback {
  verdict: "pass" | "repeat";
  worst_features: string[];
  graph_payload: { pitch_hz?: GraphPair; energy_db?: GraphPair };
  reference_audio_ref: string | null;
}

export interface SessionEntry {
  item_id: string;
  item_text: string | null;
  utterance_id: string;
  closeness: number;
  decision: "advance" | "repeat" | "advance_flagged";
  at: string;
  audio_url: string | null;
  features_url: string;
  spectrogram_url: string;
  report: Report | null;
  feedback: Feedback | null;
}

export interface SessionDetail {
  id: string;
  patient_id: string;
  mode: string;
  started_at: string;
  ended_at: string | null;
  total_practice_seconds: number;
  entries: SessionEntry[];
}

export interface Message {
  id: string;
  from: "therapist" | "patient";
  patient_id: string;
  kind: "text" | "voice";
  text: string | null;
  payload_ref: string | null;
  created_at: string;
  delivered: boolean;
  delivered_at: string | null;
}

export interface SpectrogramMatrix {
  db: number[][];
  frequencies_hz: number[];
  frame_times_s: number[];
  n_fft: number;
}
