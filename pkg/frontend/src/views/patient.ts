/** Patient detail: personal info, surgery, session list, closeness trend. */

import type { Api } from "../api.js";
import { contourOverlay } from "../charts.js";
import { el, fmtMinutes, fmtPercent } from "../dom.js";
import type { SessionSummary } from "../types.js";

export interface PatientHandlers {
  onOpenSession: (sessionId: string) => void;
}

function sessionRow(session: SessionSummary, handlers: PatientHandlers): HTMLTableRowElement {
  return el("tr", { class: "session-row", "data-session": session.id },
    el("td", {},
      el("a", {
        href: `#/sessions/${session.id}`,
        onclick: (ev) => { ev.preventDefault(); handlers.onOpenSession(session.id); },
      }, session.started_at)),
    el("td", {}, session.ended_at ?? "active"),
    el("td", {}, String(session.n_entries)),
    el("td", {}, fmtMinutes(session.total_practice_seconds)),
  );
}

export async function renderPatient(api: Api, patientId: string, handlers: PatientHandlers): Promise<HTMLElement> {
  const [patient, sessions] = await Promise.all([api.patient(patientId), api.sessions(patientId)]);
  const root = el("section", { class: "patient-view", "data-patient": patient.id },
    el("h2", {}, patient.name),
    el("dl", { class: "patient-facts" },
      el("dt", {}, "Age"), el("dd", {}, String(patient.age)),
      el("dt", {}, "Gender"), el("dd", {}, patient.gender),
      el("dt", {}, "Disorder"), el("dd", {}, patient.disorder),
      el("dt", {}, "History"), el("dd", {}, patient.medical_history || "none recorded"),
      el("dt", {}, "Surgery"),
      el("dd", {}, patient.surgery ? `${patient.surgery.nature} (${patient.surgery.date})` : "none"),
      el("dt", {}, "Progress"),
      el("dd", {}, `${fmtPercent(patient.progress)} (${patient.program_status})`),
      el("dt", {}, "Flagged items"),
      el("dd", { class: "flagged-count" }, String(patient.flagged_items.length)),
    ),
  );

  // closeness trend across recent attempts, fetched from session details
  const closenesses: number[] = [];
  for (const session of sessions.slice(-5)) {
    const detail = await api.sessionDetail(session.id);
    closenesses.push(...detail.entries.map((entry) => entry.closeness));
  }
  if (closenesses.length >= 2) {
    root.append(
      el("h3", {}, "Closeness trend"),
      contourOverlay({ patient: closenesses, reference: closenesses.map(() => 0.6) }, "closeness trend"),
    );
  }

  root.append(el("h3", {}, "Sessions"));
  if (sessions.length) {
    root.append(
      el("table", { class: "sessions-table" },
        el("thead", {}, el("tr", {},
          el("th", {}, "Started"), el("th", {}, "Ended"),
          el("th", {}, "Attempts"), el("th", {}, "Practiced"))),
        el("tbody", {}, ...[...sessions].reverse().map((s) => sessionRow(s, handlers))),
      ),
    );
  } else {
    root.append(el("p", { class: "empty-state" }, "No sessions yet."));
  }
  return root;
}
