/** Patient roster: progress, flags, practice time, most recent first. */

import type { Api } from "../api.js";
import { el, fmtMinutes, fmtPercent } from "../dom.js";
import type { PatientSummary } from "../types.js";

export interface RosterHandlers {
  onOpenPatient: (patient: PatientSummary) => void;
}

function rosterRow(patient: PatientSummary, handlers: RosterHandlers): HTMLTableRowElement {
  const bar = el("div", { class: "progress-track" },
    el("div", {
      class: "progress-fill",
      style: `width:${fmtPercent(patient.progress)}`,
      "data-progress": String(patient.progress),
    }),
  );
  const flags = patient.flagged_items.length
    ? el("span", { class: "flag-badge", title: `${patient.flagged_items.length} item(s) need review` },
        `⚑ ${patient.flagged_items.length}`)
    : null;
  return el("tr", { class: "roster-row", "data-patient": patient.id },
    el("td", {},
      el("a", { href: `#/patients/${patient.id}`, onclick: (ev) => { ev.preventDefault(); handlers.onOpenPatient(patient); } },
        patient.name),
      " ", flags),
    el("td", {}, patient.disorder),
    el("td", { class: "progress-cell" }, bar, ` ${fmtPercent(patient.progress)}`),
    el("td", {}, patient.status),
    el("td", {}, fmtMinutes(patient.total_practice_seconds)),
    el("td", {}, patient.last_session_at ?? "never"),
  );
}

export async function renderRoster(api: Api, handlers: RosterHandlers): Promise<HTMLElement> {
  const root = el("section", { class: "roster-view" }, el("h2", {}, "Patients"));
  let patients: PatientSummary[];
  try {
    patients = await api.roster();
  } catch (error) {
    const banner = el("div", { class: "error-banner" },
      `Could not load the roster: ${(error as Error).message} `,
      el("button", {
        class: "retry",
        onclick: async () => { root.replaceWith(await renderRoster(api, handlers)); },
      }, "Retry"),
    );
    root.append(banner);
    return root;
  }
  if (patients.length === 0) {
    root.append(el("p", { class: "empty-state" }, "No patients registered to you yet."));
    return root;
  }
  root.append(
    el("table", { class: "roster-table" },
      el("thead", {},
        el("tr", {},
          el("th", {}, "Name"), el("th", {}, "Disorder"), el("th", {}, "Progress"),
          el("th", {}, "Status"), el("th", {}, "Practiced"), el("th", {}, "Last session"))),
      el("tbody", {}, ...patients.map((p) => rosterRow(p, handlers))),
    ),
  );
  return root;
}
