/** Console bootstrap: login with a bearer id, hash routing, 5 s polling. */

import { Api } from "./api.js";
import { clear, el } from "./dom.js";
import { renderMessages } from "./views/messages.js";
import { renderPatient } from "./views/patient.js";
import { renderProgramEditor } from "./views/programEditor.js";
import { renderRoster } from "./views/roster.js";
import { renderSession } from "./views/session.js";

const POLL_MS = 5000;

function loginForm(onLogin: (therapistId: string) => void): HTMLElement {
  const input = el("input", { type: "text", placeholder: "therapist id (ther_...)" }) as HTMLInputElement;
  return el("form", {
    class: "login-form",
    onsubmit: (ev) => {
      ev.preventDefault();
      if (input.value.trim()) onLogin(input.value.trim());
    },
  }, el("h1", {}, "telespeech console"), input, el("button", { type: "submit" }, "Open console"));
}

export function startConsole(root: HTMLElement, baseUrl = ""): void {
  const stored = localStorage.getItem("telespeech.therapist");
  if (!stored) {
    root.append(loginForm((id) => {
      localStorage.setItem("telespeech.therapist", id);
      clear(root);
      startConsole(root, baseUrl);
    }));
    return;
  }
  const api = new Api(baseUrl, stored);
  let pollTimer: number | undefined;

  const show = async (view: Promise<HTMLElement>) => {
    const content = await view;
    clear(root);
    root.append(nav(), content);
  };

  const nav = () =>
    el("nav", { class: "top-nav" },
      el("a", { href: "#/", onclick: (ev) => { ev.preventDefault(); void route("#/"); } }, "Roster"),
      el("button", {
        class: "logout",
        onclick: () => {
          localStorage.removeItem("telespeech.therapist");
          clear(root);
          startConsole(root, baseUrl);
        },
      }, `Sign out (${stored})`),
    );

  const route = async (hash: string) => {
    const parts = hash.replace(/^#\//, "").split("/").filter(Boolean);
    window.clearInterval(pollTimer);
    if (parts[0] === "patients" && parts[1]) {
      const patientId = parts[1];
      const detail = await renderPatient(api, patientId, {
        onOpenSession: (sid) => void route(`#/sessions/${sid}`),
      });
      const editor = await renderProgramEditor(api, (await api.patient(patientId)).program_id);
      const messages = await renderMessages(api, patientId);
      await show(Promise.resolve(el("div", { class: "patient-page" }, detail, editor, messages)));
      // poll for freshly delivered messages and new sessions
      pollTimer = window.setInterval(() => {
        const refresh = root.querySelector<HTMLButtonElement>(".refresh-thread");
        refresh?.click();
      }, POLL_MS);
    } else if (parts[0] === "sessions" && parts[1]) {
      await show(renderSession(api, parts[1]));
    } else {
      await show(renderRoster(api, { onOpenPatient: (p) => void route(`#/patients/${p.id}`) }));
    }
    window.location.hash = hash;
  };

  window.addEventListener("hashchange", () => void route(window.location.hash || "#/"));
  void route(window.location.hash || "#/");
}

if (typeof document !== "undefined" && document.getElementById("console-root")) {
  startConsole(document.getElementById("console-root")!);
}
