/** Program editor: reorder/remove items, thresholds, optimistic saves. */

import { ApiError, type Api } from "../api.js";
import { clear, el } from "../dom.js";
import { optimistic } from "../optimistic.js";
import type { Program, WordItem } from "../types.js";

export async function renderProgramEditor(api: Api, programId: string): Promise<HTMLElement> {
  const root = el("section", { class: "program-editor", "data-program": programId });
  let program: Program;
  try {
    program = (await api.program(programId)).program;
  } catch (error) {
    if (error instanceof ApiError && error.status === 403) {
      root.append(el("div", { class: "readonly-banner" }, "Read-only: this is not your patient."));
      return root;
    }
    throw error;
  }

  let workingOrder: WordItem[] = [...program.items];
  let dirty = false;
  const status = el("div", { class: "editor-status", "data-version": String(program.version) },
    `version ${program.version}`);
  const list = el("ol", { class: "program-items" });
  const saveButton = el("button", { class: "save-order", disabled: true }, "Save order");

  const refresh = async () => {
    const envelope = await api.program(programId);
    program = envelope.program;
    workingOrder = [...program.items];
    dirty = false;
    status.dataset.version = String(program.version);
    status.textContent = `version ${program.version}`;
    status.classList.remove("conflict");
    paint();
  };

  const conflict = (error: unknown) => {
    const message = error instanceof ApiError ? error.message : String(error);
    void refresh().then(() => {
      status.textContent = `edit rejected (${message}); reloaded version ${program.version}, please re-apply`;
      status.classList.add("conflict");
    });
  };

  const move = (index: number, delta: number) => {
    const target = index + delta;
    if (target < 0 || target >= workingOrder.length) return;
    const [item] = workingOrder.splice(index, 1);
    workingOrder.splice(target, 0, item!);
    dirty = true;
    paint();
  };

  const paint = () => {
    clear(list);
    workingOrder.forEach((item, index) => {
      list.append(
        el("li", { class: "program-item", "data-item": item.id },
          el("span", { class: "item-text" }, `${item.text} `),
          el("small", {}, item.category),
          el("button", { class: "move-up", onclick: () => move(index, -1) }, "↑"),
          el("button", { class: "move-down", onclick: () => move(index, 1) }, "↓"),
          el("button", {
            class: "remove-item",
            onclick: () => {
              void optimistic({
                apply: () => {
                  const snapshot = [...workingOrder];
                  workingOrder = workingOrder.filter((it) => it.id !== item.id);
                  paint();
                  return snapshot;
                },
                remote: async () => {
                  const updated = await api.editProgram(programId, { op: "remove", item_id: item.id });
                  program = updated.program;
                  status.dataset.version = String(program.version);
                  status.textContent = `version ${program.version}`;
                },
                revert: (snapshot) => {
                  workingOrder = snapshot;
                  paint();
                },
                onError: conflict,
              });
            },
          }, "remove"),
        ),
      );
    });
    (saveButton as HTMLButtonElement).disabled = !dirty;
  };

  saveButton.addEventListener("click", () => {
    if (!dirty) return;
    // the whole drag session collapses into exactly one versioned edit
    void optimistic({
      apply: () => {
        dirty = false;
        (saveButton as HTMLButtonElement).disabled = true;
        return null;
      },
      remote: async () => {
        const updated = await api.editProgram(programId, {
          op: "reorder",
          item_ids: workingOrder.map((it) => it.id),
        });
        program = updated.program;
        status.dataset.version = String(program.version);
        status.textContent = `version ${program.version}`;
      },
      revert: () => {
        dirty = true;
        (saveButton as HTMLButtonElement).disabled = false;
      },
      onError: conflict,
    });
  });

  const threshold = el("input", {
    class: "threshold-input", type: "number", min: "0", max: "1", step: "0.05",
    value: String(program.pass_threshold),
  }) as HTMLInputElement;
  threshold.addEventListener("change", () => {
    void api
      .editProgram(programId, { op: "set_threshold", value: Number(threshold.value) })
      .then((updated) => {
        program = updated.program;
        status.dataset.version = String(program.version);
        status.textContent = `version ${program.version}`;
      })
      .catch(conflict);
  });

  const maxRepeats = el("input", {
    class: "max-repeats-input", type: "number", min: "1", max: "10", step: "1",
    value: String(program.max_repeats),
  }) as HTMLInputElement;
  maxRepeats.addEventListener("change", () => {
    void api
      .editProgram(programId, { op: "set_max_repeats", value: Number(maxRepeats.value) })
      .then((updated) => {
        program = updated.program;
        status.dataset.version = String(program.version);
        status.textContent = `version ${program.version}`;
      })
      .catch(conflict);
  });

  paint();
  root.append(
    el("h2", {}, "Therapy program"),
    status,
    list,
    saveButton,
    el("label", {}, "Pass threshold ", threshold),
    el("label", {}, "Max repeats ", maxRepeats),
  );
  return root;
}
