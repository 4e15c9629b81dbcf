// Toggleable label chips shared by the annotate view and the custom
// adjudication editor. Descriptions surface as hover titles.

import type { SchemaLabel } from "./types.js";

export function renderChips(
  labels: SchemaLabel[],
  selected: Set<string>,
  onToggle: (code: string) => void,
): HTMLElement {
  const row = document.createElement("div");
  row.className = "chips";
  for (const label of labels) {
    const chip = document.createElement("button");
    chip.type = "button";
    chip.className = "chip";
    chip.dataset.code = label.code;
    chip.title = label.description;
    chip.textContent = label.code;
    if (selected.has(label.code)) chip.classList.add("on");
    chip.addEventListener("click", () => {
      onToggle(label.code);
      chip.classList.toggle("on");
    });
    row.appendChild(chip);
  }
  return row;
}

export function staticChips(codes: string[], highlighted: Set<string>): HTMLElement {
  const row = document.createElement("div");
  row.className = "chips readonly";
  for (const code of [...codes].sort()) {
    const chip = document.createElement("span");
    chip.className = "chip static";
    chip.dataset.code = code;
    chip.textContent = code;
    if (highlighted.has(code)) chip.classList.add("delta");
    row.appendChild(chip);
  }
  return row;
}
