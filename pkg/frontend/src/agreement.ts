// Agreement screen. Every number shown comes verbatim from the
// /agreement (or /coders/{id}/status) payload; the client renders,
// never recomputes.

import type { AgreementResponse, CoderStatus } from "./types.js";

export const GATE = 0.6;

function kappaTable(kappa: Record<string, number>, order: string[]): HTMLTableElement {
  const table = document.createElement("table");
  table.className = "kappa";
  const head = table.insertRow();
  head.insertCell().textContent = "Label";
  head.insertCell().textContent = "Kappa";
  for (const code of order) {
    if (!(code in kappa)) continue;
    const row = table.insertRow();
    row.insertCell().textContent = code;
    const cell = row.insertCell();
    cell.className = "value";
    cell.textContent = String(kappa[code]);
  }
  return table;
}

export function renderAgreementView(
  payload: AgreementResponse | null,
  order: string[],
): HTMLElement {
  const root = document.createElement("div");
  root.className = "agreement";
  if (!payload || payload.n === 0 || !payload.kappa) {
    const empty = document.createElement("p");
    empty.className = "placeholder";
    empty.textContent = "no data";
    root.appendChild(empty);
    return root;
  }
  const caption = document.createElement("p");
  caption.textContent = `batch ${payload.batch}, ${payload.n} doubly-annotated sentences`;
  root.appendChild(caption);
  root.appendChild(kappaTable(payload.kappa, ["AVG", ...order]));
  return root;
}

export function renderGateIndicator(status: CoderStatus): HTMLElement {
  const root = document.createElement("div");
  root.className = "gate";
  if (!status.training_done || status.average === null) {
    root.classList.add("pending");
    root.textContent = `training: ${status.annotated} / ${status.required}`;
    return root;
  }
  const passed = status.passed;
  root.classList.add(passed ? "passed" : "failed");
  root.textContent = `${passed ? "gate passed" : "below gate"} - average kappa ${String(
    status.average,
  )} (gate ${GATE})`;
  return root;
}
