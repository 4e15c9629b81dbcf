import { describe, expect, it } from "vitest";

import { renderAgreementView, renderGateIndicator } from "../src/agreement.js";
import { LABELS } from "./helpers.js";
import type { AgreementResponse, CoderStatus } from "../src/types.js";

describe("agreement view", () => {
  it("renders kappa values verbatim from the payload", () => {
    const kappa: Record<string, number> = { AVG: 0.5482456140350878 };
    for (const [i, code] of LABELS.entries()) {
      kappa[code] = i === 0 ? 1 : 0.1234567890123 + i * 0.017;
    }
    const payload: AgreementResponse = { batch: "b1", n: 42, kappa };
    const el = renderAgreementView(payload, LABELS);
    const cells = [...el.querySelectorAll("td.value")].map((c) => c.textContent);
    expect(cells[0]).toBe(String(kappa.AVG));
    for (const [i, code] of LABELS.entries()) {
      expect(cells[i + 1]).toBe(String(kappa[code]));
    }
  });

  it("shows a placeholder when there is no data", () => {
    const el = renderAgreementView({ batch: "b1", n: 0, kappa: null }, LABELS);
    expect(el.querySelector(".placeholder")?.textContent).toBe("no data");
  });

  it("gate indicator is red below 0.6 and green at or above", () => {
    const below: CoderStatus = {
      coder_id: "c1", training_done: true, annotated: 10, required: 10,
      per_label: {}, average: 0.55, passed: false,
    };
    const at: CoderStatus = { ...below, average: 0.6, passed: true };
    expect(renderGateIndicator(below).className).toContain("failed");
    expect(renderGateIndicator(below).textContent).toContain("0.55");
    expect(renderGateIndicator(at).className).toContain("passed");
  });

  it("shows progress while training is incomplete", () => {
    const status: CoderStatus = {
      coder_id: "c1", training_done: false, annotated: 3, required: 10,
      per_label: null, average: null, passed: false,
    };
    expect(renderGateIndicator(status).textContent).toBe("training: 3 / 10");
  });
});
