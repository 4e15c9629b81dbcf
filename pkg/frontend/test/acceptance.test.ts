// Scripted end-to-end session over the documented endpoints: two coders
// disagree on a sentence, the adjudication view highlights the exact
// set difference, an adopt click produces the documented POST body, and
// the agreement view shows the /agreement payload verbatim.

import { describe, expect, it } from "vitest";

import { AnnotationApi } from "../src/api.js";
import { renderAdjudicateView } from "../src/adjudicate.js";
import { renderAgreementView } from "../src/agreement.js";
import { SessionState } from "../src/state.js";
import { FakeService, LABELS, SCHEMA } from "./helpers.js";

describe("acceptance: UI round-trip", () => {
  it("disagreement -> highlighted diff -> adopt body -> verbatim agreement", async () => {
    const fake = new FakeService([
      { sentence_id: "p9:0", text: "The infusion went fine." },
      { sentence_id: "p9:1", text: "Thanks everyone." },
    ]);
    const api = new AnnotationApi("", fake.fetch);

    // two coders submit, disagreeing on the first sentence
    const alice = new SessionState("alice");
    alice.toggle("p9:0", "TREA");
    expect((await alice.submit(api, "p9:0")).kind).toBe("submitted");
    alice.toggle("p9:1", "MISC");
    await alice.submit(api, "p9:1");

    const brett = new SessionState("brett");
    brett.toggle("p9:0", "TREA");
    brett.toggle("p9:0", "HSYS");
    expect((await brett.submit(api, "p9:0")).kind).toBe("submitted");
    brett.toggle("p9:1", "MISC");
    await brett.submit(api, "p9:1");

    // adjudication view: the disagreeing sentence comes first with the
    // correct set-difference highlight
    const view = renderAdjudicateView(api, SCHEMA, "casey");
    await view.refresh();
    document.body.replaceChildren(view.root);
    const entries = view.root.querySelectorAll(".entry");
    expect(entries).toHaveLength(2);
    expect(entries[0].className).toContain("disagree");
    expect(entries[0].querySelector("p")!.textContent).toBe("The infusion went fine.");
    const sides = entries[0].querySelectorAll(".side");
    expect([...sides[0].querySelectorAll(".chip.delta")]).toHaveLength(0);
    const deltaB = [...sides[1].querySelectorAll(".chip.delta")].map((c) => c.textContent);
    expect(deltaB).toEqual(["HSYS"]);

    // adopt-A produces exactly the documented POST body
    (entries[0].querySelector(".adopt-a") as HTMLButtonElement).click();
    await new Promise((r) => setTimeout(r, 0));
    const adoptReq = fake.requests.at(-1)!;
    expect(adoptReq.method).toBe("POST");
    expect(adoptReq.url).toBe("/adjudication");
    expect(adoptReq.body).toEqual({
      sentence: "p9:0",
      labels: ["TREA"],
      adjudicator: "casey",
    });
    expect(fake.adjudications.get("p9:0")).toEqual(["TREA"]);

    // agreement view renders the payload values verbatim, no recomputation
    const kappa: Record<string, number> = { AVG: 0.7272727272727273 };
    for (const [i, code] of LABELS.entries()) kappa[code] = 0.05 + i * 0.0891;
    fake.agreementPayload = { batch: "batch-0001", n: 2, kappa };
    const payload = await api.agreement("batch-0001");
    const el = renderAgreementView(payload, LABELS);
    const values = [...el.querySelectorAll("td.value")].map((c) => c.textContent);
    expect(values[0]).toBe(String(kappa.AVG));
    LABELS.forEach((code, i) => expect(values[i + 1]).toBe(String(kappa[code])));
  });
});
