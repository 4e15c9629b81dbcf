import { describe, expect, it } from "vitest";

import { AnnotationApi, ApiError } from "../src/api.js";
import { FakeService } from "./helpers.js";

const sentences = [{ sentence_id: "p1:0", text: "One." }];

describe("AnnotationApi", () => {
  it("posts annotations with the exact documented body", async () => {
    const fake = new FakeService(sentences);
    const api = new AnnotationApi("", fake.fetch);
    await api.postAnnotation("c1", "p1:0", ["TREA", "HSYS"]);
    const req = fake.requests.at(-1)!;
    expect(req.url).toBe("/annotations");
    expect(req.method).toBe("POST");
    expect(req.body).toEqual({ coder: "c1", sentence: "p1:0", labels: ["TREA", "HSYS"] });
  });

  it("posts adjudications with the exact documented body", async () => {
    const fake = new FakeService(sentences);
    const api = new AnnotationApi("", fake.fetch);
    await api.postAdjudication("p1:0", ["TREA"], "boss");
    const req = fake.requests.at(-1)!;
    expect(req.url).toBe("/adjudication");
    expect(req.body).toEqual({ sentence: "p1:0", labels: ["TREA"], adjudicator: "boss" });
  });

  it("encodes query parameters", async () => {
    const fake = new FakeService(sentences);
    fake.agreementPayload = { batch: "b 1", n: 0, kappa: null };
    const api = new AnnotationApi("", fake.fetch);
    await api.agreement("b 1");
    expect(fake.requests.at(-1)!.url).toBe("/agreement?batch=b%201");
  });

  it("surfaces {code, message} errors as ApiError", async () => {
    const fake = new FakeService(sentences);
    const api = new AnnotationApi("", fake.fetch);
    const err = await api.postAnnotation("c1", "p1:0", []).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("labels_required");
    expect(err.message).toBe("labels required");
    expect(err.status).toBe(400);
  });
});
