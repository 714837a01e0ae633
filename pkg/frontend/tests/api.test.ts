import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function fakeFetch(
  handler: (input: string, init?: RequestInit) => { status: number; body: unknown },
) {
  const calls: Array<{ input: string; init?: RequestInit }> = [];
  const impl = async (input: string, init?: RequestInit): Promise<Response> => {
    calls.push({ input, init });
    const { status, body } = handler(input, init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { impl, calls };
}

describe("ApiClient", () => {
  it("lists samples with an optional status filter", async () => {
    const { impl, calls } = fakeFetch(() => ({
      status: 200,
      body: { samples: [], total: 0, experts: ["a", "b"] },
    }));
    const client = new ApiClient("http://x", impl);
    const doc = await client.listSamples("needs-review");
    expect(doc.experts).toEqual(["a", "b"]);
    expect(calls[0].input).toBe("http://x/api/samples?status=needs-review");
  });

  it("posts round-1 annotations as JSON", async () => {
    const { impl, calls } = fakeFetch(() => ({
      status: 201,
      body: { sample_id: 3, status: "partially-annotated", sample: {} },
    }));
    const client = new ApiClient("", impl);
    const resp = await client.postAnnotation({
      sample_id: 3,
      expert_id: "a",
      label: "Water",
      confidence: 1,
    });
    expect(resp.status).toBe("partially-annotated");
    expect(calls[0].input).toBe("/api/annotations");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      sample_id: 3,
      expert_id: "a",
      label: "Water",
      confidence: 1,
    });
  });

  it("raises typed errors with the server's machine-readable code", async () => {
    const { impl } = fakeFetch(() => ({
      status: 409,
      body: { error: "duplicate-annotation", message: "already annotated" },
    }));
    const client = new ApiClient("", impl);
    const err = await client
      .postAnnotation({ sample_id: 1, expert_id: "a", label: "Water", confidence: 1 })
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("duplicate-annotation");
    expect(err.message).toBe("already annotated");
  });

  it("tolerates non-JSON error bodies", async () => {
    const impl = async () => new Response("boom", { status: 500 });
    const client = new ApiClient("", impl);
    const err = await client.getReview().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("http-error");
  });

  it("fetches patches and the review queue", async () => {
    const { impl, calls } = fakeFetch((input) => {
      if (input.endsWith("/patch")) {
        return { status: 200, body: { sample_id: 5, windows: [] } };
      }
      return { status: 200, body: { sample_ids: [5], samples: [] } };
    });
    const client = new ApiClient("", impl);
    expect((await client.getPatch(5)).sample_id).toBe(5);
    expect((await client.getReview()).sample_ids).toEqual([5]);
    expect(calls.map((c) => c.input)).toEqual(["/api/samples/5/patch", "/api/review"]);
  });
});
