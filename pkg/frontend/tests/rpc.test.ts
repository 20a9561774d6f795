import { describe, expect, it } from "vitest";

import { httpTransport, isStale, RpcError, TransportFailure } from "../src/rpc.js";

function fakeFetch(reply: (body: { id: number; method: string; params: unknown }) => unknown) {
  const seen: { url: string; body: string }[] = [];
  const fetchFn = async (url: string, init: RequestInit) => {
    const body = String(init.body);
    seen.push({ url, body });
    const parsed = JSON.parse(body);
    const payload = reply(parsed);
    return new Response(JSON.stringify(payload), { status: 200 });
  };
  return { fetchFn, seen };
}

describe("httpTransport", () => {
  it("posts one envelope per call with increasing ids", async () => {
    const { fetchFn, seen } = fakeFetch((b) => ({ id: b.id, result: { ok: b.method } }));
    const call = httpTransport("http://e", fetchFn);
    expect(await call("version", {})).toEqual({ ok: "version" });
    expect(await call("analyze", { source: "x = 1\n" })).toEqual({ ok: "analyze" });
    expect(seen.map((s) => s.url)).toEqual(["http://e/rpc", "http://e/rpc"]);
    const ids = seen.map((s) => JSON.parse(s.body).id);
    expect(ids).toEqual([1, 2]);
    expect(JSON.parse(seen[1]!.body).params).toEqual({ source: "x = 1\n" });
  });

  it("turns an error envelope into an RpcError carrying the code", async () => {
    const { fetchFn } = fakeFetch((b) => ({
      id: b.id,
      error: { code: 404, message: "unknown question: zzz" },
    }));
    const call = httpTransport("", fetchFn);
    const failure = await call("question.get", { question_id: "zzz" }).catch((e) => e);
    expect(failure).toBeInstanceOf(RpcError);
    expect((failure as RpcError).code).toBe(404);
    expect((failure as RpcError).message).toMatch(/unknown question/);
  });

  it("reports a dead server as a TransportFailure, not an RpcError", async () => {
    const call = httpTransport("", async () => {
      throw new Error("ECONNREFUSED");
    });
    await expect(call("version", {})).rejects.toBeInstanceOf(TransportFailure);
  });

  it("reports a non-200 answer as a TransportFailure", async () => {
    const call = httpTransport("", async () => new Response("gone", { status: 502 }));
    await expect(call("version", {})).rejects.toBeInstanceOf(TransportFailure);
  });
});

describe("isStale", () => {
  it("matches the stale-anchor codes only", () => {
    expect(isStale(new RpcError(404, "unknown question"))).toBe(true);
    expect(isStale(new RpcError(410, "anchor gone"))).toBe(true);
    expect(isStale(new RpcError(400, "bad params"))).toBe(false);
    expect(isStale(new TransportFailure("down"))).toBe(false);
    expect(isStale(new Error("plain"))).toBe(false);
  });
});
