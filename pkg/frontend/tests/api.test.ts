import { describe, expect, it } from "vitest";
import { ApiClient, ApiRequestError } from "../src/api";

function fetchStub(status: number, body: unknown) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fn = (async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
    } as Response;
  }) as typeof fetch;
  return { fn, calls };
}

describe("ApiClient", () => {
  it("submits edits with strategy and expected version", async () => {
    const stub = fetchStub(200, { version: 2, plan: {}, scene: {} });
    const api = new ApiClient("", stub.fn);
    await api.submitEdit("room", "move the 'sofa' left", "cga", 1);
    expect(stub.calls[0].url).toBe("/scenes/room/edits");
    expect(JSON.parse(String(stub.calls[0].init?.body))).toEqual({
      query: "move the 'sofa' left",
      strategy: "cga",
      expected_version: 1,
    });
  });

  it("surfaces service error codes", async () => {
    const stub = fetchStub(409, {
      detail: { code: "unresolvable", message: "no valid placement" },
    });
    const api = new ApiClient("", stub.fn);
    await expect(api.undo("room")).rejects.toThrowError(ApiRequestError);
    try {
      await api.undo("room");
    } catch (error) {
      const apiError = error as ApiRequestError;
      expect(apiError.code).toBe("unresolvable");
      expect(apiError.status).toBe(409);
    }
  });

  it("encodes scene ids in paths", async () => {
    const stub = fetchStub(200, { id: "a b", objects: [] });
    const api = new ApiClient("", stub.fn);
    await api.getScene("a b");
    expect(stub.calls[0].url).toBe("/scenes/a%20b");
  });
});
