import { describe, expect, it } from "vitest";

import { ApiClient, LatestWins, resolveBaseUrl } from "../src/api.js";
import { fakeApi } from "./helpers.js";

describe("url building", () => {
  it("versioned prefix and param omission", () => {
    const api = new ApiClient("http://svc");
    expect(api.url("/status")).toBe("http://svc/api/v1/status");
    expect(api.url("/transactions", {
      from: 1, to: 2, granularity: "1m", chaincode: null, msp: undefined,
    })).toBe("http://svc/api/v1/transactions?from=1&to=2&granularity=1m");
  });

  it("base url resolution order", () => {
    expect(resolveBaseUrl("http://x/")).toBe("http://x");
    globalThis.LEDGERWATCH_API = "http://global/";
    try {
      expect(resolveBaseUrl()).toBe("http://global");
    } finally {
      delete (globalThis as Record<string, unknown>).LEDGERWATCH_API;
    }
    const meta = document.createElement("meta");
    meta.setAttribute("name", "ledgerwatch-api");
    meta.setAttribute("content", "http://meta-configured");
    document.head.append(meta);
    try {
      expect(resolveBaseUrl()).toBe("http://meta-configured");
    } finally {
      meta.remove();
    }
  });

  it("raises on non-2xx", async () => {
    const { api } = fakeApi(() => undefined);
    await expect(api.status()).rejects.toThrow(/404/);
  });
});

describe("latest-wins gate", () => {
  it("aborts the previous request and applies only the newest", async () => {
    const gate = new LatestWins();
    const aborted: string[] = [];
    const slow = gate.run("k", (signal) => new Promise<string>((resolve) => {
      signal.addEventListener("abort", () => {
        aborted.push("slow");
        resolve("slow-result");
      });
    }));
    const fast = gate.run("k", async () => "fast-result");
    expect(await fast).toBe("fast-result");
    expect(await slow).toBeNull(); // superseded delivers nothing
    expect(aborted).toEqual(["slow"]);
  });

  it("independent keys do not interfere", async () => {
    const gate = new LatestWins();
    const a = gate.run("a", async () => 1);
    const b = gate.run("b", async () => 2);
    expect(await a).toBe(1);
    expect(await b).toBe(2);
  });
});
