import { readFileSync } from "node:fs";
import { join } from "node:path";

import { ApiClient } from "../src/api.js";

export function fixture<T>(name: string): T {
  // vitest runs with the frontend directory as cwd.
  const path = join(process.cwd(), "tests", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export type Route = (url: URL) => unknown;

/** ApiClient backed by an in-memory router instead of the network. */
export function fakeApi(route: Route): { api: ApiClient; calls: URL[] } {
  const calls: URL[] = [];
  const api = new ApiClient("http://svc", async (raw) => {
    const url = new URL(raw);
    calls.push(url);
    const payload = route(url);
    if (payload === undefined) {
      return new Response("not found", { status: 404 });
    }
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  });
  return { api, calls };
}

export function mouse(type: string, clientX: number, clientY = 10): MouseEvent {
  return new MouseEvent(type, { clientX, clientY, bubbles: true });
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
