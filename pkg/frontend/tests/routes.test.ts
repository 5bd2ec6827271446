// Contract test: the client talks only to documented routes with documented
// parameters, and every documented route is reachable through the client.

import { describe, expect, it } from "vitest";

import { ApiError, GvssClient, TOKEN_HEADER, Unauthorized } from "../src/api.js";
import { DEFAULT_SETTINGS, frameQuery } from "../src/settings.js";
import { bytesResponse, jsonResponse, snapshotDoc, stateDoc } from "./helpers.js";

// Mirror of the daemon's route table.
const ROUTE_TABLE: ReadonlyArray<readonly [string, string]> = [
  ["POST", "/login"],
  ["GET", "/state"],
  ["GET", "/cameras"],
  ["GET", "/frame"],
  ["POST", "/control"],
  ["POST", "/snapshots"],
  ["GET", "/snapshots"],
  ["GET", "/snapshots/<id>"],
  ["DELETE", "/snapshots/<id>"],
];

const FRAME_PARAMS = new Set(["cam", "width", "height", "constrain", "enc", "time", "font"]);

interface Recorded {
  method: string;
  path: string;
  query: URLSearchParams;
  headers: Headers;
  body: string;
}

function routeOf(method: string, path: string): string | null {
  for (const [routeMethod, route] of ROUTE_TABLE) {
    if (routeMethod !== method) continue;
    if (route === "/snapshots/<id>") {
      if (/^\/snapshots\/[^/]+$/.test(path)) return route;
    } else if (route === path) {
      return route;
    }
  }
  return null;
}

function recordingClient(): { client: GvssClient; requests: Recorded[] } {
  const requests: Recorded[] = [];
  const client = new GvssClient("http://server.test", async (url, init) => {
    const parsed = new URL(url);
    const record: Recorded = {
      method: init?.method ?? "GET",
      path: parsed.pathname,
      query: parsed.searchParams,
      headers: new Headers(init?.headers),
      body: typeof init?.body === "object" && init.body ? String(init.body) : "",
    };
    requests.push(record);
    switch (routeOf(record.method, record.path)) {
      case "/login":
        return jsonResponse(200, { token: "a".repeat(32), cameras: [] });
      case "/state":
        return jsonResponse(200, stateDoc());
      case "/cameras":
        return jsonResponse(200, []);
      case "/frame":
        return bytesResponse(new Uint8Array([0xff, 0xd8]), "image/jpeg", { "X-Frame-Sequence": "7" });
      case "/control":
        return jsonResponse(200, stateDoc({ mode: "Armed" }));
      case "/snapshots":
        return record.method === "POST" ? jsonResponse(200, snapshotDoc("s1")) : jsonResponse(200, [snapshotDoc("s1")]);
      case "/snapshots/<id>":
        return record.method === "DELETE"
          ? jsonResponse(200, { deleted: "s1" })
          : bytesResponse(new Uint8Array([0x89, 0x50]), "image/png");
      default:
        throw new Error(`undocumented request: ${record.method} ${record.path}`);
    }
  });
  return { client, requests };
}

async function driveEveryMethod(client: GvssClient): Promise<void> {
  await client.login("alice", "secret");
  await client.state();
  await client.cameras();
  await client.frame(frameQuery({ ...DEFAULT_SETTINGS, cam: "front" }));
  await client.kill();
  await client.saveSnapshot(frameQuery(DEFAULT_SETTINGS));
  await client.listSnapshots();
  await client.getSnapshot("s1");
  await client.deleteSnapshot("s1");
}

describe("route contract", () => {
  it("every request matches the documented route table", async () => {
    const { client, requests } = recordingClient();
    await driveEveryMethod(client);
    for (const request of requests) {
      expect(routeOf(request.method, request.path), `${request.method} ${request.path}`).not.toBeNull();
    }
  });

  it("every documented route is reachable through the client", async () => {
    const { client, requests } = recordingClient();
    await driveEveryMethod(client);
    const used = new Set(requests.map((r) => routeOf(r.method, r.path)));
    expect([...used].sort()).toEqual([...new Set(ROUTE_TABLE.map(([, route]) => route))].sort());
    expect(requests).toHaveLength(ROUTE_TABLE.length);
  });

  it("frame and snapshot requests carry only documented parameters", async () => {
    const { client, requests } = recordingClient();
    await driveEveryMethod(client);
    for (const request of requests) {
      if (request.path === "/frame" || (request.path === "/snapshots" && request.method === "POST")) {
        for (const key of request.query.keys()) {
          expect(FRAME_PARAMS.has(key), `${request.path} param ${key}`).toBe(true);
        }
        expect(request.query.get("width")).toBe("320");
      } else if (request.path === "/control") {
        expect(request.query.toString()).toBe("Type=Kill");
      } else {
        expect([...request.query.keys()]).toEqual([]);
      }
    }
  });

  it("sends the token header everywhere except login", async () => {
    const { client, requests } = recordingClient();
    await driveEveryMethod(client);
    for (const request of requests) {
      if (request.path === "/login") {
        expect(request.headers.has(TOKEN_HEADER)).toBe(false);
        expect(request.body).toContain("username=alice");
        expect(request.body).toContain("password=secret");
      } else {
        expect(request.headers.get(TOKEN_HEADER)).toBe("a".repeat(32));
      }
    }
  });
});

describe("error mapping", () => {
  it("throws Unauthorized and forgets the token on any 401", async () => {
    let fail = false;
    const client = new GvssClient("http://server.test", async () =>
      fail ? jsonResponse(401, { error: "unauthorized" }) : jsonResponse(200, { token: "t".repeat(32), cameras: [] }),
    );
    await client.login("alice", "secret");
    expect(client.token).toBe("t".repeat(32));
    fail = true;
    await expect(client.state()).rejects.toBeInstanceOf(Unauthorized);
    expect(client.token).toBeNull();
  });

  it("surfaces the server's error detail", async () => {
    const client = new GvssClient("http://server.test", async () =>
      jsonResponse(409, { error: "nothing is locked: mode is Armed" }),
    );
    client.token = "t".repeat(32);
    const error = await client.kill().then(
      () => null,
      (err: unknown) => err,
    );
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(409);
    expect((error as ApiError).message).toContain("nothing is locked");
  });

  it("tolerates non-JSON error bodies", async () => {
    const client = new GvssClient("http://server.test", async () => new Response("boom", { status: 500 }));
    client.token = "t".repeat(32);
    const error = await client.state().then(
      () => null,
      (err: unknown) => err,
    );
    expect((error as ApiError).message).toBe("HTTP 500");
  });

  it("strips trailing slashes from the server URL", async () => {
    const urls: string[] = [];
    const client = new GvssClient("http://server.test///", async (url) => {
      urls.push(url);
      return jsonResponse(200, stateDoc());
    });
    client.token = "t".repeat(32);
    await client.state();
    expect(urls).toEqual(["http://server.test/state"]);
  });
});
