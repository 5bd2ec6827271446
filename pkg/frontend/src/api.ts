// Typed client for the daemon's HTTP API. Every request the viewer makes
// goes through this module, so the route-table contract test only has to
// watch one seam.

export type Mode = "Disarmed" | "Armed" | "Breached" | "LockedStreaming";

export interface StateDocument {
  mode: Mode;
  episode_id: number;
  lock_engaged: boolean;
  beam_health: string;
}

export interface CameraDocument {
  camera_id: string;
  name: string;
  kind: string;
  native_width: number;
  native_height: number;
  normal_width: number;
  normal_height: number;
  cadence_ms: number;
}

export interface SnapshotRecord {
  snapshot_id: string;
  camera_id: string;
  captured_at: number;
  encoding: string;
  byte_length: number;
  media_type: string;
}

export interface LoginResponse {
  token: string;
  cameras: CameraDocument[];
}

export interface FrameResult {
  bytes: ArrayBuffer;
  mediaType: string;
  sequence: number;
}

export interface ImageResult {
  bytes: ArrayBuffer;
  mediaType: string;
}

export const TOKEN_HEADER = "X-GVSS-Token";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export class Unauthorized extends ApiError {
  constructor() {
    super(401, "unauthorized");
    this.name = "Unauthorized";
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const doc = await response.json();
    if (doc && typeof doc.error === "string") return doc.error;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `HTTP ${response.status}`;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GvssClient {
  token: string | null = null;
  /** Instrumentation hook: fires with (method, path+query) for every request. */
  onRequest: ((method: string, pathAndQuery: string) => void) | null = null;

  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(serverUrl: string, fetchImpl?: FetchLike) {
    this.base = serverUrl.replace(/\/+$/, "");
    // fetch must be called unbound of this client instance
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request(method: string, pathAndQuery: string, init: RequestInit = {}): Promise<Response> {
    const headers = new Headers(init.headers);
    if (this.token) headers.set(TOKEN_HEADER, this.token);
    this.onRequest?.(method, pathAndQuery);
    const response = await this.fetchImpl(this.base + pathAndQuery, { ...init, method, headers });
    if (response.status === 401) {
      this.token = null;
      throw new Unauthorized();
    }
    return response;
  }

  private async requestJson<T>(method: string, pathAndQuery: string, init: RequestInit = {}): Promise<T> {
    const response = await this.request(method, pathAndQuery, init);
    if (!response.ok) throw new ApiError(response.status, await errorDetail(response));
    return (await response.json()) as T;
  }

  async login(username: string, password: string): Promise<LoginResponse> {
    const doc = await this.requestJson<LoginResponse>("POST", "/login", {
      body: new URLSearchParams({ username, password }),
    });
    this.token = doc.token;
    return doc;
  }

  state(): Promise<StateDocument> {
    return this.requestJson<StateDocument>("GET", "/state");
  }

  cameras(): Promise<CameraDocument[]> {
    return this.requestJson<CameraDocument[]>("GET", "/cameras");
  }

  async frame(query: URLSearchParams): Promise<FrameResult> {
    const response = await this.request("GET", "/frame?" + query.toString());
    if (!response.ok) throw new ApiError(response.status, await errorDetail(response));
    return {
      bytes: await response.arrayBuffer(),
      mediaType: response.headers.get("Content-Type") ?? "application/octet-stream",
      sequence: Number(response.headers.get("X-Frame-Sequence") ?? "-1"),
    };
  }

  /** Send the unlock command. Resolves with the fresh state document on
   *  success; throws ApiError(409) when nothing is locked. */
  kill(): Promise<StateDocument> {
    return this.requestJson<StateDocument>("POST", "/control?Type=Kill");
  }

  saveSnapshot(query: URLSearchParams): Promise<SnapshotRecord> {
    return this.requestJson<SnapshotRecord>("POST", "/snapshots?" + query.toString());
  }

  listSnapshots(): Promise<SnapshotRecord[]> {
    return this.requestJson<SnapshotRecord[]>("GET", "/snapshots");
  }

  async getSnapshot(id: string): Promise<ImageResult> {
    const response = await this.request("GET", "/snapshots/" + encodeURIComponent(id));
    if (!response.ok) throw new ApiError(response.status, await errorDetail(response));
    return {
      bytes: await response.arrayBuffer(),
      mediaType: response.headers.get("Content-Type") ?? "application/octet-stream",
    };
  }

  async deleteSnapshot(id: string): Promise<void> {
    await this.requestJson<{ deleted: string }>("DELETE", "/snapshots/" + encodeURIComponent(id));
  }
}
