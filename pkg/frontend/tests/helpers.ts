// Shared stubs for the unit tests: canned HTTP responses and API documents.

import type { FrameResult, SnapshotRecord, StateDocument } from "../src/api.js";

export function jsonResponse(status: number, body: unknown, headers: Record<string, string> = {}): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json", ...headers },
  });
}

export function bytesResponse(bytes: Uint8Array, mediaType: string, headers: Record<string, string> = {}): Response {
  return new Response(bytes.slice().buffer as ArrayBuffer, {
    status: 200,
    headers: { "Content-Type": mediaType, ...headers },
  });
}

export function stateDoc(overrides: Partial<StateDocument> = {}): StateDocument {
  return { mode: "Armed", episode_id: 0, lock_engaged: false, beam_health: "ok", ...overrides };
}

export function frameDoc(sequence: number): FrameResult {
  return { bytes: new Uint8Array([0xff, 0xd8, 0xff]).buffer as ArrayBuffer, mediaType: "image/jpeg", sequence };
}

export function snapshotDoc(id: string, overrides: Partial<SnapshotRecord> = {}): SnapshotRecord {
  return {
    snapshot_id: id,
    camera_id: "front",
    captured_at: 1_257_431_459.5,
    encoding: "jpeg",
    byte_length: 1234,
    media_type: "image/jpeg",
    ...overrides,
  };
}

/** In-memory stand-in for window.localStorage. */
export class MemoryStorage {
  private readonly data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.has(key) ? this.data.get(key)! : null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}
