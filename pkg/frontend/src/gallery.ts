// Snapshot gallery model: mirrors the server's list (newest first) and keeps
// a one-line notice for rows that vanished under us.

import { ApiError } from "./api.js";
import type { ImageResult, SnapshotRecord } from "./api.js";

/** The slice of the API client the gallery needs. */
export interface GalleryApi {
  listSnapshots(): Promise<SnapshotRecord[]>;
  deleteSnapshot(id: string): Promise<void>;
  getSnapshot(id: string): Promise<ImageResult>;
}

export class Gallery {
  items: SnapshotRecord[] = [];
  notice = "";

  constructor(private readonly client: GalleryApi) {}

  async refresh(): Promise<SnapshotRecord[]> {
    this.items = await this.client.listSnapshots();
    return this.items;
  }

  /** Delete on the server, then re-sync. A 404 means another client beat us
   *  to it — drop the row and say so instead of failing. */
  async remove(id: string): Promise<void> {
    try {
      await this.client.deleteSnapshot(id);
      this.notice = "";
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.notice = `snapshot ${id} was already deleted`;
      } else {
        throw err;
      }
    }
    await this.refresh();
  }

  async open(id: string): Promise<ImageResult | null> {
    try {
      return await this.client.getSnapshot(id);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.notice = `snapshot ${id} is no longer on the server`;
        this.items = this.items.filter((item) => item.snapshot_id !== id);
        return null;
      }
      throw err;
    }
  }
}
