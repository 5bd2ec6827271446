// HTML templates, kept as pure string builders so they can be tested
// without a DOM. main.ts owns all event wiring.

import type { CameraDocument, SnapshotRecord, StateDocument } from "./api.js";
import { ENCODINGS, FONT_SIZES, MAX_DIMENSION, MIN_DIMENSION, MIN_POLL_INTERVAL_MS } from "./settings.js";
import type { SettingsDraft, ValidationResult } from "./settings.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const MODE_CLASSES: Record<string, string> = {
  Armed: "ok",
  LockedStreaming: "alert",
  Breached: "alert",
  Disarmed: "muted",
};

export function modeBadge(state: StateDocument | null, stale: boolean): string {
  if (!state) {
    return `<span class="badge muted" id="mode-badge">connecting…</span>`;
  }
  const cls = MODE_CLASSES[state.mode] ?? "muted";
  const staleSuffix = stale ? ` <span class="stale">(stale)</span>` : "";
  return (
    `<span class="badge ${cls}${stale ? " stale" : ""}" id="mode-badge">` +
    `${escapeHtml(state.mode)} · ep ${state.episode_id}</span>${staleSuffix}`
  );
}

/** The kill control only exists while the workstation guard is engaged. */
export function unlockButton(state: StateDocument | null): string {
  if (!state || !state.lock_engaged) return "";
  return `<button id="unlock-btn" class="danger">Unlock workstation</button>`;
}

export function loginForm(error: string): string {
  return `
    <form id="login-form" class="card">
      <h2>Sign in</h2>
      <label><span>User</span><input name="username" autocomplete="username" required /></label>
      <label><span>Password</span><input name="password" type="password" autocomplete="current-password" required /></label>
      <button type="submit">Log in</button>
      ${error ? `<p class="form-error">${escapeHtml(error)}</p>` : ""}
    </form>`;
}

export function liveView(sequence: number | null, notice: string): string {
  const caption = sequence === null ? "waiting for the first frame…" : `frame #${sequence}`;
  return `
    <section class="card live">
      <div class="live-frame"><img id="live-img" alt="live camera frame" /></div>
      <p class="caption"><span id="frame-seq">${escapeHtml(caption)}</span></p>
      ${notice ? `<p class="notice" id="live-notice">${escapeHtml(notice)}</p>` : ""}
      <button id="save-btn">Save snapshot</button>
    </section>`;
}

export function galleryView(items: SnapshotRecord[], notice: string): string {
  const rows = items
    .map(
      (item) => `
      <tr data-id="${escapeHtml(item.snapshot_id)}">
        <td><a href="#" class="snap-open" data-id="${escapeHtml(item.snapshot_id)}">${escapeHtml(item.snapshot_id)}</a></td>
        <td>${escapeHtml(item.camera_id)}</td>
        <td>${escapeHtml(new Date(item.captured_at * 1000).toISOString())}</td>
        <td>${escapeHtml(item.encoding)}</td>
        <td>${item.byte_length}</td>
        <td>
          <button class="snap-download" data-id="${escapeHtml(item.snapshot_id)}">Download</button>
          <button class="snap-delete danger" data-id="${escapeHtml(item.snapshot_id)}">Delete</button>
        </td>
      </tr>`,
    )
    .join("");
  const body = items.length
    ? `<table class="gallery">
        <thead><tr><th>id</th><th>camera</th><th>captured</th><th>encoding</th><th>bytes</th><th></th></tr></thead>
        <tbody>${rows}</tbody>
      </table>`
    : `<p class="empty">No snapshots saved yet.</p>`;
  return `
    <section class="card">
      ${notice ? `<p class="notice" id="gallery-notice">${escapeHtml(notice)}</p>` : ""}
      ${body}
      <div id="snap-preview"></div>
    </section>`;
}

function fieldError(result: ValidationResult, field: keyof SettingsDraft): string {
  const message = result.errors[field];
  return message ? `<p class="form-error">${escapeHtml(message)}</p>` : "";
}

export function settingsForm(draft: SettingsDraft, cameras: CameraDocument[], result: ValidationResult): string {
  const cameraOptions = cameras
    .map(
      (cam) =>
        `<option value="${escapeHtml(cam.camera_id)}"${cam.camera_id === draft.cam ? " selected" : ""}>` +
        `${escapeHtml(cam.camera_id)} (${cam.native_width}×${cam.native_height})</option>`,
    )
    .join("");
  const encodingOptions = ENCODINGS.map(
    (enc) => `<option value="${enc}"${enc === draft.encoding ? " selected" : ""}>${enc}</option>`,
  ).join("");
  const fontOptions = FONT_SIZES.map(
    (f) => `<option value="${f.value}"${String(f.value) === draft.fontSize ? " selected" : ""}>${f.label}</option>`,
  ).join("");
  return `
    <form id="settings-form" class="card">
      <label><span>Server URL</span>
        <input name="serverUrl" value="${escapeHtml(draft.serverUrl)}" />
      </label>${fieldError(result, "serverUrl")}
      <label><span>Camera</span>
        <select name="cam"><option value="">(first configured)</option>${cameraOptions}</select>
      </label>
      <label><span>Width</span>
        <input name="width" inputmode="numeric" value="${escapeHtml(draft.width)}" /> px (${MIN_DIMENSION}–${MAX_DIMENSION})
      </label>${fieldError(result, "width")}
      <label><span>Height</span>
        <input name="height" inputmode="numeric" value="${escapeHtml(draft.height)}" /> px (${MIN_DIMENSION}–${MAX_DIMENSION})
      </label>${fieldError(result, "height")}
      <label class="inline"><input type="checkbox" name="constrain"${draft.constrain ? " checked" : ""} />
        <span>Constrain proportions</span>
      </label>
      <label><span>Encoding</span><select name="encoding">${encodingOptions}</select></label>${fieldError(result, "encoding")}
      <label class="inline"><input type="checkbox" name="showTime"${draft.showTime ? " checked" : ""} />
        <span>Show timestamp</span>
      </label>
      <label><span>Timestamp font</span><select name="fontSize">${fontOptions}</select></label>${fieldError(result, "fontSize")}
      <label><span>Poll interval</span>
        <input name="pollIntervalMs" inputmode="numeric" value="${escapeHtml(draft.pollIntervalMs)}" /> ms (min ${MIN_POLL_INTERVAL_MS})
      </label>${fieldError(result, "pollIntervalMs")}
      <button type="submit">Apply</button>
      <p class="form-hint" id="settings-status"></p>
    </form>`;
}
