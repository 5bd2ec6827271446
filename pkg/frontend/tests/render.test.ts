import { describe, expect, it } from "vitest";

import { escapeHtml, galleryView, modeBadge, settingsForm, unlockButton } from "../src/render.js";
import { toDraft, validateSettings, DEFAULT_SETTINGS } from "../src/settings.js";
import { snapshotDoc, stateDoc } from "./helpers.js";

describe("modeBadge", () => {
  it("shows the armed state as ok", () => {
    const html = modeBadge(stateDoc({ mode: "Armed", episode_id: 2 }), false);
    expect(html).toContain("Armed");
    expect(html).toContain("ep 2");
    expect(html).toContain('class="badge ok"');
  });

  it("shows LockedStreaming as an alert", () => {
    const html = modeBadge(stateDoc({ mode: "LockedStreaming", lock_engaged: true }), false);
    expect(html).toContain("LockedStreaming");
    expect(html).toContain("alert");
  });

  it("marks a stale feed", () => {
    const html = modeBadge(stateDoc(), true);
    expect(html).toContain("stale");
    expect(html).toContain("(stale)");
  });

  it("renders a placeholder before the first state arrives", () => {
    expect(modeBadge(null, false)).toContain("connecting");
  });
});

describe("unlockButton", () => {
  it("exists only while the lock guard is engaged", () => {
    expect(unlockButton(stateDoc({ mode: "LockedStreaming", lock_engaged: true }))).toContain("unlock-btn");
    expect(unlockButton(stateDoc({ mode: "Armed", lock_engaged: false }))).toBe("");
    expect(unlockButton(null)).toBe("");
  });
});

describe("galleryView", () => {
  it("renders one row per snapshot with actions", () => {
    const html = galleryView([snapshotDoc("s2"), snapshotDoc("s1")], "");
    expect(html.match(/snap-delete/g)).toHaveLength(2);
    expect(html.indexOf("s2")).toBeLessThan(html.indexOf("s1"));
    expect(html).toContain("snap-download");
  });

  it("shows empty-state text when the store is empty", () => {
    expect(galleryView([], "")).toContain("No snapshots saved yet");
  });

  it("escapes hostile snapshot fields", () => {
    const html = galleryView([snapshotDoc('<img src=x onerror="1">')], "");
    expect(html).not.toContain('<img src=x onerror="1">');
    expect(html).toContain("&lt;img");
  });

  it("surfaces the notice line", () => {
    expect(galleryView([], "snapshot x was already deleted")).toContain("already deleted");
  });
});

describe("settingsForm", () => {
  it("keeps the submitted values and shows inline errors", () => {
    const draft = { ...toDraft(DEFAULT_SETTINGS), serverUrl: "http://h", width: "5" };
    const result = validateSettings(draft);
    const html = settingsForm(draft, [], result);
    expect(html).toContain('value="5"');
    expect(html).toContain("between 8 and 4096");
    expect(html).toContain("form-error");
  });

  it("lists the configured cameras", () => {
    const cameras = [
      {
        camera_id: "front",
        name: "front",
        kind: "synthetic",
        native_width: 640,
        native_height: 480,
        normal_width: 320,
        normal_height: 240,
        cadence_ms: 1000,
      },
    ];
    const html = settingsForm(toDraft({ ...DEFAULT_SETTINGS, cam: "front" }), cameras, {
      settings: null,
      errors: {},
    });
    expect(html).toContain("front (640×480)");
    expect(html).toContain("selected");
  });

  it("offers all four encodings and three font sizes", () => {
    const html = settingsForm(toDraft(DEFAULT_SETTINGS), [], { settings: null, errors: {} });
    for (const enc of ["jpeg", "png24", "png8", "pnggray"]) {
      expect(html).toContain(`value="${enc}"`);
    }
    for (const label of ["Small", "Medium", "Large"]) {
      expect(html).toContain(label);
    }
  });
});

describe("escapeHtml", () => {
  it("neutralizes markup metacharacters", () => {
    expect(escapeHtml(`<a b="c">&`)).toBe("&lt;a b=&quot;c&quot;&gt;&amp;");
  });
});
