// Browser entry point: owns the DOM and wires the models together. All
// server traffic goes through GvssClient; all markup comes from render.ts.

import { ApiError, GvssClient, Unauthorized } from "./api.js";
import type { CameraDocument, StateDocument } from "./api.js";
import { Gallery } from "./gallery.js";
import { FramePoller } from "./poller.js";
import { galleryView, liveView, loginForm, modeBadge, settingsForm, unlockButton } from "./render.js";
import { frameQuery, loadSettings, saveSettings, toDraft, validateSettings } from "./settings.js";
import type { SettingsDraft, ViewerSettings } from "./settings.js";

type Tab = "live" | "gallery" | "settings";

const view = document.querySelector<HTMLElement>("#view")!;
const badgeSlot = document.querySelector<HTMLElement>("#badge-slot")!;
const unlockSlot = document.querySelector<HTMLElement>("#unlock-slot")!;
const tabBar = document.querySelector<HTMLElement>("#tabs")!;

let settings: ViewerSettings = loadSettings(localStorage);
if (!settings.serverUrl) settings.serverUrl = window.location.origin;

let client = new GvssClient(settings.serverUrl);
let gallery = new Gallery(client);
let cameras: CameraDocument[] = [];
let currentTab: Tab = "live";
let lastState: StateDocument | null = null;
let isStale = false;
let frameUrl: string | null = null;
let lastSequence: number | null = null;
let liveNotice = "";

const poller = new FramePoller(client, () => settings, {
  onFrame(frame) {
    lastSequence = frame.sequence;
    liveNotice = "";
    if (frameUrl) URL.revokeObjectURL(frameUrl);
    frameUrl = URL.createObjectURL(new Blob([frame.bytes], { type: frame.mediaType }));
    updateLive();
  },
  onState(state) {
    lastState = state;
    renderHeader();
  },
  onFrameUnavailable(_status, detail) {
    liveNotice = detail;
    updateLive();
  },
  onStale(stale) {
    isStale = stale;
    if (stale) liveNotice = "connection lost — retrying";
    renderHeader();
    updateLive();
  },
  onUnauthorized() {
    showLogin("session expired, sign in again");
  },
});

function renderHeader(): void {
  badgeSlot.innerHTML = modeBadge(lastState, isStale);
  unlockSlot.innerHTML = unlockButton(lastState);
}

function updateLive(): void {
  if (currentTab !== "live") return;
  const img = view.querySelector<HTMLImageElement>("#live-img");
  const seq = view.querySelector<HTMLElement>("#frame-seq");
  if (!img || !seq) {
    view.innerHTML = liveView(lastSequence, liveNotice);
  }
  const imgNow = view.querySelector<HTMLImageElement>("#live-img")!;
  const seqNow = view.querySelector<HTMLElement>("#frame-seq")!;
  if (frameUrl) imgNow.src = frameUrl;
  seqNow.textContent = lastSequence === null ? "waiting for the first frame…" : `frame #${lastSequence}`;
  const noticeNow = view.querySelector<HTMLElement>("#live-notice");
  if (noticeNow) noticeNow.textContent = liveNotice;
  else if (liveNotice) view.innerHTML = liveView(lastSequence, liveNotice);
}

function showLogin(error: string): void {
  poller.stop();
  tabBar.hidden = true;
  view.innerHTML = loginForm(error);
  const form = view.querySelector<HTMLFormElement>("#login-form")!;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    void doLogin(String(data.get("username") ?? ""), String(data.get("password") ?? ""));
  });
}

async function doLogin(username: string, password: string): Promise<void> {
  try {
    const doc = await client.login(username, password);
    cameras = doc.cameras;
  } catch (err) {
    showLogin(err instanceof Unauthorized ? "invalid credentials" : `login failed: ${String(err)}`);
    return;
  }
  tabBar.hidden = false;
  switchTab("live");
  poller.start();
}

function switchTab(tab: Tab): void {
  currentTab = tab;
  for (const link of tabBar.querySelectorAll("a")) {
    link.classList.toggle("active", link.dataset.tab === tab);
  }
  if (tab === "live") {
    view.innerHTML = liveView(lastSequence, liveNotice);
    updateLive();
  } else if (tab === "gallery") {
    view.innerHTML = galleryView(gallery.items, "loading…");
    void gallery
      .refresh()
      .then(() => {
        if (currentTab === "gallery") view.innerHTML = galleryView(gallery.items, gallery.notice);
      })
      .catch(handleAsyncError);
  } else {
    renderSettings(toDraft(settings), { settings: null, errors: {} });
  }
}

function renderSettings(draft: SettingsDraft, result: ReturnType<typeof validateSettings>): void {
  view.innerHTML = settingsForm(draft, cameras, result);
  const form = view.querySelector<HTMLFormElement>("#settings-form")!;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const nextDraft: SettingsDraft = {
      serverUrl: String(data.get("serverUrl") ?? ""),
      cam: String(data.get("cam") ?? ""),
      width: String(data.get("width") ?? ""),
      height: String(data.get("height") ?? ""),
      constrain: data.get("constrain") !== null,
      encoding: String(data.get("encoding") ?? ""),
      showTime: data.get("showTime") !== null,
      fontSize: String(data.get("fontSize") ?? ""),
      pollIntervalMs: String(data.get("pollIntervalMs") ?? ""),
    };
    const checked = validateSettings(nextDraft);
    if (!checked.settings) {
      renderSettings(nextDraft, checked);
      return;
    }
    const serverChanged = checked.settings.serverUrl !== settings.serverUrl;
    settings = checked.settings;
    saveSettings(localStorage, settings);
    if (serverChanged) {
      // The cached token belongs to the old server; start over against the new one.
      client = new GvssClient(settings.serverUrl);
      gallery = new Gallery(client);
      showLogin("server changed — sign in again");
      return;
    }
    const status = view.querySelector<HTMLElement>("#settings-status");
    if (status) status.textContent = "saved — applies to the next frame request";
  });
}

function handleAsyncError(err: unknown): void {
  if (err instanceof Unauthorized) {
    showLogin("session expired, sign in again");
  } else {
    liveNotice = String(err instanceof Error ? err.message : err);
    updateLive();
  }
}

// -- event delegation --------------------------------------------------------

tabBar.addEventListener("click", (event) => {
  const link = (event.target as HTMLElement).closest<HTMLAnchorElement>("a[data-tab]");
  if (!link) return;
  event.preventDefault();
  switchTab(link.dataset.tab as Tab);
});

unlockSlot.addEventListener("click", (event) => {
  if (!(event.target as HTMLElement).closest("#unlock-btn")) return;
  if (!window.confirm("Send the kill command and unlock the workstation?")) return;
  void client
    .kill()
    .then((state) => {
      lastState = state;
      renderHeader();
    })
    .catch((err) => {
      if (err instanceof ApiError && err.status === 409) {
        liveNotice = "already unlocked";
        void client.state().then((state) => {
          lastState = state;
          renderHeader();
          updateLive();
        });
      } else {
        handleAsyncError(err);
      }
    });
});

view.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.closest("#save-btn")) {
    void client
      .saveSnapshot(frameQuery(settings))
      .then((record) => {
        liveNotice = `saved ${record.snapshot_id}`;
        updateLive();
      })
      .catch(handleAsyncError);
    return;
  }
  const openLink = target.closest<HTMLElement>(".snap-open");
  const downloadBtn = target.closest<HTMLElement>(".snap-download");
  const deleteBtn = target.closest<HTMLElement>(".snap-delete");
  if (openLink) event.preventDefault();
  const id = (openLink ?? downloadBtn ?? deleteBtn)?.dataset.id;
  if (!id) return;
  if (deleteBtn) {
    void gallery
      .remove(id)
      .then(() => {
        view.innerHTML = galleryView(gallery.items, gallery.notice);
      })
      .catch(handleAsyncError);
  } else if (openLink || downloadBtn) {
    void gallery
      .open(id)
      .then((image) => {
        if (!image) {
          view.innerHTML = galleryView(gallery.items, gallery.notice);
          return;
        }
        const url = URL.createObjectURL(new Blob([image.bytes], { type: image.mediaType }));
        if (downloadBtn) {
          const anchor = document.createElement("a");
          anchor.href = url;
          anchor.download = id + (image.mediaType === "image/jpeg" ? ".jpg" : ".png");
          anchor.click();
        } else {
          const preview = view.querySelector<HTMLElement>("#snap-preview");
          if (preview) preview.innerHTML = `<img src="${url}" alt="snapshot ${id}" />`;
        }
      })
      .catch(handleAsyncError);
  }
});

renderHeader();
showLogin("");
