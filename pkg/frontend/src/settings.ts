// Viewer settings: the delivery preferences sent with every frame request,
// plus the poll interval and server URL. Persisted in localStorage so they
// survive a reload; validated against the same bounds the server enforces.

export type EncodingName = "jpeg" | "png24" | "png8" | "pnggray";

export const ENCODINGS: readonly EncodingName[] = ["jpeg", "png24", "png8", "pnggray"];

export const FONT_SIZES: ReadonlyArray<{ value: number; label: string }> = [
  { value: 1, label: "Small" },
  { value: 2, label: "Medium" },
  { value: 3, label: "Large" },
];

// Server-side frame bounds, mirrored for inline form validation.
export const MIN_DIMENSION = 8;
export const MAX_DIMENSION = 4096;
export const MIN_POLL_INTERVAL_MS = 250;

export const SETTINGS_KEY = "gvss-viewer-settings";

export interface ViewerSettings {
  serverUrl: string;
  cam: string;
  width: number;
  height: number;
  constrain: boolean;
  encoding: EncodingName;
  showTime: boolean;
  fontSize: number;
  pollIntervalMs: number;
}

export const DEFAULT_SETTINGS: ViewerSettings = {
  serverUrl: "",
  cam: "",
  width: 320,
  height: 240,
  constrain: true,
  encoding: "jpeg",
  showTime: true,
  fontSize: 2,
  pollIntervalMs: 1000,
};

/** Raw form values, all strings except the checkboxes. */
export interface SettingsDraft {
  serverUrl: string;
  cam: string;
  width: string;
  height: string;
  constrain: boolean;
  encoding: string;
  showTime: boolean;
  fontSize: string;
  pollIntervalMs: string;
}

export interface ValidationResult {
  settings: ViewerSettings | null;
  errors: Partial<Record<keyof SettingsDraft, string>>;
}

function parseIntStrict(raw: string): number | null {
  if (!/^-?\d+$/.test(raw.trim())) return null;
  return Number(raw.trim());
}

export function validateSettings(draft: SettingsDraft): ValidationResult {
  const errors: ValidationResult["errors"] = {};

  const serverUrl = draft.serverUrl.trim().replace(/\/+$/, "");
  try {
    const parsed = new URL(serverUrl);
    if (parsed.protocol !== "http:" && parsed.protocol !== "https:") {
      errors.serverUrl = "server URL must be http(s)";
    }
  } catch {
    errors.serverUrl = "not a valid URL";
  }

  const dimension = (raw: string): number | string => {
    const value = parseIntStrict(raw);
    if (value === null || value < MIN_DIMENSION || value > MAX_DIMENSION) {
      return `must be an integer between ${MIN_DIMENSION} and ${MAX_DIMENSION}`;
    }
    return value;
  };
  const width = dimension(draft.width);
  if (typeof width === "string") errors.width = width;
  const height = dimension(draft.height);
  if (typeof height === "string") errors.height = height;

  if (!(ENCODINGS as readonly string[]).includes(draft.encoding)) {
    errors.encoding = `encoding must be one of ${ENCODINGS.join(", ")}`;
  }

  const fontSize = parseIntStrict(draft.fontSize);
  if (fontSize === null || !FONT_SIZES.some((f) => f.value === fontSize)) {
    errors.fontSize = "font size must be 1 (Small), 2 (Medium) or 3 (Large)";
  }

  const pollIntervalMs = parseIntStrict(draft.pollIntervalMs);
  if (pollIntervalMs === null || pollIntervalMs < MIN_POLL_INTERVAL_MS) {
    errors.pollIntervalMs = `poll interval must be at least ${MIN_POLL_INTERVAL_MS} ms`;
  }

  if (Object.keys(errors).length > 0) return { settings: null, errors };
  return {
    settings: {
      serverUrl,
      cam: draft.cam.trim(),
      width: width as number,
      height: height as number,
      constrain: draft.constrain,
      encoding: draft.encoding as EncodingName,
      showTime: draft.showTime,
      fontSize: fontSize as number,
      pollIntervalMs: pollIntervalMs as number,
    },
    errors: {},
  };
}

export function toDraft(settings: ViewerSettings): SettingsDraft {
  return {
    serverUrl: settings.serverUrl,
    cam: settings.cam,
    width: String(settings.width),
    height: String(settings.height),
    constrain: settings.constrain,
    encoding: settings.encoding,
    showTime: settings.showTime,
    fontSize: String(settings.fontSize),
    pollIntervalMs: String(settings.pollIntervalMs),
  };
}

/** Query string for GET /frame and POST /snapshots. Every preference is sent
 *  explicitly so a settings change is visible on the very next request. */
export function frameQuery(settings: ViewerSettings): URLSearchParams {
  const query = new URLSearchParams();
  if (settings.cam) query.set("cam", settings.cam);
  query.set("width", String(settings.width));
  query.set("height", String(settings.height));
  query.set("constrain", settings.constrain ? "true" : "false");
  query.set("enc", settings.encoding);
  query.set("time", settings.showTime ? "true" : "false");
  query.set("font", String(settings.fontSize));
  return query;
}

type StorageLike = Pick<Storage, "getItem" | "setItem">;

export function loadSettings(storage: StorageLike): ViewerSettings {
  const raw = storage.getItem(SETTINGS_KEY);
  if (!raw) return { ...DEFAULT_SETTINGS };
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    return { ...DEFAULT_SETTINGS };
  }
  if (typeof parsed !== "object" || parsed === null) return { ...DEFAULT_SETTINGS };

  // Take each stored field only if it still validates; anything stale or
  // hand-edited falls back to the default for that field alone.
  const candidate = { ...DEFAULT_SETTINGS, ...(parsed as Partial<ViewerSettings>) };
  const checked = validateSettings(toDraft(candidate));
  if (checked.settings) return checked.settings;
  const repaired = { ...candidate };
  for (const field of Object.keys(checked.errors) as (keyof ViewerSettings)[]) {
    (repaired as Record<string, unknown>)[field] = DEFAULT_SETTINGS[field];
  }
  return repaired;
}

export function saveSettings(storage: StorageLike, settings: ViewerSettings): void {
  storage.setItem(SETTINGS_KEY, JSON.stringify(settings));
}
