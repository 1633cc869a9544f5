/** Profile presets: static file mirroring the corpus generator's personas. */

import { ProfilePreset } from "./session.js";

export interface PresetsFile {
  presets: ProfilePreset[];
}

export async function loadPresets(url = "./profile_presets.json"): Promise<ProfilePreset[]> {
  const response = await fetch(url);
  if (!response.ok) {
    throw new Error(`cannot load presets: HTTP ${response.status}`);
  }
  const doc = (await response.json()) as PresetsFile;
  if (!Array.isArray(doc.presets) || doc.presets.length === 0) {
    throw new Error("presets file has no presets");
  }
  return doc.presets;
}
