// Turn a context-patch window into a colored cell mosaic. Pure data here;
// the DOM layer just paints what buildMosaic returns.

import type { GeneralClass, PatchWindowDoc } from "./types.js";
import { CLASS_DISPLAY } from "./types.js";

export const CLASS_COLORS: Record<GeneralClass, string> = {
  ArtificialSurfaces: "#d73027",
  Agriculture: "#fee08b",
  Forest: "#1a9850",
  Water: "#4575b4",
  OthersUnclassified: "#9e9e9e",
};

export const NODATA_COLOR = "#f0f0f0";

export interface MosaicCell {
  value: number;
  color: string;
  title: string;
  isCenter: boolean;
}

export interface LegendSwatch {
  code: number;
  color: string;
  text: string;
}

export function cellAppearance(
  value: number,
  window: PatchWindowDoc,
): { color: string; title: string } {
  if (value === window.nodata) {
    return { color: NODATA_COLOR, title: "nodata" };
  }
  const entry = window.legend[String(value)];
  if (!entry) {
    return { color: NODATA_COLOR, title: `code ${value}` };
  }
  return {
    color: CLASS_COLORS[entry.general],
    title: `${entry.label} (${CLASS_DISPLAY[entry.general]}, code ${value})`,
  };
}

export function buildMosaic(window: PatchWindowDoc): MosaicCell[][] {
  const mid = Math.floor(window.side / 2);
  return window.values.map((row, r) =>
    row.map((value, c) => {
      const { color, title } = cellAppearance(value, window);
      return { value, color, title, isCenter: r === mid && c === mid };
    }),
  );
}

export function buildLegend(window: PatchWindowDoc): LegendSwatch[] {
  return Object.entries(window.legend)
    .map(([code, entry]) => ({
      code: Number(code),
      color: CLASS_COLORS[entry.general],
      text: `${code}: ${entry.label}`,
    }))
    .sort((a, b) => a.code - b.code);
}
