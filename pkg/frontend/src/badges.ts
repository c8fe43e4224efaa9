/** Edge badge derivation. The editor never classifies data itself: a wire
 * shows a P/S/I badge iff the server-computed label carries at least one
 * atom of that category. */

import type { Category, ValidateResponse } from "./types.js";
import { wireKey } from "./types.js";

export const BADGE_ORDER: Category[] = ["personal", "sensitive", "identifier"];

export const BADGE_GLYPH: Record<Category, string> = {
  personal: "P",
  sensitive: "S",
  identifier: "I",
};

export const BADGE_COLOR: Record<Category, string> = {
  personal: "#e8821a",
  sensitive: "#d25246",
  identifier: "#2a6fdb",
};

export function badgesByWire(response: ValidateResponse): Map<string, Set<Category>> {
  const out = new Map<string, Set<Category>>();
  for (const wire of response.labels.wires) {
    const cats = new Set<Category>();
    for (const atom of wire.atoms) {
      cats.add(atom.cat);
    }
    out.set(wireKey(wire.from, wire.to), cats);
  }
  return out;
}

export function badgeGlyphs(cats: Set<Category>): string[] {
  return BADGE_ORDER.filter((c) => cats.has(c)).map((c) => BADGE_GLYPH[c]);
}

/** Wires the checker flagged as incompatible, for error styling. */
export function errorWires(response: ValidateResponse): Set<string> {
  const out = new Set<string>();
  for (const d of response.diagnostics) {
    if (d.severity === "error" && d.loc.wire) {
      const [a, b, c, e] = d.loc.wire;
      out.add(wireKey([a, b], [c, e]));
    }
  }
  return out;
}
