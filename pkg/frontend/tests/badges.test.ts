import { describe, expect, it } from "vitest";

import { BADGE_COLOR, badgeGlyphs, badgesByWire, errorWires } from "../src/badges.js";
import type { Category, ValidateResponse } from "../src/types.js";
import { wireKey } from "../src/types.js";
import { fixture } from "./helpers.js";

const VALIDATE = fixture<ValidateResponse>("feed_merge.validate.json");
const CHECK = fixture<{ labels: ValidateResponse["labels"] }>("feed_merge.check.json");

describe("edge badges", () => {
  it("derives exactly the categories present in the server labels", () => {
    const badges = badgesByWire(VALIDATE);
    for (const wire of VALIDATE.labels.wires) {
      const expected = new Set(wire.atoms.map((a) => a.cat));
      expect(badges.get(wireKey(wire.from, wire.to))).toEqual(expected);
    }
  });

  it("matches the command-line check output category for category", () => {
    // criterion: UI badges and CLI labels agree on every wire
    const badges = badgesByWire(VALIDATE);
    expect(badges.size).toBe(CHECK.labels.wires.length);
    for (const wire of CHECK.labels.wires) {
      const fromCli = new Set<Category>(wire.atoms.map((a) => a.cat));
      expect(badges.get(wireKey(wire.from, wire.to))).toEqual(fromCli);
    }
  });

  it("shows identifier badges downstream of the feed", () => {
    const badges = badgesByWire(VALIDATE);
    expect(badges.get("pick_text:out->merge:a")).toContain("identifier");
    expect(badges.get("merge:out->out:in")).toContain("identifier");
  });

  it("orders glyphs P, S, I", () => {
    expect(badgeGlyphs(new Set<Category>(["identifier", "personal"]))).toEqual(["P", "I"]);
    expect(badgeGlyphs(new Set<Category>(["sensitive"]))).toEqual(["S"]);
  });

  it("uses orange/red/blue per category", () => {
    expect(BADGE_COLOR.personal.toLowerCase()).toBe("#e8821a");
    expect(BADGE_COLOR.sensitive.toLowerCase()).toBe("#d25246");
    expect(BADGE_COLOR.identifier.toLowerCase()).toBe("#2a6fdb");
  });

  it("collects error-styled wires from diagnostics", () => {
    const response: ValidateResponse = {
      diagnostics: [
        {
          severity: "error",
          code: "wire-incompatible",
          loc: { wire: ["a", "out", "b", "in"] },
          message: "",
        },
        { severity: "warning", code: "unwired-input", loc: { node: "c" }, message: "" },
      ],
      labels: { wires: [] },
      risk: { app: { score: 0, band: "low" }, nodes: [] },
      signatures: {},
      skeletons: {},
    };
    expect(errorWires(response)).toEqual(new Set(["a:out->b:in"]));
  });
});
