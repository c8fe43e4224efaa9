/** SVG node canvas: rendering plus drag-to-move and drag-to-wire.
 *
 * Everything displayed on a wire (P/S/I badges, error styling) is taken
 * verbatim from the last ValidateResponse; the canvas computes nothing.
 */

import { BADGE_COLOR, badgesByWire, errorWires } from "./badges.js";
import type { CanvasDocument, Point } from "./document.js";
import type { Category, NodeSpecJson, WireRef } from "./types.js";
import { wireKey } from "./types.js";

const NODE_W = 132;
const NODE_H = 44;
const PORT_R = 6;

const ROLE_FILL: Record<string, string> = {
  datasource: "#f7d774",
  processor: "#9fd3f5",
  output: "#f5b09f",
};

const SVG_NS = "http://www.w3.org/2000/svg";

interface PortHit {
  node: string;
  port: string;
  direction: "in" | "out";
}

export interface CanvasCallbacks {
  onMutate(): void;
  onSelect(id: string | null): void;
}

export class CanvasView {
  private dragNode: string | null = null;
  private dragOffset: Point = { x: 0, y: 0 };
  private wireStart: PortHit | null = null;
  private rubberBand: SVGPathElement | null = null;

  constructor(
    private readonly svg: SVGSVGElement,
    private readonly doc: CanvasDocument,
    private readonly specs: Map<string, NodeSpecJson>,
    private readonly callbacks: CanvasCallbacks,
  ) {
    svg.addEventListener("mousemove", (e) => this.onMove(e));
    svg.addEventListener("mouseup", (e) => this.onUp(e));
    svg.addEventListener("mousedown", (e) => {
      if (e.target === svg) {
        this.doc.selection = null;
        this.callbacks.onSelect(null);
        this.render();
      }
    });
  }

  private portPosition(nodeId: string, port: string, direction: "in" | "out"): Point {
    const spec = this.specs.get(this.doc.nodes.get(nodeId)?.spec ?? "");
    const pos = this.doc.positions.get(nodeId) ?? { x: 0, y: 0 };
    const ports = direction === "in" ? spec?.inputs ?? [] : spec?.outputs ?? [];
    const index = Math.max(0, ports.findIndex((p) => p.name === port));
    const count = Math.max(1, ports.length);
    const y = pos.y + ((index + 1) * NODE_H) / (count + 1);
    return { x: direction === "in" ? pos.x : pos.x + NODE_W, y };
  }

  private svgPoint(e: MouseEvent): Point {
    const rect = this.svg.getBoundingClientRect();
    return { x: e.clientX - rect.left, y: e.clientY - rect.top };
  }

  render(): void {
    this.svg.textContent = "";
    const response = this.doc.lastValidate;
    const badges = response ? badgesByWire(response) : new Map<string, Set<Category>>();
    const broken = response ? errorWires(response) : new Set<string>();
    for (const wire of this.doc.wires) {
      this.renderWire(wire, badges, broken);
    }
    for (const id of this.doc.nodes.keys()) {
      this.renderNode(id);
    }
  }

  private renderWire(
    wire: WireRef,
    badges: Map<string, Set<Category>>,
    broken: Set<string>,
  ): void {
    const a = this.portPosition(wire.from[0], wire.from[1], "out");
    const b = this.portPosition(wire.to[0], wire.to[1], "in");
    const key = wireKey(wire.from, wire.to);
    const path = document.createElementNS(SVG_NS, "path");
    const dx = Math.max(40, Math.abs(b.x - a.x) / 2);
    path.setAttribute(
      "d",
      `M ${a.x} ${a.y} C ${a.x + dx} ${a.y}, ${b.x - dx} ${b.y}, ${b.x} ${b.y}`,
    );
    path.setAttribute("class", broken.has(key) ? "wire wire-error" : "wire");
    path.addEventListener("dblclick", () => {
      this.doc.removeWire(wire);
      this.callbacks.onMutate();
      this.render();
    });
    this.svg.appendChild(path);
    const cats = badges.get(key);
    if (cats && cats.size > 0) {
      const mid = { x: (a.x + b.x) / 2, y: (a.y + b.y) / 2 };
      let offset = -((cats.size - 1) * 9);
      for (const cat of ["personal", "sensitive", "identifier"] as Category[]) {
        if (!cats.has(cat)) continue;
        const circle = document.createElementNS(SVG_NS, "circle");
        circle.setAttribute("cx", String(mid.x + offset));
        circle.setAttribute("cy", String(mid.y - 10));
        circle.setAttribute("r", "8");
        circle.setAttribute("fill", BADGE_COLOR[cat]);
        circle.setAttribute("class", "badge");
        const label = document.createElementNS(SVG_NS, "text");
        label.setAttribute("x", String(mid.x + offset));
        label.setAttribute("y", String(mid.y - 6));
        label.setAttribute("class", "badge-text");
        label.textContent = cat[0]!.toUpperCase();
        this.svg.appendChild(circle);
        this.svg.appendChild(label);
        offset += 18;
      }
    }
  }

  private renderNode(id: string): void {
    const node = this.doc.nodes.get(id)!;
    const spec = this.specs.get(node.spec);
    const pos = this.doc.positions.get(id) ?? { x: 0, y: 0 };
    const group = document.createElementNS(SVG_NS, "g");
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(pos.x));
    rect.setAttribute("y", String(pos.y));
    rect.setAttribute("width", String(NODE_W));
    rect.setAttribute("height", String(NODE_H));
    rect.setAttribute("rx", "6");
    rect.setAttribute("fill", ROLE_FILL[spec?.role ?? "processor"] ?? "#ddd");
    rect.setAttribute("class", this.doc.selection === id ? "node node-selected" : "node");
    rect.addEventListener("mousedown", (e) => {
      this.dragNode = id;
      const p = this.svgPoint(e);
      this.dragOffset = { x: p.x - pos.x, y: p.y - pos.y };
      this.doc.selection = id;
      this.callbacks.onSelect(id);
      this.render();
      e.preventDefault();
    });
    group.appendChild(rect);
    const title = document.createElementNS(SVG_NS, "text");
    title.setAttribute("x", String(pos.x + NODE_W / 2));
    title.setAttribute("y", String(pos.y + 18));
    title.setAttribute("class", "node-title");
    title.textContent = id;
    group.appendChild(title);
    const sub = document.createElementNS(SVG_NS, "text");
    sub.setAttribute("x", String(pos.x + NODE_W / 2));
    sub.setAttribute("y", String(pos.y + 34));
    sub.setAttribute("class", "node-sub");
    sub.textContent = node.spec;
    group.appendChild(sub);
    for (const direction of ["in", "out"] as const) {
      const ports = direction === "in" ? spec?.inputs ?? [] : spec?.outputs ?? [];
      for (const port of ports) {
        const at = this.portPosition(id, port.name, direction);
        const circle = document.createElementNS(SVG_NS, "circle");
        circle.setAttribute("cx", String(at.x));
        circle.setAttribute("cy", String(at.y));
        circle.setAttribute("r", String(PORT_R));
        circle.setAttribute("class", `port port-${direction}`);
        circle.addEventListener("mousedown", (e) => {
          e.stopPropagation();
          e.preventDefault();
          if (direction === "out") {
            this.wireStart = { node: id, port: port.name, direction };
            this.rubberBand = document.createElementNS(SVG_NS, "path");
            this.rubberBand.setAttribute("class", "wire wire-rubber");
            this.svg.appendChild(this.rubberBand);
          }
        });
        circle.addEventListener("mouseup", (e) => {
          e.stopPropagation();
          if (this.wireStart && direction === "in") {
            const wire: WireRef = {
              from: [this.wireStart.node, this.wireStart.port],
              to: [id, port.name],
            };
            try {
              this.doc.addWire(wire);
              this.callbacks.onMutate();
            } catch {
              // duplicate wire: ignore the gesture
            }
          }
          this.clearGesture();
          this.render();
        });
        group.appendChild(circle);
      }
    }
    this.svg.appendChild(group);
  }

  private onMove(e: MouseEvent): void {
    if (this.dragNode) {
      const p = this.svgPoint(e);
      this.doc.moveNode(this.dragNode, {
        x: p.x - this.dragOffset.x,
        y: p.y - this.dragOffset.y,
      });
      this.render();
    } else if (this.wireStart && this.rubberBand) {
      const a = this.portPosition(this.wireStart.node, this.wireStart.port, "out");
      const p = this.svgPoint(e);
      this.rubberBand.setAttribute("d", `M ${a.x} ${a.y} L ${p.x} ${p.y}`);
      if (this.rubberBand.parentNode !== this.svg) {
        this.svg.appendChild(this.rubberBand);
      }
    }
  }

  private onUp(_e: MouseEvent): void {
    this.dragNode = null;
    if (this.wireStart) {
      this.clearGesture();
      this.render();
    }
  }

  private clearGesture(): void {
    this.wireStart = null;
    if (this.rubberBand) {
      this.rubberBand.remove();
      this.rubberBand = null;
    }
  }
}
