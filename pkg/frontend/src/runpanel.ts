/** Test-run panel model: session lifecycle, the live record stream, output
 * listings, lineage lookups, and the time scrubber (window queries). All
 * data comes from the dev server; the panel only accumulates and slices. */

import type { ApiClient, StreamHandle } from "./api.js";
import type { CanvasDocument } from "./document.js";
import type { LineageJson, NodeSpecJson, ProvRecordJson } from "./types.js";

export interface RunEvents {
  onRecord?: (record: ProvRecordJson) => void;
  onDone?: () => void;
}

export class RunPanel {
  records: ProvRecordJson[] = [];
  sessionId: string | null = null;
  running = false;
  private stream: StreamHandle | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly events: RunEvents = {},
  ) {}

  async start(
    doc: CanvasDocument,
    seed: number,
    duration: number,
    profiles: Record<string, string> = {},
  ): Promise<string> {
    await this.stopIfRunning();
    this.records = [];
    const { id } = await this.api.createSession({ flow: doc.toFlowFile(), seed, duration, profiles });
    this.sessionId = id;
    this.running = true;
    this.stream = this.api.openStream(
      this.api.streamUrl(id),
      (record) => {
        this.records.push(record);
        this.events.onRecord?.(record);
      },
      () => {
        this.running = false;
        this.events.onDone?.();
      },
    );
    return id;
  }

  async stopIfRunning(): Promise<void> {
    if (this.sessionId && this.running) {
      this.stream?.close();
      try {
        await this.api.stopSession(this.sessionId);
      } catch {
        // session may have already drained
      }
    }
    this.running = false;
  }

  /** Output nodes of the current flow, in palette order. */
  outputNodes(doc: CanvasDocument, specs: Map<string, NodeSpecJson>): string[] {
    return [...doc.nodes.keys()]
      .filter((id) => specs.get(doc.nodes.get(id)!.spec)?.role === "output")
      .sort();
  }

  /** Records consumed by one output node, latest first. */
  outputFeed(nodeId: string): ProvRecordJson[] {
    return this.records.filter((r) => r.kind === "consume" && r.node === nodeId).reverse();
  }

  maxTime(): number {
    return this.records.reduce((acc, r) => Math.max(acc, r.t), 0);
  }

  lineage(message: number): Promise<LineageJson> {
    if (!this.sessionId) {
      return Promise.reject(new Error("no session"));
    }
    return this.api.lineage(this.sessionId, message);
  }

  /** Scrubber: fetch the node's records inside [from, to] from the server. */
  scrub(node: string, from: number, to: number): Promise<{ records: ProvRecordJson[] }> {
    if (!this.sessionId) {
      return Promise.reject(new Error("no session"));
    }
    return this.api.window(this.sessionId, node, from, to);
  }
}

/** Flatten a lineage tree into display rows (depth-first, root first). */
export function lineageRows(tree: LineageJson): { depth: number; node: LineageJson }[] {
  const rows: { depth: number; node: LineageJson }[] = [];
  const walk = (node: LineageJson, depth: number): void => {
    rows.push({ depth, node });
    for (const parent of node.parents) {
      walk(parent, depth + 1);
    }
  };
  walk(tree, 0);
  return rows;
}
