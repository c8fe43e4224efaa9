/** Live validation loop: debounce after the last mutation, at most one
 * in-flight request, latest response wins. When the server is unreachable
 * the previous result is kept and flagged stale. */

import type { CanvasDocument } from "./document.js";
import type { FlowFile, ValidateResponse } from "./types.js";

export type ValidateState = "idle" | "pending" | "fresh" | "stale";

export interface ValidatorEvents {
  onResult?: (response: ValidateResponse) => void;
  onState?: (state: ValidateState) => void;
}

export class LiveValidator {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private sequence = 0;
  private applied = 0;
  state: ValidateState = "idle";

  constructor(
    private readonly post: (flow: FlowFile) => Promise<ValidateResponse>,
    private readonly events: ValidatorEvents = {},
    readonly debounceMs = 150,
  ) {}

  private setState(state: ValidateState): void {
    this.state = state;
    this.events.onState?.(state);
  }

  /** Call on every document mutation; coalesces into one request. */
  schedule(doc: CanvasDocument): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire(doc);
    }, this.debounceMs);
  }

  /** Validate immediately (initial load, explicit refresh). */
  async fire(doc: CanvasDocument): Promise<void> {
    const seq = ++this.sequence;
    this.setState("pending");
    let response: ValidateResponse;
    try {
      response = await this.post(doc.toFlowFile());
    } catch {
      if (seq >= this.applied) {
        this.setState("stale");
      }
      return;
    }
    if (seq < this.applied) {
      return; // a newer response already landed
    }
    this.applied = seq;
    doc.lastValidate = response;
    this.setState("fresh");
    this.events.onResult?.(response);
  }
}
