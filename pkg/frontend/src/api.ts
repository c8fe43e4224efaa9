/** Thin client for the dev-server endpoints. The fetch implementation is
 * injected so tests can substitute recorded responses. */

import type {
  FlowFile,
  LineageJson,
  NodeSpecJson,
  ProvRecordJson,
  ValidateResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface StreamHandle {
  close(): void;
}

export type StreamFactory = (
  url: string,
  onRecord: (record: ProvRecordJson) => void,
  onClose: () => void,
) => StreamHandle;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetcher: FetchLike = (url, init) => fetch(url, init),
    readonly openStream: StreamFactory = defaultStreamFactory,
  ) {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await this.fetcher(this.base + url, init);
    if (!response.ok) {
      const body = await response.text();
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  nodespecs(): Promise<{ specs: NodeSpecJson[] }> {
    return this.json("/api/nodespecs");
  }

  validate(flow: FlowFile): Promise<ValidateResponse> {
    return this.json("/api/flows/validate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(flow),
    });
  }

  createSession(body: {
    flow: FlowFile;
    seed: number;
    duration: number;
    profiles?: Record<string, string>;
  }): Promise<{ id: string }> {
    return this.json("/api/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  stopSession(id: string): Promise<{ stopped: boolean }> {
    return this.json(`/api/sessions/${id}/stop`, { method: "POST" });
  }

  window(id: string, node: string, from: number, to: number): Promise<{ records: ProvRecordJson[] }> {
    const params = new URLSearchParams({ node, from: String(from), to: String(to) });
    return this.json(`/api/sessions/${id}/provenance?${params}`);
  }

  lineage(id: string, message: number): Promise<LineageJson> {
    return this.json(`/api/sessions/${id}/lineage?message=${message}`);
  }

  streamUrl(id: string): string {
    const base = this.base || (typeof location !== "undefined" ? location.origin : "");
    return base.replace(/^http/, "ws") + `/api/sessions/${id}/stream`;
  }
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    body: string,
  ) {
    super(`API error ${status}: ${body}`);
  }
}

function defaultStreamFactory(
  url: string,
  onRecord: (record: ProvRecordJson) => void,
  onClose: () => void,
): StreamHandle {
  const socket = new WebSocket(url);
  socket.onmessage = (event) => onRecord(JSON.parse(String(event.data)) as ProvRecordJson);
  socket.onclose = () => onClose();
  socket.onerror = () => onClose();
  return { close: () => socket.close() };
}
