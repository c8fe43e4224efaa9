/** Wire formats spoken by the dev server; these mirror the flow file,
 * nodespec, diagnostics, label map, risk report, and provenance schemas. */

export interface FlowFile {
  id: string;
  name: string;
  version: string;
  meta: { author: string; description: string };
  nodes: { id: string; spec: string; config: unknown }[];
  wires: WireRef[];
}

export interface WireRef {
  from: [string, string];
  to: [string, string];
}

export interface SchemaJson {
  kind: string;
  min?: number;
  max?: number;
  enum?: string[];
  items?: SchemaJson;
  minLen?: number;
  maxLen?: number;
  properties?: Record<string, SchemaJson>;
  required?: string[];
  arms?: SchemaJson[];
}

export type Category = "identifier" | "sensitive" | "personal";

export interface AtomJson {
  cat: Category;
  tag: string;
  derivation: "primary" | "secondary";
  conditions?: unknown[];
}

export interface LabelledWire {
  from: [string, string];
  to: [string, string];
  atoms: AtomJson[];
}

export interface DiagnosticJson {
  severity: "error" | "warning" | "info";
  code: string;
  loc: { wire?: [string, string, string, string]; node?: string; port?: string; line?: number; col?: number };
  message: string;
}

export interface RiskReport {
  app: { score: number; band: "low" | "medium" | "high" };
  nodes: {
    id: string;
    score: number;
    spectrum: [number, number];
    factors: Record<string, boolean>;
  }[];
}

export interface ValidateResponse {
  diagnostics: DiagnosticJson[];
  labels: { wires: LabelledWire[] };
  risk: RiskReport;
  signatures: Record<string, { input: SchemaJson | null; output: SchemaJson | null }>;
  skeletons: Record<string, string>;
}

export interface PortJson {
  name: string;
  resolver: Record<string, unknown>;
  transfer?: unknown;
}

export interface NodeSpecJson {
  id: string;
  role: "datasource" | "processor" | "output";
  config: SchemaJson;
  inputs: PortJson[];
  outputs: PortJson[];
  risk: [number, number];
  flags: { insecure_hardware: boolean; exports_data: boolean; actuates: boolean };
  profiles: { name: string; description: string; ranges: Record<string, unknown> }[];
  help: string;
  granularity?: number[];
}

export interface ProvRecordJson {
  kind: "emit" | "consume" | "fault";
  msg: number;
  node: string;
  port: string;
  t: number;
  payload: unknown;
  parents: number[];
}

export interface LineageJson {
  msg: number;
  node: string;
  port: string;
  t: number;
  payload: unknown;
  parents: LineageJson[];
}

export function wireKey(from: [string, string], to: [string, string]): string {
  return `${from[0]}:${from[1]}->${to[0]}:${to[1]}`;
}
