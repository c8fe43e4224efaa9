/** Config forms generated from a node spec's config schema. Only the
 * closed-world schema shapes that appear in config schemas are mapped:
 * enum strings become selects, bounded numerics become number inputs,
 * string arrays become token lists, and the function body gets a code box. */

import type { NodeSpecJson, SchemaJson } from "./types.js";

export interface FieldSpec {
  name: string;
  required: boolean;
  control: "select" | "number" | "text" | "code" | "tokens" | "checkbox";
  options?: string[];
  min?: number;
  max?: number;
  integer?: boolean;
  help?: string;
}

export function formFields(spec: NodeSpecJson): FieldSpec[] {
  const schema = spec.config;
  if (schema.kind !== "object" || !schema.properties) {
    return [];
  }
  const required = new Set(schema.required ?? []);
  const fields: FieldSpec[] = [];
  for (const name of Object.keys(schema.properties).sort()) {
    const sub = schema.properties[name]!;
    fields.push(fieldFor(name, sub, required.has(name), spec));
  }
  return fields;
}

function fieldFor(name: string, schema: SchemaJson, required: boolean, spec: NodeSpecJson): FieldSpec {
  if (schema.kind === "string" && schema.enum) {
    return { name, required, control: "select", options: [...schema.enum] };
  }
  if (schema.kind === "string") {
    return { name, required, control: name === "body" ? "code" : "text" };
  }
  if (schema.kind === "integer" || schema.kind === "number") {
    const field: FieldSpec = {
      name,
      required,
      control: "number",
      integer: schema.kind === "integer",
    };
    if (schema.min !== undefined) field.min = schema.min;
    if (schema.max !== undefined) field.max = schema.max;
    if (name === "period" && spec.granularity) {
      return { ...field, control: "select", options: spec.granularity.map(String) };
    }
    return field;
  }
  if (schema.kind === "boolean") {
    return { name, required, control: "checkbox" };
  }
  if (schema.kind === "array" && schema.items?.kind === "string") {
    const field: FieldSpec = { name, required, control: "tokens" };
    if (schema.items.enum) field.options = [...schema.items.enum];
    return field;
  }
  return { name, required, control: "text", help: `JSON value of kind ${schema.kind}` };
}

/** Parse one raw form value back into the config's typed representation. */
export function parseField(field: FieldSpec, raw: string | boolean): unknown {
  if (field.control === "checkbox") {
    return Boolean(raw);
  }
  const text = String(raw);
  if (field.control === "number" || (field.control === "select" && field.integer !== undefined)) {
    const value = field.integer ? parseInt(text, 10) : parseFloat(text);
    if (Number.isNaN(value)) {
      throw new Error(`${field.name} must be a number`);
    }
    return value;
  }
  if (field.control === "tokens") {
    return text
      .split(",")
      .map((s) => s.trim())
      .filter((s) => s.length > 0);
  }
  return text;
}

export function defaultConfig(spec: NodeSpecJson): Record<string, unknown> {
  const config: Record<string, unknown> = {};
  const schema = spec.config;
  if (schema.kind !== "object" || !schema.properties) {
    return config;
  }
  for (const name of schema.required ?? []) {
    const sub = schema.properties[name];
    if (!sub) continue;
    if (sub.kind === "string" && sub.enum) {
      config[name] = sub.enum[0];
    } else if (sub.kind === "string") {
      config[name] = name === "body" ? "false" : "";
    } else if (sub.kind === "integer" || sub.kind === "number") {
      if (name === "period" && spec.granularity?.length) {
        config[name] = spec.granularity[Math.floor(spec.granularity.length / 2)];
      } else {
        config[name] = sub.min ?? 0;
      }
    } else if (sub.kind === "boolean") {
      config[name] = false;
    } else if (sub.kind === "array") {
      config[name] = [];
    } else {
      config[name] = null;
    }
  }
  return config;
}
