/** Editor bootstrap: palette, canvas, config forms, diagnostics, risk gauge,
 * and the test-run panel, all wired to the dev server. */

import { ApiClient } from "./api.js";
import { CanvasView } from "./canvas.js";
import { CanvasDocument } from "./document.js";
import { defaultConfig, formFields, parseField } from "./forms.js";
import { RunPanel, lineageRows } from "./runpanel.js";
import type { FlowFile, NodeSpecJson, ValidateResponse } from "./types.js";
import { LiveValidator } from "./validate.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const specsList = (await api.nodespecs()).specs;
  const specs = new Map<string, NodeSpecJson>(specsList.map((s) => [s.id, s]));

  let doc = new CanvasDocument();
  const svg = el<HTMLElement>("canvas") as unknown as SVGSVGElement;
  let canvas: CanvasView;

  const validator = new LiveValidator(
    (flow: FlowFile) => api.validate(flow),
    {
      onResult: (response) => renderAnalyses(response),
      onState: (state) => {
        const banner = el<HTMLDivElement>("stale-banner");
        banner.hidden = state !== "stale";
      },
    },
  );

  const runPanel = new RunPanel(api, {
    onRecord: () => renderRunFeed(),
    onDone: () => {
      el<HTMLButtonElement>("run-start").disabled = false;
      renderRunFeed();
    },
  });

  function onMutate(): void {
    validator.schedule(doc);
    renderTitle();
  }

  function attachCanvas(): void {
    canvas = new CanvasView(svg, doc, specs, {
      onMutate,
      onSelect: (id) => renderConfigForm(id),
    });
    canvas.render();
  }

  function renderTitle(): void {
    el<HTMLSpanElement>("flow-name").textContent = `${doc.name}${doc.dirty ? " *" : ""}`;
  }

  function renderPalette(): void {
    const palette = el<HTMLUListElement>("palette");
    palette.textContent = "";
    for (const spec of specsList) {
      const item = document.createElement("li");
      item.className = `palette-item role-${spec.role}`;
      item.textContent = spec.id;
      item.title = spec.help;
      item.addEventListener("click", () => {
        const id = doc.freshNodeId(spec.id.replace(/[^a-z0-9]+/g, "_") + "_");
        doc.addNode(id, spec.id, defaultConfig(spec), {
          x: 80 + (doc.nodes.size % 5) * 150,
          y: 80 + (doc.nodes.size % 3) * 110,
        });
        onMutate();
        canvas.render();
      });
      palette.appendChild(item);
    }
  }

  function renderAnalyses(response: ValidateResponse): void {
    canvas.render();
    const list = el<HTMLUListElement>("diagnostics");
    list.textContent = "";
    for (const d of response.diagnostics) {
      const item = document.createElement("li");
      item.className = `diag diag-${d.severity}`;
      item.textContent = `[${d.code}] ${JSON.stringify(d.loc)} ${d.message}`;
      list.appendChild(item);
    }
    if (response.diagnostics.length === 0) {
      const item = document.createElement("li");
      item.className = "diag diag-clean";
      item.textContent = "No findings.";
      list.appendChild(item);
    }
    const gauge = el<HTMLDivElement>("risk-gauge");
    gauge.className = `risk risk-${response.risk.app.band}`;
    gauge.textContent = `risk ${response.risk.app.score}/5 (${response.risk.app.band})`;
    renderConfigForm(doc.selection);
    renderRunSetup();
  }

  function renderConfigForm(nodeId: string | null): void {
    const panel = el<HTMLDivElement>("config-panel");
    panel.textContent = "";
    if (!nodeId || !doc.nodes.has(nodeId)) {
      panel.textContent = "Select a node to configure it.";
      return;
    }
    const node = doc.nodes.get(nodeId)!;
    const spec = specs.get(node.spec);
    if (!spec) return;
    const heading = document.createElement("h3");
    heading.textContent = `${nodeId} (${spec.id})`;
    panel.appendChild(heading);
    const help = document.createElement("p");
    help.className = "help";
    help.textContent = spec.help;
    panel.appendChild(help);
    const config = { ...((node.config as Record<string, unknown>) ?? {}) };
    for (const field of formFields(spec)) {
      const row = document.createElement("label");
      row.className = "field";
      row.textContent = field.name + (field.required ? "" : " (optional)");
      let input: HTMLInputElement | HTMLSelectElement | HTMLTextAreaElement;
      if (field.control === "select") {
        input = document.createElement("select");
        for (const option of field.options ?? []) {
          const opt = document.createElement("option");
          opt.value = option;
          opt.textContent = option;
          input.appendChild(opt);
        }
        input.value = String(config[field.name] ?? field.options?.[0] ?? "");
      } else if (field.control === "code") {
        input = document.createElement("textarea");
        input.value = String(config[field.name] ?? "");
        input.rows = 6;
        input.spellcheck = false;
      } else {
        input = document.createElement("input");
        input.value = config[field.name] === undefined ? "" : String(config[field.name]);
        if (field.control === "number") (input as HTMLInputElement).type = "number";
      }
      input.addEventListener("change", () => {
        try {
          const value = parseField(
            field,
            input instanceof HTMLInputElement && input.type === "checkbox" ? input.checked : input.value,
          );
          const next = { ...((doc.nodes.get(nodeId)!.config as Record<string, unknown>) ?? {}) };
          if (value === "" && !field.required) {
            delete next[field.name];
          } else {
            next[field.name] = value;
          }
          doc.setConfig(nodeId, next);
          onMutate();
        } catch (err) {
          input.setCustomValidity?.(String(err));
        }
      });
      row.appendChild(input);
      panel.appendChild(row);
      if (field.name === "body" && doc.lastValidate) {
        const skeleton = doc.lastValidate.skeletons[nodeId];
        if (skeleton) {
          const button = document.createElement("button");
          button.textContent = "Insert skeleton";
          button.addEventListener("click", () => {
            (input as HTMLTextAreaElement).value = skeleton;
            const next = { ...((doc.nodes.get(nodeId)!.config as Record<string, unknown>) ?? {}) };
            next["body"] = skeleton;
            doc.setConfig(nodeId, next);
            onMutate();
          });
          panel.appendChild(button);
        }
        const inline = document.createElement("ul");
        inline.className = "inline-diags";
        for (const d of doc.lastValidate.diagnostics) {
          if (d.loc.node === nodeId && d.severity === "error") {
            const li = document.createElement("li");
            li.textContent = `${d.loc.line ?? "?"}:${d.loc.col ?? "?"} ${d.message}`;
            inline.appendChild(li);
          }
        }
        panel.appendChild(inline);
      }
    }
    const remove = document.createElement("button");
    remove.textContent = "Delete node";
    remove.className = "danger";
    remove.addEventListener("click", () => {
      doc.removeNode(nodeId);
      onMutate();
      canvas.render();
      renderConfigForm(null);
    });
    panel.appendChild(remove);
  }

  function renderRunSetup(): void {
    const select = el<HTMLSelectElement>("run-profiles");
    select.textContent = "";
    for (const [id, node] of doc.nodes) {
      const spec = specs.get(node.spec);
      if (spec?.role !== "datasource" || spec.profiles.length === 0) continue;
      for (const profile of spec.profiles) {
        const opt = document.createElement("option");
        opt.value = `${id}=${profile.name}`;
        opt.textContent = `${id}: ${profile.name}`;
        select.appendChild(opt);
      }
    }
  }

  function renderRunFeed(): void {
    const outputs = el<HTMLUListElement>("run-outputs");
    outputs.textContent = "";
    for (const nodeId of runPanel.outputNodes(doc, specs)) {
      const feed = runPanel.outputFeed(nodeId);
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = `${nodeId} (${feed.length} received)`;
      link.addEventListener("click", (e) => {
        e.preventDefault();
        const latest = feed[0];
        if (latest) void showLineage(latest.msg);
      });
      item.appendChild(link);
      outputs.appendChild(item);
    }
    const slider = el<HTMLInputElement>("scrub");
    slider.max = String(runPanel.maxTime());
    el<HTMLSpanElement>("run-count").textContent = `${runPanel.records.length} records`;
  }

  async function showLineage(message: number): Promise<void> {
    const tree = await runPanel.lineage(message);
    const pane = el<HTMLPreElement>("lineage");
    pane.textContent = lineageRows(tree)
      .map(
        ({ depth, node }) =>
          `${"  ".repeat(depth)}msg ${node.msg} <- ${node.node}:${node.port} @ ${node.t} ${JSON.stringify(node.payload)}`,
      )
      .join("\n");
  }

  el<HTMLButtonElement>("run-start").addEventListener("click", () => {
    const seed = parseInt(el<HTMLInputElement>("run-seed").value || "0", 10);
    const duration = parseInt(el<HTMLInputElement>("run-duration").value || "5000", 10);
    const profiles: Record<string, string> = {};
    for (const option of el<HTMLSelectElement>("run-profiles").selectedOptions) {
      const [node, name] = option.value.split("=", 2);
      if (node && name) profiles[node] = name;
    }
    el<HTMLButtonElement>("run-start").disabled = true;
    void runPanel.start(doc, seed, duration, profiles).catch((err) => {
      el<HTMLButtonElement>("run-start").disabled = false;
      el<HTMLPreElement>("lineage").textContent = String(err);
    });
  });

  el<HTMLButtonElement>("run-stop").addEventListener("click", () => {
    void runPanel.stopIfRunning();
    el<HTMLButtonElement>("run-start").disabled = false;
  });

  el<HTMLInputElement>("scrub").addEventListener("change", async (e) => {
    const to = parseInt((e.target as HTMLInputElement).value, 10);
    const node = doc.selection;
    if (!node || !runPanel.sessionId) return;
    const { records } = await runPanel.scrub(node, 0, to);
    el<HTMLPreElement>("lineage").textContent = records
      .map((r) => `${r.kind} msg ${r.msg} @ ${r.t} ${JSON.stringify(r.payload)}`)
      .join("\n");
  });

  el<HTMLButtonElement>("download").addEventListener("click", () => {
    const blob = new Blob([doc.toFileText()], { type: "application/json" });
    const url = URL.createObjectURL(blob);
    const link = document.createElement("a");
    link.href = url;
    link.download = `${doc.flowId || "flow"}.flow.json`;
    link.click();
    URL.revokeObjectURL(url);
    doc.dirty = false;
    renderTitle();
  });

  el<HTMLInputElement>("upload").addEventListener("change", async (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (!file) return;
    const parsed = JSON.parse(await file.text()) as FlowFile;
    doc = CanvasDocument.fromFlowFile(parsed);
    attachCanvas();
    renderConfigForm(null);
    await validator.fire(doc);
    renderTitle();
    renderRunSetup();
  });

  document.addEventListener("keydown", (e) => {
    if (e.key === "Delete" && doc.selection && doc.nodes.has(doc.selection)) {
      doc.removeNode(doc.selection);
      onMutate();
      canvas.render();
      renderConfigForm(null);
    }
  });

  renderPalette();
  attachCanvas();
  renderTitle();
  await validator.fire(doc);
}

void boot();
