// Browser entry point: wires the controls to the service client and
// paints display lists onto the canvas.

import { ApiClient } from "./api.js";
import { Debouncer, ParamEditor } from "./controls.js";
import { LayerController } from "./layers.js";
import { LayerView, type DisplayList } from "./render.js";
import {
  LAYERS,
  clampMerge,
  clampTau,
  defaultViewState,
  normalizeSimplex,
  type LayerKind,
  type ViewState,
} from "./state.js";
import type { CellInfo, SessionParams } from "./types.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service")
  ?? "http://127.0.0.1:8757";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function toast(message: string): void {
  const box = el<HTMLDivElement>("toast");
  box.textContent = message;
  box.classList.add("visible");
  setTimeout(() => box.classList.remove("visible"), 4000);
}

function paint(ctx: CanvasRenderingContext2D, display: DisplayList): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "#f3f1ec"; // neutral base map
  ctx.fillRect(0, 0, width, height);

  for (const rect of display.rects) {
    ctx.fillStyle = rect.color;
    ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
    if (rect.w > 6) {
      ctx.strokeStyle = "rgba(255,255,255,0.35)";
      ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
    }
  }

  for (const marker of display.markers) {
    ctx.beginPath();
    ctx.arc(marker.x, marker.y, marker.selected ? 7 : marker.small ? 3.5 : 5,
            0, 2 * Math.PI);
    ctx.fillStyle = marker.selected ? "#d1352b"
      : marker.small ? "#ffffff" : "#222222";
    ctx.fill();
    ctx.strokeStyle = "#222222";
    ctx.stroke();
    if (marker.arrow) {
      ctx.beginPath();
      ctx.moveTo(marker.x, marker.y);
      ctx.lineTo(marker.arrow[0], marker.arrow[1]);
      ctx.strokeStyle = "#d1352b";
      ctx.lineWidth = 2.5;
      ctx.stroke();
      ctx.lineWidth = 1;
    }
  }

  const label = el<HTMLDivElement>("layer-label");
  label.textContent = display.stale
    ? `${display.label} (stale: ${display.staleReason ?? "service unreachable"})`
    : display.empty
      ? `${display.label} — empty result`
      : display.label;
  label.classList.toggle("stale", display.stale);

  const legend = el<HTMLDivElement>("legend");
  legend.replaceChildren();
  for (const entry of display.legend) {
    const row = document.createElement("div");
    row.className = "legend-row";
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = entry.color;
    const text = document.createElement("span");
    text.textContent = Number.isInteger(entry.value) && display.legend.length < 12
      ? String(entry.value)
      : entry.value.toPrecision(3);
    row.append(swatch, text);
    legend.append(row);
  }
}

async function boot(): Promise<void> {
  const api = new ApiClient(SERVICE_URL);
  const canvas = el<HTMLCanvasElement>("map");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");

  const [cellsPayload, paramsPayload] = await Promise.all([
    api.cells(), api.params(),
  ]);
  const cells: CellInfo[] = cellsPayload.cells;
  const state: ViewState = defaultViewState();
  state.selectedCell = cells[0]?.id ?? null;

  const view = new LayerView(canvas.width, canvas.height);
  const controller = new LayerController(api, view, cells, toast);

  const refresh = async () => {
    const display = await controller.refresh(state);
    if (display) paint(ctx, display);
  };

  // --- layer / cell / module selectors ----------------------------------
  const layerSelect = el<HTMLSelectElement>("layer");
  for (const layer of LAYERS) {
    layerSelect.add(new Option(layer.replace("_", " + "), layer));
  }
  layerSelect.value = state.layer;
  layerSelect.onchange = () => {
    state.layer = layerSelect.value as LayerKind;
    void refresh();
  };

  const cellSelect = el<HTMLSelectElement>("cell");
  for (const cell of cells) {
    cellSelect.add(new Option(cell.id, cell.id));
  }
  if (state.selectedCell) cellSelect.value = state.selectedCell;
  cellSelect.onchange = () => {
    state.selectedCell = cellSelect.value;
    void refresh();
  };

  const priorSelect = el<HTMLSelectElement>("prior");
  priorSelect.onchange = () => {
    state.priorKind = priorSelect.value as ViewState["priorKind"];
    void refresh();
  };
  const likelihoodSelect = el<HTMLSelectElement>("likelihood");
  likelihoodSelect.onchange = () => {
    state.likelihoodKind = likelihoodSelect.value as ViewState["likelihoodKind"];
    void refresh();
  };
  const tessSelect = el<HTMLSelectElement>("tessellation-kind");
  tessSelect.onchange = () => {
    state.tessellationKind = tessSelect.value as ViewState["tessellationKind"];
    void refresh();
  };

  // --- mixture weight sliders (simplex-constrained) ----------------------
  const piSliders = [0, 1, 2].map((i) => el<HTMLInputElement>(`pi-${i}`));
  const piLabels = [0, 1, 2].map((i) => el<HTMLSpanElement>(`pi-${i}-value`));
  const showPi = () => {
    for (let i = 0; i < 3; i++) {
      piSliders[i]!.value = String(state.pi[i]);
      piLabels[i]!.textContent = state.pi[i]!.toFixed(2);
    }
  };
  const piDebounce = new Debouncer(150);
  piSliders.forEach((slider, i) => {
    slider.oninput = () => {
      state.pi = normalizeSimplex(state.pi, i, Number(slider.value));
      showPi();
      piDebounce.schedule(() => void refresh());
    };
  });
  showPi();

  // --- Timing Advance inputs ---------------------------------------------
  const tauInput = el<HTMLInputElement>("tau");
  const bInput = el<HTMLInputElement>("b");
  tauInput.value = String(state.tau);
  bInput.value = String(state.b);
  tauInput.onchange = () => {
    state.tau = clampTau(Number(tauInput.value));
    tauInput.value = String(state.tau);
    void refresh();
  };
  bInput.onchange = () => {
    state.b = clampMerge(Number(bInput.value));
    bInput.value = String(state.b);
    void refresh();
  };

  // --- model parameter sliders -------------------------------------------
  const paramFields: (keyof SessionParams)[] =
    ["s_mid", "s_steep", "min_dominance", "gamma_default"];
  const paramInputs = new Map(paramFields.map(
    (f) => [f, el<HTMLInputElement>(`param-${f}`)]));
  const showParams = (p: SessionParams) => {
    for (const f of paramFields) {
      const input = paramInputs.get(f)!;
      input.value = String(p[f]);
      el<HTMLSpanElement>(`param-${f}-value`).textContent = String(p[f]);
    }
  };
  const editor = new ParamEditor(api, paramsPayload.params, {
    onAccepted: (params, invalidated) => {
      showParams(params);
      if (invalidated.length > 0) void refresh();
    },
    onRejected: (field, message, reverted) => {
      showParams(reverted);
      toast(`${field}: ${message}`);
    },
  });
  showParams(paramsPayload.params);
  for (const f of paramFields) {
    const input = paramInputs.get(f)!;
    input.oninput = () => {
      el<HTMLSpanElement>(`param-${f}-value`).textContent = input.value;
      editor.stage(f, Number(input.value));
    };
  }

  await refresh();
}

boot().catch((err) => {
  toast(`failed to start: ${err}`);
  console.error(err);
});
