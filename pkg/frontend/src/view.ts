// Canvas plan view plus the DOM control strip. Pure rendering: reads the
// view model, returns nothing, mutates only its own DOM subtree.

import { AlertLevel, EntityState, StateFrame } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

const BANNER_COLORS: Record<AlertLevel, string> = {
  NONE: "#2d3436",
  INFORM: "#0984e3",
  WARN: "#e17055",
  BRAKE: "#d63031",
};

export interface ViewCallbacks {
  onSelectEntity: (id: string) => void;
  onSpeedChange: (id: string, mps: number) => void;
  onMapClick: (id: string, eastM: number, northM: number) => void;
  onFallbackToggle: (id: string, on: boolean) => void;
  onPauseToggle: (paused: boolean) => void;
}

interface Scale {
  originEast: number;
  originNorth: number;
  pxPerM: number;
}

export class ConsoleView {
  private canvas: HTMLCanvasElement;
  private banner: HTMLDivElement;
  private status: HTMLSpanElement;
  private clock: HTMLSpanElement;
  private select: HTMLSelectElement;
  private slider: HTMLInputElement;
  private sliderLabel: HTMLSpanElement;
  private fallback: HTMLInputElement;
  private pauseBtn: HTMLButtonElement;
  private toasts: HTMLDivElement;
  private callbacks: ViewCallbacks;
  private scale: Scale = { originEast: 0, originNorth: 0, pxPerM: 1 };
  private lastModel: ViewModel | null = null;

  constructor(root: HTMLElement, callbacks: ViewCallbacks) {
    this.callbacks = callbacks;
    root.innerHTML = `
      <div id="banner">no alert</div>
      <div id="bar">
        <span id="status">connecting</span>
        <span id="clock">t=0.0s</span>
        <button id="pause">pause</button>
        <label>entity <select id="entity"></select></label>
        <label>speed <input id="speed" type="range" min="0" max="25" step="0.1" value="0">
          <span id="speedval">0.0 m/s</span></label>
        <label><input id="fallback" type="checkbox"> gnss fallback</label>
      </div>
      <canvas id="map" width="900" height="560"></canvas>
      <div id="toasts"></div>
    `;
    this.canvas = root.querySelector("#map") as HTMLCanvasElement;
    this.banner = root.querySelector("#banner") as HTMLDivElement;
    this.status = root.querySelector("#status") as HTMLSpanElement;
    this.clock = root.querySelector("#clock") as HTMLSpanElement;
    this.select = root.querySelector("#entity") as HTMLSelectElement;
    this.slider = root.querySelector("#speed") as HTMLInputElement;
    this.sliderLabel = root.querySelector("#speedval") as HTMLSpanElement;
    this.fallback = root.querySelector("#fallback") as HTMLInputElement;
    this.pauseBtn = root.querySelector("#pause") as HTMLButtonElement;
    this.toasts = root.querySelector("#toasts") as HTMLDivElement;

    this.select.addEventListener("change", () =>
      this.callbacks.onSelectEntity(this.select.value),
    );
    this.slider.addEventListener("change", () => {
      const id = this.select.value;
      if (id) this.callbacks.onSpeedChange(id, Number(this.slider.value));
    });
    this.fallback.addEventListener("change", () => {
      const id = this.select.value;
      if (id) this.callbacks.onFallbackToggle(id, this.fallback.checked);
    });
    this.pauseBtn.addEventListener("click", () => {
      const paused = this.lastModel?.frame?.paused ?? false;
      this.callbacks.onPauseToggle(!paused);
    });
    this.canvas.addEventListener("click", (ev) => {
      const id = this.select.value;
      if (!id) return;
      const rect = this.canvas.getBoundingClientRect();
      const { east, north } = this.pxToEnu(ev.clientX - rect.left, ev.clientY - rect.top);
      this.callbacks.onMapClick(id, east, north);
    });
  }

  render(model: ViewModel): void {
    this.lastModel = model;
    this.status.textContent = model.status;
    this.status.className = model.status;
    const frame = model.frame;
    this.banner.style.background = BANNER_COLORS[model.banner.level];
    this.banner.textContent =
      model.banner.level === "NONE"
        ? "no alert"
        : `${model.banner.level} station ${model.banner.stationId}` +
          (model.banner.ttcS !== null ? ` ttc ${model.banner.ttcS.toFixed(1)}s` : "");
    this.toasts.innerHTML = model.toasts
      .map((t) => `<div class="toast">${t.text.replace(/</g, "&lt;")}</div>`)
      .join("");
    if (!frame) return;
    this.clock.textContent = `t=${(frame.t_ms / 1000).toFixed(1)}s`;
    this.pauseBtn.textContent = frame.paused ? "resume" : "pause";
    this.syncControls(model, frame);
    this.draw(frame);
  }

  private syncControls(model: ViewModel, frame: StateFrame): void {
    const movable = frame.entities.filter((e) => e.role !== "rsu");
    const ids = movable.map((e) => e.id);
    if (this.select.options.length !== ids.length) {
      this.select.innerHTML = ids
        .map((id) => `<option value="${id}">${id}</option>`)
        .join("");
    }
    if (model.selectedEntityId && this.select.value !== model.selectedEntityId) {
      this.select.value = model.selectedEntityId;
    }
    const sel = movable.find((e) => e.id === this.select.value);
    if (sel && document.activeElement !== this.slider) {
      this.slider.value = String(sel.speed_mps);
      this.sliderLabel.textContent = `${sel.speed_mps.toFixed(1)} m/s`;
    }
  }

  private fitScale(frame: StateFrame): void {
    const xs = frame.entities.map((e) => e.east_m);
    const ys = frame.entities.map((e) => e.north_m);
    const pad = 40;
    const minX = Math.min(...xs, -50), maxX = Math.max(...xs, 50);
    const minY = Math.min(...ys, -50), maxY = Math.max(...ys, 50);
    const px = (this.canvas.width - 2 * pad) / Math.max(maxX - minX, 1);
    const py = (this.canvas.height - 2 * pad) / Math.max(maxY - minY, 1);
    this.scale = {
      originEast: (minX + maxX) / 2,
      originNorth: (minY + maxY) / 2,
      pxPerM: Math.min(px, py),
    };
  }

  private toPx(east: number, north: number): [number, number] {
    const s = this.scale;
    return [
      this.canvas.width / 2 + (east - s.originEast) * s.pxPerM,
      this.canvas.height / 2 - (north - s.originNorth) * s.pxPerM,
    ];
  }

  private pxToEnu(x: number, y: number): { east: number; north: number } {
    const s = this.scale;
    return {
      east: s.originEast + (x - this.canvas.width / 2) / s.pxPerM,
      north: s.originNorth - (y - this.canvas.height / 2) / s.pxPerM,
    };
  }

  private draw(frame: StateFrame): void {
    this.fitScale(frame);
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.fillStyle = "#1e272e";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);

    ctx.fillStyle = "#485460";
    for (const o of frame.occluders) {
      const [x0, y0] = this.toPx(o.east_min_m, o.north_max_m);
      const [x1, y1] = this.toPx(o.east_max_m, o.north_min_m);
      ctx.fillRect(x0, y0, x1 - x0, y1 - y0);
    }

    for (const t of frame.tracks) {
      const [x, y] = this.toPx(t.east_m, t.north_m);
      ctx.strokeStyle = t.source === "DENM" ? "#fdcb6e" : "#81ecec";
      ctx.beginPath();
      ctx.arc(x, y, 7, 0, 2 * Math.PI);
      ctx.stroke();
    }

    for (const e of frame.entities) {
      this.drawEntity(ctx, e);
    }
  }

  private drawEntity(ctx: CanvasRenderingContext2D, e: EntityState): void {
    const [x, y] = this.toPx(e.east_m, e.north_m);
    ctx.save();
    ctx.translate(x, y);
    if (e.role === "rsu") {
      ctx.fillStyle = "#a29bfe";
      ctx.beginPath();
      ctx.moveTo(0, -8);
      ctx.lineTo(7, 6);
      ctx.lineTo(-7, 6);
      ctx.closePath();
      ctx.fill();
    } else if (e.role === "vehicle") {
      ctx.rotate((e.heading_deg * Math.PI) / 180);
      ctx.fillStyle = "#74b9ff";
      ctx.fillRect(-5, -9, 10, 18);
    } else {
      ctx.fillStyle = "#55efc4";
      ctx.beginPath();
      ctx.arc(0, 0, 5, 0, 2 * Math.PI);
      ctx.fill();
    }
    ctx.restore();
    ctx.fillStyle = "#dfe6e9";
    ctx.font = "11px sans-serif";
    ctx.fillText(e.id, x + 9, y - 9);
  }
}
