// Pure state container for the console: every socket callback reduces into
// this model; rendering reads from it and never back.

import {
  AlertLevel,
  AlertState,
  LEVEL_ORDER,
  ServerMessage,
  StateFrame,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "online" | "offline";

export interface Toast {
  text: string;
  atMs: number;
}

export interface BannerState {
  level: AlertLevel;
  stationId: number | null;
  ttcS: number | null;
}

export interface ViewModel {
  frame: StateFrame | null;
  status: ConnectionStatus;
  selectedEntityId: string | null;
  banner: BannerState;
  toasts: Toast[];
  badFrames: number;
}

export function initialModel(): ViewModel {
  return {
    frame: null,
    status: "connecting",
    selectedEntityId: null,
    banner: { level: "NONE", stationId: null, ttcS: null },
    toasts: [],
    badFrames: 0,
  };
}

/** The banner shows the single worst alert in the latest frame. */
export function bannerFromAlerts(alerts: AlertState[]): BannerState {
  let worst: AlertState | null = null;
  for (const a of alerts) {
    if (worst === null || LEVEL_ORDER[a.level] > LEVEL_ORDER[worst.level]) {
      worst = a;
    }
  }
  if (worst === null || worst.level === "NONE") {
    return { level: "NONE", stationId: null, ttcS: null };
  }
  return { level: worst.level, stationId: worst.station_id, ttcS: worst.ttc_s };
}

function isFrame(msg: unknown): msg is StateFrame {
  const f = msg as StateFrame;
  return (
    typeof f === "object" &&
    f !== null &&
    f.type === "frame" &&
    typeof f.t_ms === "number" &&
    Array.isArray(f.entities) &&
    Array.isArray(f.alerts)
  );
}

/** Reduce one socket message into the model. Malformed frames are counted
 *  and the last good view is retained. */
export function applyMessage(model: ViewModel, msg: ServerMessage | unknown): ViewModel {
  const m = msg as ServerMessage;
  if (m && (m as { type?: string }).type === "frame") {
    if (!isFrame(m)) {
      return { ...model, badFrames: model.badFrames + 1 };
    }
    const selected =
      model.selectedEntityId !== null &&
      m.entities.some((e) => e.id === model.selectedEntityId)
        ? model.selectedEntityId
        : defaultSelection(m);
    return {
      ...model,
      frame: m,
      status: "online",
      selectedEntityId: selected,
      banner: bannerFromAlerts(m.alerts),
    };
  }
  if (m && m.type === "rejected") {
    const toast = { text: `rejected: ${m.reason}`, atMs: Date.now() };
    return { ...model, toasts: [...model.toasts, toast] };
  }
  if (m && m.type === "ack") {
    return model;
  }
  return { ...model, badFrames: model.badFrames + 1 };
}

export function markOffline(model: ViewModel): ViewModel {
  // view stays frozen on the last good frame
  return { ...model, status: "offline" };
}

export function selectEntity(model: ViewModel, id: string): ViewModel {
  if (model.frame === null || !model.frame.entities.some((e) => e.id === id)) {
    return model;
  }
  return { ...model, selectedEntityId: id };
}

export function expireToasts(model: ViewModel, nowMs: number, ttlMs = 4000): ViewModel {
  const keep = model.toasts.filter((t) => nowMs - t.atMs < ttlMs);
  return keep.length === model.toasts.length ? model : { ...model, toasts: keep };
}

function defaultSelection(frame: StateFrame): string | null {
  const vehicle = frame.entities.find((e) => e.role === "vehicle");
  return vehicle ? vehicle.id : frame.entities[0]?.id ?? null;
}

/** Vehicle-to-pedestrian ground distance in the latest frame, or null. */
export function encounterDistanceM(frame: StateFrame): number | null {
  const vehicle = frame.entities.find((e) => e.role === "vehicle");
  const ped = frame.entities.find((e) => e.role === "pedestrian");
  if (!vehicle || !ped) return null;
  return Math.hypot(vehicle.east_m - ped.east_m, vehicle.north_m - ped.north_m);
}
