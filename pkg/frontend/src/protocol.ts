// JSON protocol spoken over the gateway websocket.

export type AlertLevel = "NONE" | "INFORM" | "WARN" | "BRAKE";

export const LEVEL_ORDER: Record<AlertLevel, number> = {
  NONE: 0,
  INFORM: 1,
  WARN: 2,
  BRAKE: 3,
};

export interface EntityState {
  id: string;
  role: "vehicle" | "pedestrian" | "rsu";
  lat_deg: number;
  lon_deg: number;
  east_m: number;
  north_m: number;
  heading_deg: number;
  speed_mps: number;
}

export interface TrackState {
  obu_id: string;
  station_id: number;
  east_m: number;
  north_m: number;
  speed_mps: number;
  heading_deg: number;
  source: "PSM" | "DENM";
  age_ms: number;
}

export interface AlertState {
  obu_id: string;
  station_id: number;
  level: AlertLevel;
  ttc_s: number | null;
  distance_m: number;
}

export interface Occluder {
  east_min_m: number;
  east_max_m: number;
  north_min_m: number;
  north_max_m: number;
}

export interface StateFrame {
  type: "frame";
  t_ms: number;
  paused: boolean;
  finished: boolean;
  entities: EntityState[];
  tracks: TrackState[];
  alerts: AlertState[];
  occluders: Occluder[];
  metrics: { events: number; malformed: number; duplicates: number };
}

export interface Ack {
  type: "ack";
  cmd: Record<string, unknown>;
}

export interface Rejection {
  type: "rejected";
  cmd: Record<string, unknown>;
  reason: string;
}

export type ServerMessage = StateFrame | Ack | Rejection;

export type ControlCommand =
  | { type: "cmd"; cmd: "pause" }
  | { type: "cmd"; cmd: "resume" }
  | { type: "cmd"; cmd: "set_vehicle_speed"; id: string; mps: number }
  | { type: "cmd"; cmd: "set_entity_target"; id: string; lat_deg: number; lon_deg: number }
  | { type: "cmd"; cmd: "toggle_gnss_fallback"; id: string; on: boolean };
