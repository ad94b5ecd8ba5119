// Socket wiring: one websocket, one view model, one renderer.

import { ControlCommand } from "./protocol.js";
import { ConsoleView } from "./view.js";
import {
  applyMessage,
  expireToasts,
  initialModel,
  markOffline,
  selectEntity,
} from "./viewmodel.js";

// Geographic reconstruction of a map click: the frame carries both ENU and
// lat/lon per entity, which pins down the local meters-per-degree factors.
function enuToGeo(
  eastM: number,
  northM: number,
  refLat: number,
  refLon: number,
  refEast: number,
  refNorth: number,
): { lat_deg: number; lon_deg: number } {
  const mPerDegLat = 111_194.93;
  const mPerDegLon = mPerDegLat * Math.cos((refLat * Math.PI) / 180);
  return {
    lat_deg: refLat + (northM - refNorth) / mPerDegLat,
    lon_deg: refLon + (eastM - refEast) / mPerDegLon,
  };
}

function start(): void {
  const root = document.getElementById("app");
  if (!root) return;
  let model = initialModel();

  const url = `ws://${location.host}/ws`;
  const socket = new WebSocket(url);

  const send = (cmd: ControlCommand) => {
    if (socket.readyState === WebSocket.OPEN) socket.send(JSON.stringify(cmd));
  };

  const view = new ConsoleView(root, {
    onSelectEntity: (id) => {
      model = selectEntity(model, id);
      view.render(model);
    },
    onSpeedChange: (id, mps) => send({ type: "cmd", cmd: "set_vehicle_speed", id, mps }),
    onMapClick: (id, eastM, northM) => {
      const ref = model.frame?.entities[0];
      if (!ref) return;
      const geo = enuToGeo(eastM, northM, ref.lat_deg, ref.lon_deg, ref.east_m, ref.north_m);
      send({ type: "cmd", cmd: "set_entity_target", id, ...geo });
    },
    onFallbackToggle: (id, on) => send({ type: "cmd", cmd: "toggle_gnss_fallback", id, on }),
    onPauseToggle: (paused) => send({ type: "cmd", cmd: paused ? "pause" : "resume" }),
  });
  view.render(model);

  socket.addEventListener("message", (ev) => {
    let parsed: unknown;
    try {
      parsed = JSON.parse(ev.data as string);
    } catch {
      parsed = null;
    }
    model = applyMessage(model, parsed);
    view.render(model);
  });
  socket.addEventListener("close", () => {
    model = markOffline(model);
    view.render(model);
  });
  socket.addEventListener("error", () => {
    model = markOffline(model);
    view.render(model);
  });

  setInterval(() => {
    model = expireToasts(model, Date.now());
    view.render(model);
  }, 1000);
}

start();
