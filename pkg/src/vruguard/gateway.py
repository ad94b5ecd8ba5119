"""Real-time bridge between a paced engine run and the browser console.

One asyncio pacing loop owns the engine; client sessions talk to it only
through a command queue (applied at the next tick) and broadcast state
frames. Slow clients get latest-state semantics: a queued frame that was
never sent is replaced by the next one, acks are never dropped.
"""

from __future__ import annotations

import asyncio
import contextlib
from collections import deque
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .sim.engine import CommandError, Engine
from .sim.scenario import ScenarioSpec

DEFAULT_STATIC_DIR = Path(__file__).resolve().parents[2] / "frontend" / "dist"


class _Outbox:
    """Per-client outgoing queue; frames are latest-state, acks are kept."""

    def __init__(self) -> None:
        self._items: deque[dict] = deque()
        self._event = asyncio.Event()

    def put_ack(self, msg: dict) -> None:
        self._items.append(msg)
        self._event.set()

    def put_frame(self, msg: dict) -> None:
        self._items = deque(m for m in self._items if m.get("type") != "frame")
        self._items.append(msg)
        self._event.set()

    async def get(self) -> dict:
        while not self._items:
            self._event.clear()
            await self._event.wait()
        return self._items.popleft()


def create_app(
    spec: ScenarioSpec,
    speed: float = 1.0,
    static_dir: Optional[Path] = None,
) -> FastAPI:
    """FastAPI app exposing /ws plus the built console assets, if present."""
    if speed <= 0.0:
        raise ValueError("speed must be > 0")

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.pacer = asyncio.create_task(pacing_loop())
        try:
            yield
        finally:
            app.state.pacer.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await app.state.pacer

    app = FastAPI(title="vruguard hmi gateway", lifespan=lifespan)
    engine = Engine(spec)
    clients: set[_Outbox] = set()
    commands: asyncio.Queue[tuple[dict, _Outbox]] = asyncio.Queue()
    app.state.engine = engine

    async def pacing_loop() -> None:
        tick_s = spec.step_ms / 1000.0 / speed
        while True:
            await asyncio.sleep(tick_s)
            while not commands.empty():
                cmd, outbox = commands.get_nowait()
                try:
                    engine.apply_command(cmd)
                    outbox.put_ack({"type": "ack", "cmd": cmd})
                except (CommandError, KeyError, TypeError, ValueError) as e:
                    outbox.put_ack({"type": "rejected", "cmd": cmd, "reason": str(e)})
            if not engine.paused and not engine.finished:
                engine.step()
            frame = engine.state_frame()
            frame["type"] = "frame"
            for outbox in clients:
                outbox.put_frame(frame)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        outbox = _Outbox()
        clients.add(outbox)
        # Immediate snapshot so a client need not wait for the next tick.
        frame = engine.state_frame()
        frame["type"] = "frame"
        outbox.put_frame(frame)

        async def sender() -> None:
            while True:
                await ws.send_json(await outbox.get())

        send_task = asyncio.create_task(sender())
        try:
            while True:
                msg = await ws.receive_json()
                if isinstance(msg, dict) and msg.get("type") == "cmd":
                    await commands.put((msg, outbox))
                else:
                    outbox.put_ack({"type": "rejected", "cmd": msg, "reason": "expected type=cmd"})
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            clients.discard(outbox)
            with contextlib.suppress(asyncio.CancelledError):
                await send_task

    static = static_dir or DEFAULT_STATIC_DIR
    if static.is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="console")
    return app
