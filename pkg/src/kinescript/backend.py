"""Reference planner as a network backend.

Listens on two local stream sockets: a command channel (bridge writes one
command frame per line) and a telemetry channel (every connected client
receives one telemetry frame per 20 ms tick).  The integration loop is
drift-corrected and stamps telemetry from its tick counter, so timestamps
stay on the exact 20 ms grid even when the wall clock jitters.

Runs in-process for the default `serve` wiring, or standalone via
`kinescript backend` for a genuine multi-process deployment; an external
planner implementing the same two channels is a drop-in replacement.
"""

from __future__ import annotations

import asyncio
import logging

from . import planner
from .bridge import DEFAULT_MODE
from .errors import MalformedFrame, InvalidCommand, PortInUse, UnknownMode
from .protocol import decode_command, encode_telemetry, halt_command
from .registry import Registry, registry

log = logging.getLogger(__name__)


def parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


class BackendServer:
    """The reference kinematic planner behind the wire protocol."""

    def __init__(self, command_addr: str = "127.0.0.1:0",
                 telemetry_addr: str = "127.0.0.1:0",
                 reg: Registry | None = None,
                 limits: planner.RateLimits = planner.DEFAULT_LIMITS,
                 name: str = "reference-kinematic"):
        self.reg = reg or registry()
        self.limits = limits
        self.name = name
        self._command_addr = parse_addr(command_addr)
        self._telemetry_addr = parse_addr(telemetry_addr)
        self._latest = planner.clamp_command(
            halt_command(0, DEFAULT_MODE, (1.0, 0.0),
                         self.reg.mode(DEFAULT_MODE).default_height), self.reg)
        self._writers: set[asyncio.StreamWriter] = set()
        self._servers: list[asyncio.base_events.Server] = []
        self._task: asyncio.Task | None = None
        self.command_port = 0
        self.telemetry_port = 0

    async def start(self) -> "BackendServer":
        try:
            cmd_srv = await asyncio.start_server(self._handle_commands, *self._command_addr)
            tel_srv = await asyncio.start_server(self._handle_telemetry_client, *self._telemetry_addr)
        except OSError as e:
            raise PortInUse(f"backend cannot bind {self._command_addr} / {self._telemetry_addr}: {e}") from e
        self._servers = [cmd_srv, tel_srv]
        self.command_port = cmd_srv.sockets[0].getsockname()[1]
        self.telemetry_port = tel_srv.sockets[0].getsockname()[1]
        self._task = asyncio.create_task(self._loop())
        log.info("backend listening: commands :%d telemetry :%d",
                 self.command_port, self.telemetry_port)
        return self

    async def stop(self) -> None:
        if self._task:
            self._task.cancel()
            try:
                await self._task
            except asyncio.CancelledError:
                pass
        for srv in self._servers:
            srv.close()
            await srv.wait_closed()
        for w in list(self._writers):
            w.close()
        self._writers.clear()

    async def _handle_commands(self, reader: asyncio.StreamReader,
                               writer: asyncio.StreamWriter) -> None:
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                try:
                    cmd = decode_command(line)
                    self._latest = planner.clamp_command(cmd, self.reg)
                except (MalformedFrame, InvalidCommand, UnknownMode) as e:
                    log.warning("dropping bad command frame: %s", e)
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            writer.close()

    async def _handle_telemetry_client(self, reader: asyncio.StreamReader,
                                       writer: asyncio.StreamWriter) -> None:
        self._writers.add(writer)
        try:
            await reader.read()  # client never sends; returns on disconnect
        except ConnectionResetError:
            pass
        finally:
            self._writers.discard(writer)
            writer.close()

    async def _loop(self) -> None:
        loop = asyncio.get_running_loop()
        state = planner.initial_state(DEFAULT_MODE, self.reg)
        next_t = loop.time()
        while True:
            state, sample = planner.step(state, self._latest, planner.DT,
                                         self.reg, self.limits)
            frame = encode_telemetry(sample)
            for w in list(self._writers):
                try:
                    w.write(frame)
                except (ConnectionResetError, RuntimeError):
                    self._writers.discard(w)
            next_t += planner.DT
            delay = next_t - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            elif delay < -1.0:
                next_t = loop.time()  # fell far behind; resync instead of bursting


async def run_standalone(command_addr: str, telemetry_addr: str,
                         reg: Registry | None = None) -> None:
    """Run the backend until cancelled (the `kinescript backend` entry)."""
    server = await BackendServer(command_addr, telemetry_addr, reg=reg).start()
    print(f"reference backend: commands {server.command_port}, "
          f"telemetry {server.telemetry_port}", flush=True)
    try:
        await asyncio.Event().wait()
    finally:
        await server.stop()
