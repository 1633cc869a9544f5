"""Line-delimited transports: stdio (for tests and piping) and TCP."""

from __future__ import annotations

import asyncio
import logging
from typing import IO

from .runtime import SessionRuntime

logger = logging.getLogger(__name__)


def serve_stdio(runtime: SessionRuntime, in_stream: IO[str], out_stream: IO[str]) -> None:
    """Process envelopes from a text stream until EOF; replies in order."""
    for line in in_stream:
        for response in runtime.process_line(line):
            out_stream.write(response + "\n")
        out_stream.flush()


async def serve_tcp(runtime: SessionRuntime, host: str, port: int) -> None:
    """One connection per client; lines processed sequentially per connection,
    concurrently across connections."""

    async def on_connection(reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        peer = writer.get_extra_info("peername")
        logger.info("connection from %s", peer)
        loop = asyncio.get_running_loop()
        try:
            while True:
                raw = await reader.readline()
                if not raw:
                    break
                try:
                    line = raw.decode("utf-8")
                except UnicodeDecodeError:
                    line = raw.decode("utf-8", errors="replace")
                responses = await loop.run_in_executor(None, runtime.process_line, line)
                for response in responses:
                    writer.write(response.encode("utf-8") + b"\n")
                await writer.drain()
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            writer.close()
            logger.info("connection from %s closed", peer)

    server = await asyncio.start_server(on_connection, host, port)
    addresses = ", ".join(str(sock.getsockname()) for sock in server.sockets)
    logger.info("listening on %s", addresses)
    async with server:
        await server.serve_forever()
