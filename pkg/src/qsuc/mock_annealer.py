"""Reference server for the annealer wire protocol.

Answers POSTs of ``{n, linear[], quadratic[[i,j,v]...], offset, reads}`` with
``{solutions: [{bits, energy}, ...], backend}``, minimizing with the local
samplers. Exists so the remote client can be exercised end to end without
hardware; ``corrupt_energy=True`` makes it misreport energies, which clients
are expected to catch.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .qubo import Qubo, index_to_bits, bits_to_string, qubo_value
from .samplers import EXHAUSTIVE_MAX_VARS, SaSchedule, solve_exhaustive, solve_sa

BACKEND_NAME = "mock-annealer"


def _solve(q: Qubo) -> list[dict]:
    if q.n <= EXHAUSTIVE_MAX_VARS:
        best = solve_exhaustive(q)
    else:
        best = solve_sa(q, SaSchedule(seed=0))
    solutions = [{"bits": best.bitstring, "energy": best.energy}]
    zeros = bits_to_string(index_to_bits(0, q.n))
    if zeros != best.bitstring:  # a second, worse read keeps clients honest
        solutions.append({"bits": zeros, "energy": qubo_value(q, zeros)})
    return solutions


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self) -> None:  # noqa: N802 (http.server API)
        try:
            length = int(self.headers.get("Content-Length", 0))
            doc = json.loads(self.rfile.read(length))
            q = Qubo.from_dict(doc)
            solutions = _solve(q)
        except Exception as exc:  # malformed request: report, do not die
            self._reply(400, {"error": str(exc)})
            return
        if self.server.corrupt_energy:
            solutions[0]["energy"] += 1.0
        self._reply(200, {"solutions": solutions, "backend": BACKEND_NAME})

    def _reply(self, status: int, doc: dict) -> None:
        body = json.dumps(doc).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args) -> None:  # keep test output clean
        pass


def make_server(host: str = "127.0.0.1", port: int = 0, corrupt_energy: bool = False):
    """Create the server without starting it; port 0 picks a free port."""
    server = ThreadingHTTPServer((host, port), _Handler)
    server.corrupt_energy = corrupt_energy
    return server


def serve(host: str, port: int, corrupt_energy: bool = False) -> None:
    """Blocking entry point used by the CLI."""
    server = make_server(host, port, corrupt_energy)
    print(f"mock annealer listening on http://{server.server_address[0]}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
