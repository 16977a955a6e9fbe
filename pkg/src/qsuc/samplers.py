"""QUBO-minimization backends standing in for annealing hardware.

Three interchangeable samplers share one result type: exhaustive scan (exact,
capped size), simulated annealing (best of restarts, fully seeded), and an
HTTP client for an external annealer speaking a small JSON protocol. All of
them return an energy recomputed locally from the bitstring, never a value
the backend merely claims.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import requests

from . import kernels
from .errors import (
    ParameterError,
    RemoteProtocolError,
    RemoteVerificationError,
    SizeLimitError,
    TransportError,
)
from .qubo import ENERGY_ATOL, Qubo, as_bits, bits_to_index, bits_to_string, index_to_bits, qubo_value

EXHAUSTIVE_MAX_VARS = 26


@dataclass(frozen=True)
class SampleResult:
    """Lowest-energy assignment a sampler found, with bookkeeping."""

    bitstring: str
    energy: float
    reads: int
    backend: str
    wall_time: float


@dataclass(frozen=True)
class SaSchedule:
    """Annealing schedule: geometric beta ramp, repeated over restarts."""

    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 10.0
    restarts: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ParameterError(f"sweeps must be >= 1, got {self.sweeps}")
        if not 0.0 < self.beta_start <= self.beta_end:
            raise ParameterError(
                f"need 0 < beta_start <= beta_end, got ({self.beta_start}, {self.beta_end})"
            )
        if self.restarts < 1:
            raise ParameterError(f"restarts must be >= 1, got {self.restarts}")
        if self.seed < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")


def solve_exhaustive(q: Qubo) -> SampleResult:
    """Scan all assignments; exact minimizer, ties to the lowest bitstring."""
    if q.n < 1:
        raise ParameterError("QUBO must have at least one variable")
    if q.n > EXHAUSTIVE_MAX_VARS:
        raise SizeLimitError(
            f"exhaustive search capped at {EXHAUSTIVE_MAX_VARS} variables, got {q.n}"
        )
    start = time.perf_counter()
    lin, wsym = q.dense()
    best_idx, _ = kernels.exhaustive_scan(lin, wsym, q.offset)
    bits = index_to_bits(int(best_idx), q.n)
    return SampleResult(
        bitstring=bits_to_string(bits),
        energy=qubo_value(q, bits),
        reads=1 << q.n,
        backend=f"exhaustive[{kernels.BACKEND}]",
        wall_time=time.perf_counter() - start,
    )


def solve_sa(q: Qubo, sched: SaSchedule = SaSchedule()) -> SampleResult:
    """Single-flip Metropolis annealing, best state over all restarts.

    Restart r draws its starting point and proposal uniforms from the child
    seed (sched.seed, r), so the result is reproducible and independent of
    restart execution order. Ties across restarts go to the lowest bitstring.
    """
    if q.n < 1:
        raise ParameterError("QUBO must have at least one variable")
    start = time.perf_counter()
    lin, wsym = q.dense()
    betas = np.geomspace(sched.beta_start, sched.beta_end, sched.sweeps)
    best_key = None
    best_bits = None
    for r in range(sched.restarts):
        rng = np.random.default_rng(np.random.SeedSequence([sched.seed, r]))
        x = rng.integers(0, 2, size=q.n).astype(np.uint8)
        uniforms = rng.random(sched.sweeps * q.n)
        fld = lin + wsym @ x.astype(float)
        e0 = qubo_value(q, x)
        best_x = x.copy()
        kernels.anneal_sweeps(lin, wsym, x, fld, e0, betas, uniforms, best_x)
        energy = qubo_value(q, best_x)
        key = (energy, bits_to_index(best_x))
        if best_key is None or key < best_key:
            best_key = key
            best_bits = best_x.copy()
    return SampleResult(
        bitstring=bits_to_string(best_bits),
        energy=best_key[0],
        reads=sched.restarts,
        backend=f"sa[{kernels.BACKEND}]",
        wall_time=time.perf_counter() - start,
    )


def submit_remote(
    q: Qubo,
    endpoint: str,
    auth: str | None = None,
    reads: int = 100,
    timeout: float = 30.0,
) -> SampleResult:
    """Submit a QUBO to an external annealer service and verify its answer.

    Wire format: POST ``{n, linear[], quadratic[[i,j,v]...], offset, reads}``,
    response ``{solutions: [{bits, energy}, ...], backend}``. The lowest-energy
    solution wins; its energy is recomputed locally and any disagreement
    beyond tolerance is an error, not a warning.
    """
    if q.n < 1:
        raise ParameterError("QUBO must have at least one variable")
    start = time.perf_counter()
    payload = q.to_dict()
    payload["reads"] = reads
    headers = {"Content-Type": "application/json"}
    if auth:
        headers["Authorization"] = f"Bearer {auth}"
    try:
        resp = requests.post(endpoint, json=payload, headers=headers, timeout=timeout)
        resp.raise_for_status()
    except requests.RequestException as exc:
        raise TransportError(f"annealer request to {endpoint} failed: {exc}") from exc
    # requests raises a RequestException subclass for bad JSON too, so the
    # decode step needs its own handler to stay a protocol error
    try:
        doc = resp.json()
    except ValueError as exc:
        raise RemoteProtocolError(f"annealer response is not JSON: {exc}") from exc

    solutions = doc.get("solutions")
    if not isinstance(solutions, list) or not solutions:
        raise RemoteProtocolError("annealer response carries no solutions array")
    best = None
    for sol in solutions:
        try:
            bits = as_bits(str(sol["bits"]), q.n)
            claimed = float(sol["energy"])
        except (KeyError, TypeError, ValueError) as exc:
            raise RemoteProtocolError(f"malformed solution entry {sol!r}") from exc
        local = qubo_value(q, bits)
        if abs(local - claimed) > ENERGY_ATOL:
            raise RemoteVerificationError(
                f"annealer reported energy {claimed} for {bits_to_string(bits)} "
                f"but local evaluation gives {local}"
            )
        key = (local, bits_to_index(bits))
        if best is None or key < best[0]:
            best = (key, bits)
    return SampleResult(
        bitstring=bits_to_string(best[1]),
        energy=best[0][0],
        reads=reads,
        backend=str(doc.get("backend", "remote")),
        wall_time=time.perf_counter() - start,
    )


def make_sampler(name: str, **kwargs):
    """Build a ``Qubo -> SampleResult`` callable from a backend name.

    ``exhaustive`` takes no options, ``sa`` forwards SaSchedule fields, and
    ``remote`` forwards endpoint/auth/reads/timeout.
    """
    if name == "exhaustive":
        if kwargs:
            raise ParameterError(f"exhaustive sampler takes no options, got {sorted(kwargs)}")
        return solve_exhaustive
    if name == "sa":
        sched = SaSchedule(**kwargs)
        return lambda q: solve_sa(q, sched)
    if name == "remote":
        if "endpoint" not in kwargs:
            raise ParameterError("remote sampler needs an endpoint")
        return lambda q: submit_remote(q, **kwargs)
    raise ParameterError(f"unknown sampler backend {name!r}")
