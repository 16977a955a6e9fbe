"""QUBO and Ising containers, their exact interconversion, binary encoding
of a bounded continuous value, and qubit accounting.

Conventions used throughout the package:

* A QUBO assignment is a bitstring over {0, 1}; variable 0 is the leftmost
  character of the string form, so the string read as a binary number equals
  the assignment's canonical index.
* Quadratic coefficients are stored upper-triangular (``i < j``); symmetric
  and diagonal input is folded on construction (``x**2 == x`` for binaries).
* The spin convention maps bit 0 to spin +1 and bit 1 to spin -1
  (``tau = (1 - upsilon) / 2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import ParameterError, SizeLimitError

Bits = Union[str, Sequence[int], np.ndarray]

#: Absolute tolerance for energy comparisons; coefficients here are <= 1e3.
ENERGY_ATOL = 1e-9


def as_bits(x: Bits, n: int) -> np.ndarray:
    """Normalize a bitstring (``"0101"`` or a 0/1 sequence) to a uint8 array."""
    if isinstance(x, str):
        if len(x) != n:
            raise ParameterError(f"bitstring has length {len(x)}, expected {n}")
        if set(x) - {"0", "1"}:
            raise ParameterError(f"bitstring contains non-binary characters: {x!r}")
        return np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.asarray(x)
    if arr.shape != (n,):
        raise ParameterError(f"assignment has shape {arr.shape}, expected ({n},)")
    if not np.isin(arr, (0, 1)).all():
        raise ParameterError("assignment entries must be 0 or 1")
    return arr.astype(np.uint8)


def bits_to_string(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in bits)


def bits_to_index(bits: np.ndarray) -> int:
    """Canonical index of an assignment: the bitstring read as a binary number."""
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def index_to_bits(index: int, n: int) -> np.ndarray:
    return ((index >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


def spins_from_bits(bits: np.ndarray) -> np.ndarray:
    """Map bits to spins: 0 -> +1, 1 -> -1."""
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


def _canonical_quadratic(
    n: int, quadratic: Mapping[tuple[int, int], float] | None
) -> tuple[dict[tuple[int, int], float], np.ndarray]:
    """Fold arbitrary (i, j) keys into upper-triangular form.

    Diagonal entries are returned separately so the caller can fold them into
    the linear part (binary variables satisfy x**2 == x).
    """
    upper: dict[tuple[int, int], float] = {}
    diag = np.zeros(n)
    for (i, j), v in (quadratic or {}).items():
        if not (0 <= i < n and 0 <= j < n):
            raise ParameterError(f"quadratic index ({i}, {j}) out of range for n={n}")
        if not math.isfinite(v):
            raise ParameterError(f"quadratic coefficient ({i}, {j}) is not finite")
        if i == j:
            diag[i] += v
            continue
        key = (i, j) if i < j else (j, i)
        upper[key] = upper.get(key, 0.0) + v
    return {k: v for k, v in upper.items() if v != 0.0}, diag


@dataclass
class Qubo:
    """Minimize ``sum_{i<j} B_ij x_i x_j + sum_i c_i x_i + offset`` over bits.

    Treat instances as immutable once built; every transformation in this
    package returns a new object.
    """

    n: int
    linear: np.ndarray
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    @classmethod
    def from_terms(
        cls,
        n: int,
        linear: Sequence[float] | None = None,
        quadratic: Mapping[tuple[int, int], float] | None = None,
        offset: float = 0.0,
    ) -> "Qubo":
        """Build a canonical container, symmetrizing/folding quadratic input."""
        if n < 0:
            raise ParameterError("variable count must be non-negative")
        lin = np.zeros(n) if linear is None else np.asarray(linear, dtype=float).copy()
        if lin.shape != (n,):
            raise ParameterError(f"linear part has shape {lin.shape}, expected ({n},)")
        if not np.isfinite(lin).all():
            raise ParameterError("linear coefficients must be finite")
        if not math.isfinite(offset):
            raise ParameterError("offset must be finite")
        upper, diag = _canonical_quadratic(n, quadratic)
        return cls(n=n, linear=lin + diag, quadratic=upper, offset=float(offset))

    def copy(self) -> "Qubo":
        return Qubo(self.n, self.linear.copy(), dict(self.quadratic), self.offset)

    def __add__(self, other: "Qubo") -> "Qubo":
        if self.n != other.n:
            raise ParameterError(f"cannot add QUBOs of size {self.n} and {other.n}")
        quad = dict(self.quadratic)
        for key, v in other.quadratic.items():
            merged = quad.get(key, 0.0) + v
            if merged == 0.0:
                quad.pop(key, None)
            else:
                quad[key] = merged
        return Qubo(self.n, self.linear + other.linear, quad, self.offset + other.offset)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(linear, W)`` with W the symmetric zero-diagonal matrix."""
        w = np.zeros((self.n, self.n))
        for (i, j), v in self.quadratic.items():
            w[i, j] = v
            w[j, i] = v
        return self.linear.copy(), w

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "linear": [float(v) for v in self.linear],
            "quadratic": [[i, j, float(v)] for (i, j), v in sorted(self.quadratic.items())],
            "offset": float(self.offset),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Qubo":
        quad = {(int(i), int(j)): float(v) for i, j, v in d.get("quadratic", [])}
        return cls.from_terms(
            int(d["n"]), d.get("linear"), quad, float(d.get("offset", 0.0))
        )


@dataclass
class IsingModel:
    """Minimize ``sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + offset`` over spins."""

    n: int
    h: np.ndarray
    J: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "linear": [float(v) for v in self.h],
            "quadratic": [[i, j, float(v)] for (i, j), v in sorted(self.J.items())],
            "offset": float(self.offset),
        }


def qubo_value(q: Qubo, x: Bits) -> float:
    """Evaluate the QUBO at an assignment."""
    bits = as_bits(x, q.n)
    energy = float(q.linear @ bits) + q.offset
    for (i, j), v in q.quadratic.items():
        if bits[i] and bits[j]:
            energy += v
    return energy


def qubo_to_ising(q: Qubo) -> IsingModel:
    """Exact spin reformulation via ``tau = (1 - upsilon) / 2``.

    Energies agree assignment-by-assignment: ``qubo_value(q, x) ==
    ising_energy(qubo_to_ising(q), spins_from_bits(x))`` up to rounding.
    """
    h = -q.linear / 2.0
    offset = q.offset + float(q.linear.sum()) / 2.0
    J: dict[tuple[int, int], float] = {}
    for (i, j), v in q.quadratic.items():
        J[(i, j)] = v / 4.0
        h[i] -= v / 4.0
        h[j] -= v / 4.0
        offset += v / 4.0
    return IsingModel(n=q.n, h=h, J=J, offset=offset)


def ising_energy(m: IsingModel, spins: Sequence[int] | np.ndarray) -> float:
    """Evaluate the Ising model at a +-1 spin assignment."""
    s = np.asarray(spins, dtype=float)
    if s.shape != (m.n,):
        raise ParameterError(f"spin assignment has shape {s.shape}, expected ({m.n},)")
    if not np.isin(s, (-1.0, 1.0)).all():
        raise ParameterError("spin entries must be +1 or -1")
    energy = float(m.h @ s) + m.offset
    for (i, j), v in m.J.items():
        energy += v * s[i] * s[j]
    return energy


def hamiltonian_diagonal(m: IsingModel, max_qubits: int = 20) -> np.ndarray:
    """Diagonal of the z-basis energy operator, as a length-2**n vector.

    The operator is diagonal in the computational basis, so this vector is the
    complete operator: entry ``b`` is the energy of the basis state whose
    bitstring is ``b`` in binary (variable 0 = most significant bit, bit 0
    meaning spin +1).
    """
    if m.n > max_qubits:
        raise SizeLimitError(
            f"dense diagonal limited to {max_qubits} qubits, got {m.n}"
        )
    size = 1 << m.n
    b = np.arange(size, dtype=np.int64)
    # int8 spin columns keep the cache at n * 2**n bytes.
    spins = [
        (1 - 2 * ((b >> (m.n - 1 - i)) & 1)).astype(np.int8) for i in range(m.n)
    ]
    diag = np.full(size, m.offset, dtype=float)
    for i in range(m.n):
        if m.h[i] != 0.0:
            diag += m.h[i] * spins[i]
    for (i, j), v in m.J.items():
        diag += v * (spins[i] * spins[j])
    return diag


@dataclass(frozen=True)
class BinaryEncoding:
    """Fixed-point encoding of a non-negative value over ``levels`` bits.

    The encoded value is ``chi * sum_j 2**j * u_j``; representable range is
    ``[0, chi * (2**levels - 1)]``. ``base_index`` locates the first encoding
    bit inside a larger variable vector.
    """

    chi: float
    levels: int
    base_index: int = 0

    def __post_init__(self) -> None:
        if not (self.chi > 0 and math.isfinite(self.chi)):
            raise ParameterError("precision coefficient chi must be positive")
        if self.levels < 1:
            raise ParameterError("encoding needs at least one bit")
        if self.base_index < 0:
            raise ParameterError("base_index must be non-negative")

    @property
    def max_value(self) -> float:
        return self.chi * (2**self.levels - 1)


def encoding_terms(e: BinaryEncoding) -> np.ndarray:
    """Per-bit linear coefficients ``chi * 2**j``, for splicing into QUBOs."""
    return e.chi * np.power(2.0, np.arange(e.levels))


def encode_value(e: BinaryEncoding, bits: Bits) -> float:
    """Decode the value represented by the encoding bits."""
    b = as_bits(bits, e.levels)
    return float(encoding_terms(e) @ b)


@dataclass(frozen=True)
class QubitAccount:
    """Qubit requirements of the three master-problem strategies.

    ``basic`` materializes one slack variable per accumulated cut (``cuts``
    cuts at ``slack_levels`` bits each); ``phr`` drops the slack variables;
    ``admm`` additionally solves one block at a time.
    """

    basic: int
    phr: int
    admm: int
    n_units: int
    horizon: int
    levels: int
    slack_levels: int
    cuts: int


def qubit_accounting(
    n_units: int, horizon: int, levels: int, slack_levels: int, cuts: int
) -> QubitAccount:
    """Qubit counts for the basic, slack-free, and block-decomposed strategies."""
    if min(n_units, horizon, levels, slack_levels, cuts) < 0:
        raise ParameterError("qubit accounting inputs must be non-negative")
    commitment = n_units * horizon
    return QubitAccount(
        basic=commitment + levels + cuts * slack_levels,
        phr=commitment + levels,
        admm=max(horizon, levels),
        n_units=n_units,
        horizon=horizon,
        levels=levels,
        slack_levels=slack_levels,
        cuts=cuts,
    )
