"""Brute-force state-vector simulator, the independent ground truth.

The full amplitude vector is evolved by direct basis-index bit arithmetic:
for a gate on qubit p the flat array is viewed with that qubit's bit as an
explicit axis and the two half-spaces are mixed in place.  Nothing here is
shared with the tensor machinery it is used to verify.

Basis convention: qubit at site (i, j) occupies string position
p = i * cols + j, and the basis index of a bitstring is its value with
position 0 as the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, GateKind

#: Default ceiling on simulated qubits (2**24 amplitudes, 256 MiB).
DEFAULT_QUBIT_LIMIT = 24


class QubitLimitError(Exception):
    """Requested simulation exceeds the configured qubit ceiling."""


@dataclass
class StateVector:
    """All 2**n amplitudes of an n-qubit state."""

    n_qubits: int
    amplitudes: np.ndarray

    def amplitude(self, bits: str) -> complex:
        if len(bits) != self.n_qubits:
            raise ValueError(f"bitstring length {len(bits)} != {self.n_qubits}")
        return complex(self.amplitudes[int(bits, 2)])

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def relative_deviation(value: complex, reference: complex, n_qubits: int) -> float:
    """|value - reference| relative to |reference|.

    The denominator is floored at 2**(-n/2), the RMS amplitude of a
    normalized n-qubit state, so that amplitudes vanishing by exact
    interference are compared against the state's natural scale instead of
    against rounding noise.
    """
    scale = max(abs(reference), 2.0 ** (-n_qubits / 2))
    return abs(value - reference) / scale


def apply_single_qubit(vec: np.ndarray, matrix, position: int, n_qubits: int) -> None:
    """Mix the two half-spaces of qubit ``position`` in place."""
    g = np.asarray(matrix, dtype=np.complex128)
    bit = n_qubits - 1 - position
    v = vec.reshape(-1, 2, 1 << bit)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = g[0, 0] * a0 + g[0, 1] * a1
    v[:, 1, :] = g[1, 0] * a0 + g[1, 1] * a1


def apply_two_qubit(
    vec: np.ndarray, matrix, position_a: int, position_b: int, n_qubits: int
) -> None:
    """Apply a 4x4 gate in place; qubit ``position_a`` is the slower bit."""
    if position_a == position_b:
        raise ValueError("two-qubit gate on identical positions")
    g = np.asarray(matrix, dtype=np.complex128).reshape(2, 2, 2, 2)
    bit_a = n_qubits - 1 - position_a
    bit_b = n_qubits - 1 - position_b
    hi, lo = max(bit_a, bit_b), min(bit_a, bit_b)
    v = vec.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)

    def block(a, b):
        # axis 1 carries bit `hi`, axis 3 carries bit `lo`
        return v[:, a, :, b, :] if bit_a == hi else v[:, b, :, a, :]

    old = {
        (a, b): block(a, b).copy() for a in (0, 1) for b in (0, 1)
    }
    for ta in (0, 1):
        for tb in (0, 1):
            block(ta, tb)[...] = sum(
                g[ta, tb, sa, sb] * old[(sa, sb)] for sa in (0, 1) for sb in (0, 1)
            )


def _apply_cz(vec: np.ndarray, position_a: int, position_b: int, n_qubits: int) -> None:
    bit_a = n_qubits - 1 - position_a
    bit_b = n_qubits - 1 - position_b
    hi, lo = max(bit_a, bit_b), min(bit_a, bit_b)
    v = vec.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    v[:, 1, :, 1, :] *= -1.0


def simulate_statevector(
    circuit: Circuit, qubit_limit: int = DEFAULT_QUBIT_LIMIT
) -> StateVector:
    """Exact amplitudes of ``circuit`` applied to |0...0>."""
    n = circuit.n_qubits
    if n > qubit_limit:
        raise QubitLimitError(
            f"{n} qubits exceeds the state-vector limit of {qubit_limit}"
        )
    vec = np.zeros(1 << n, dtype=np.complex128)
    vec[0] = 1.0
    cols = circuit.cols
    for layer in circuit.layers:
        for gate in layer.gates:
            positions = [r * cols + c for r, c in gate.sites]
            if gate.n_sites == 1:
                apply_single_qubit(vec, gate.matrix, positions[0], n)
            elif gate.kind is GateKind.CZ:
                _apply_cz(vec, positions[0], positions[1], n)
            else:
                apply_two_qubit(vec, gate.matrix, positions[0], positions[1], n)
    return StateVector(n_qubits=n, amplitudes=vec)
