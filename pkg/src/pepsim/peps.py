"""PEPS representation of a 2-D qubit lattice and exact gate application.

Each lattice site holds a rank-5 tensor indexed ``[phys, left, right, up,
down]``.  The physical index has extent 2; auxiliary indices at the lattice
boundary have extent 1.  Neighbouring sites share a bond: ``right`` of
``(i, j)`` matches ``left`` of ``(i, j+1)`` and ``down`` of ``(i, j)``
matches ``up`` of ``(i+1, j)``.

Single-qubit gates act locally and never change tensor extents.  A
two-qubit gate is split by SVD into two local pieces whose shared index is
bundled into the bond between the sites, multiplying that bond's extent by
the operator rank of the gate.  No compression is ever applied afterwards,
so evolution is exact.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import tensors
from .circuits import Circuit, GateOp

PHYS, LEFT, RIGHT, UP, DOWN = range(5)

#: Relative cutoff for the operator rank of a two-qubit gate: only singular
#: values at rounding level are dropped.  State bonds are never truncated.
OPERATOR_RANK_CUTOFF = 1e-12

Site = tuple[int, int]


def parse_bitstring(bits: str, n_qubits: int) -> tuple[int, ...]:
    """Validate a row-major '0'/'1' string; site (i, j) sits at i*cols + j."""
    if len(bits) != n_qubits:
        raise ValueError(f"bitstring length {len(bits)} != qubit count {n_qubits}")
    if any(c not in "01" for c in bits):
        raise ValueError(f"bitstring {bits!r} contains characters other than 0/1")
    return tuple(int(c) for c in bits)


class PepsState:
    """Mutable PEPS wavefunction on a ``rows x cols`` lattice.

    Gate applications mutate the state in place and must be serialized by
    the caller; distinct states may be evolved concurrently.
    """

    def __init__(self, grid: list[list[np.ndarray]]):
        self._grid = [[tensors.as_tensor(t) for t in row] for row in grid]
        self.rows = len(self._grid)
        self.cols = len(self._grid[0]) if self.rows else 0
        self.validate()

    @classmethod
    def product_state(cls, rows: int, cols: int, bits: str | None = None) -> "PepsState":
        """Computational-basis product state, |0...0> unless ``bits`` given."""
        if rows < 1 or cols < 1:
            raise ValueError(f"lattice dimensions {rows}x{cols} must be >= 1")
        values = (
            parse_bitstring(bits, rows * cols)
            if bits is not None
            else (0,) * (rows * cols)
        )
        grid = []
        for i in range(rows):
            row = []
            for j in range(cols):
                t = np.zeros((2, 1, 1, 1, 1), dtype=np.complex128)
                t[values[i * cols + j]] = 1.0
                row.append(t)
            grid.append(row)
        return cls(grid)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def n_qubits(self) -> int:
        return self.rows * self.cols

    def site(self, row: int, col: int) -> np.ndarray:
        return self._grid[row][col]

    def set_site(self, row: int, col: int, tensor: np.ndarray) -> None:
        self._grid[row][col] = tensors.as_tensor(tensor)

    def copy(self) -> "PepsState":
        return PepsState([[t.copy() for t in row] for row in self._grid])

    def bond_dimension(self) -> int:
        """Maximum auxiliary extent over all sites."""
        chi = 1
        for row in self._grid:
            for t in row:
                chi = max(chi, *t.shape[1:])
        return chi

    def validate(self) -> None:
        """Check the structural invariants; raises ValueError on violation."""
        for i in range(self.rows):
            if len(self._grid[i]) != self.cols:
                raise ValueError("ragged site grid")
            for j in range(self.cols):
                t = self._grid[i][j]
                if t.ndim != 5:
                    raise ValueError(f"site ({i},{j}) tensor has rank {t.ndim}, not 5")
                if t.shape[PHYS] != 2:
                    raise ValueError(f"site ({i},{j}) physical extent != 2")
                if j == 0 and t.shape[LEFT] != 1:
                    raise ValueError(f"site ({i},{j}) left boundary extent != 1")
                if j == self.cols - 1 and t.shape[RIGHT] != 1:
                    raise ValueError(f"site ({i},{j}) right boundary extent != 1")
                if i == 0 and t.shape[UP] != 1:
                    raise ValueError(f"site ({i},{j}) top boundary extent != 1")
                if i == self.rows - 1 and t.shape[DOWN] != 1:
                    raise ValueError(f"site ({i},{j}) bottom boundary extent != 1")
                if j + 1 < self.cols and t.shape[RIGHT] != self._grid[i][j + 1].shape[LEFT]:
                    raise ValueError(f"bond mismatch between ({i},{j}) and ({i},{j+1})")
                if i + 1 < self.rows and t.shape[DOWN] != self._grid[i + 1][j].shape[UP]:
                    raise ValueError(f"bond mismatch between ({i},{j}) and ({i+1},{j})")

    def _check_site(self, site: Site) -> Site:
        i, j = site
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise ValueError(f"site {site} outside {self.rows}x{self.cols} lattice")
        return (i, j)

    def apply_single_qubit(self, matrix, site: Site) -> None:
        """A'[tau] = sum_sigma U[tau, sigma] A[sigma]; extents unchanged."""
        i, j = self._check_site(site)
        g = tensors.as_tensor(matrix)
        if g.shape != (2, 2):
            raise ValueError(f"single-qubit gate must be 2x2, got {g.shape}")
        self._grid[i][j] = tensors.contract(g, self._grid[i][j], [(1, PHYS)])

    def apply_two_qubit(self, matrix, site_a: Site, site_b: Site) -> None:
        """Apply a 4x4 gate to a nearest-neighbour pair, growing their bond.

        The gate is indexed ``[tau_a tau_b ; sigma_a sigma_b]`` with
        ``site_a``'s qubit as the slower bit.  The shared bond extent
        multiplies by the gate's operator rank; all other extents are
        unchanged.
        """
        a = self._check_site(site_a)
        b = self._check_site(site_b)
        g = tensors.as_tensor(matrix)
        if g.shape != (4, 4):
            raise ValueError(f"two-qubit gate must be 4x4, got {g.shape}")
        di, dj = b[0] - a[0], b[1] - a[1]
        if (abs(di), abs(dj)) not in ((0, 1), (1, 0)):
            raise ValueError(f"sites {site_a} and {site_b} are not nearest neighbours")
        # Canonical path: n is the left/upper site.  For the reversed order
        # the gate matrix is re-indexed instead of re-deriving the rule.
        if di + dj > 0:
            n, m = a, b
        else:
            n, m = b, a
            g = _swap_qubit_order(g)
        u, v, _chi_o = factorize_two_qubit(g)
        tn = tensors.contract(u, self._grid[n[0]][n[1]], [(1, PHYS)])
        tm = tensors.contract(v, self._grid[m[0]][m[1]], [(2, PHYS)])
        # tn: [tau, s, l, r, u, d]; tm: [s, tau, l, r, u, d].  The grown bond
        # enumerates (old bond, s) with the old bond slowest on both sides,
        # so the two sides keep pairing index-for-index.
        if dj != 0:  # horizontal: n grows right, m grows left
            tn = tensors.permute(tn, (0, 2, 3, 1, 4, 5))
            tn = tensors.merge_axes(tn, [[0], [1], [2, 3], [4], [5]])
            tm = tensors.permute(tm, (1, 2, 0, 3, 4, 5))
            tm = tensors.merge_axes(tm, [[0], [1, 2], [3], [4], [5]])
        else:  # vertical: n grows down, m grows up
            tn = tensors.permute(tn, (0, 2, 3, 4, 5, 1))
            tn = tensors.merge_axes(tn, [[0], [1], [2], [3], [4, 5]])
            tm = tensors.permute(tm, (1, 2, 3, 4, 0, 5))
            tm = tensors.merge_axes(tm, [[0], [1], [2], [3, 4], [5]])
        self._grid[n[0]][n[1]] = tn
        self._grid[m[0]][m[1]] = tm

    def __repr__(self) -> str:
        return f"PepsState({self.rows}x{self.cols}, chi={self.bond_dimension()})"


def _swap_qubit_order(g: np.ndarray) -> np.ndarray:
    """Re-index a 4x4 gate so the two qubits trade bit positions."""
    o = g.reshape(2, 2, 2, 2)  # [tau_a, tau_b, sigma_a, sigma_b]
    return tensors.permute(o, (1, 0, 3, 2)).reshape(4, 4)


def _is_unitary(g: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(g.conj().T @ g - np.eye(g.shape[0]))) <= tol)


def factorize_two_qubit(matrix) -> tuple[np.ndarray, np.ndarray, int]:
    """Split a 4x4 gate into local pieces joined by one summed index.

    Returns ``(u, v, chi_o)`` where ``u`` is indexed ``[tau_a, sigma_a, s]``
    with the singular values absorbed, ``v`` is ``[s, tau_b, sigma_b]`` and
    ``chi_o`` is the operator rank: the number of singular values above
    ``OPERATOR_RANK_CUTOFF`` relative to the largest.  The ``s`` extent is
    trimmed to ``chi_o``.
    """
    g = tensors.as_tensor(matrix)
    if g.shape != (4, 4):
        raise ValueError(f"two-qubit gate must be 4x4, got {g.shape}")
    if not _is_unitary(g):
        warnings.warn("factorizing a non-unitary two-qubit operator", stacklevel=2)
    o = tensors.permute(g.reshape(2, 2, 2, 2), (0, 2, 1, 3))  # [ta, sa, tb, sb]
    u, s, v = tensors.svd(o, row_axes=(0, 1))
    if s[0] == 0.0:
        return u[..., :1] * 0.0, v[:1], 1
    chi_o = int(np.sum(s > OPERATOR_RANK_CUTOFF * s[0]))
    chi_o = max(chi_o, 1)
    return u[..., :chi_o] * s[:chi_o], v[:chi_o], chi_o


def chi_bound(depth: int) -> int:
    """Upper bound 2**ceil(depth/8) on the bond dimension after ``depth`` cycles."""
    if depth < 0:
        raise ValueError(f"depth {depth} must be >= 0")
    return 2 ** math.ceil(depth / 8)


def bond_singular_values(state: PepsState, site_a: Site, site_b: Site) -> np.ndarray:
    """Singular-value spectrum of the two-site tensor split across a bond.

    Diagnostic only: contracts the two neighbouring site tensors over their
    shared bond and decomposes with site_a's legs as rows.  After entangling
    gates on chaotic circuits the spectrum is expected to be nearly flat,
    which is why no bond truncation is attempted anywhere in this package.
    """
    a = state._check_site(site_a)
    b = state._check_site(site_b)
    di, dj = b[0] - a[0], b[1] - a[1]
    if di + dj < 0:
        a, b = b, a
        di, dj = -di, -dj
    ta = state.site(*a)
    tb = state.site(*b)
    if (di, dj) == (0, 1):
        pair = tensors.contract(ta, tb, [(RIGHT, LEFT)])
    elif (di, dj) == (1, 0):
        pair = tensors.contract(ta, tb, [(DOWN, UP)])
    else:
        raise ValueError(f"sites {site_a} and {site_b} are not nearest neighbours")
    _, s, _ = tensors.svd(pair, row_axes=(0, 1, 2, 3))
    return s


def apply_circuit(state: PepsState, circuit: Circuit) -> None:
    """Evolve ``state`` in place through every layer of ``circuit``."""
    if (circuit.rows, circuit.cols) != state.dims:
        raise ValueError(
            f"circuit lattice {circuit.rows}x{circuit.cols} does not match "
            f"state lattice {state.rows}x{state.cols}"
        )
    for layer in circuit.layers:
        for gate in layer.gates:
            _apply_gate(state, gate)


def _apply_gate(state: PepsState, gate: GateOp) -> None:
    if gate.n_sites == 1:
        state.apply_single_qubit(gate.matrix, gate.sites[0])
    else:
        state.apply_two_qubit(gate.matrix, gate.sites[0], gate.sites[1])


def evolve(circuit: Circuit) -> PepsState:
    """Run ``circuit`` on |0...0> and return the evolved state."""
    state = PepsState.product_state(circuit.rows, circuit.cols)
    apply_circuit(state, circuit)
    return state
