"""Shared test utilities, kept independent of the package's contraction code."""

from __future__ import annotations

import numpy as np


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish unitary via QR with phase-fixed diagonal."""
    q, r = np.linalg.qr(random_complex(rng, (dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_taus(rng: np.random.Generator, n_qubits: int, count: int) -> list[str]:
    return [
        "".join("01"[b] for b in rng.integers(0, 2, n_qubits)) for _ in range(count)
    ]


def peps_dense(state) -> np.ndarray:
    """Full amplitude vector of a PEPS, rebuilt with raw numpy tensordots.

    Absorbs sites row-major keeping every physical leg open, so it never
    touches pepsim.contraction.  Only viable for small lattices.
    """
    rows, cols = state.dims
    acc = np.array(1.0, dtype=complex)
    acc_bonds: list = []
    n_phys = 0
    for i in range(rows):
        for j in range(cols):
            t = state.site(i, j)
            names = [("h", i, j - 1), ("h", i, j), ("v", i - 1, j), ("v", i, j)]
            at_edge = [j == 0, j == cols - 1, i == 0, i == rows - 1]
            labels = []
            shape = [2]
            for ax, (name, edge) in enumerate(zip(names, at_edge), start=1):
                if edge:
                    assert t.shape[ax] == 1
                else:
                    labels.append(name)
                    shape.append(t.shape[ax])
            t = t.reshape(shape)
            common = [b for b in acc_bonds if b in labels]
            a_ax = [n_phys + acc_bonds.index(b) for b in common]
            t_ax = [1 + labels.index(b) for b in common]
            acc = np.tensordot(acc, t, axes=(a_ax, t_ax))
            remaining = [b for b in acc_bonds if b not in common]
            acc = np.moveaxis(acc, n_phys + len(remaining), n_phys)
            acc_bonds = remaining + [b for b in labels if b not in common]
            n_phys += 1
    assert not acc_bonds
    return acc.reshape(-1)
