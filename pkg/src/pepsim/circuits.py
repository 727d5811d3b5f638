"""Circuit IR, standard gate set, CZ layer layouts, the seeded random-circuit
generator and a line-oriented text format.

Depth bookkeeping uses the (1 + d + 1) convention: an opening and a closing
layer of Hadamards on every qubit sandwich ``d`` clock cycles, each cycle
holding one CZ configuration plus single-qubit gates on idle qubits.  The
sandwiching Hadamard layers are never counted in ``d``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

Site = tuple[int, int]

_SQRT_HALF = 1.0 / math.sqrt(2.0)

GATE_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQRT_HALF
GATE_T = np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=np.complex128)
# Principal square roots of X and Y: squaring each reproduces the Pauli.
GATE_X_HALF = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=np.complex128) / 2
GATE_Y_HALF = np.array([[1 + 1j, -1 - 1j], [1 + 1j, 1 + 1j]], dtype=np.complex128) / 2
GATE_CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)

for _g in (GATE_H, GATE_T, GATE_X_HALF, GATE_Y_HALF, GATE_CZ):
    _g.setflags(write=False)

#: Bit generator used for all seeded randomness, recorded in circuit files.
#: Qubit q draws from an independent stream keyed (seed, q); see
#: ``qubit_stream``.
GENERATOR_NAME = "philox4x64"

_MASK64 = (1 << 64) - 1


class GateKind(enum.Enum):
    """Gate vocabulary; values double as the file-format mnemonics."""

    H = "h"
    T = "t"
    X_HALF = "x2"
    Y_HALF = "y2"
    CZ = "cz"
    CUSTOM_SINGLE = "u1"
    CUSTOM_TWO = "u2"


_NAMED_MATRICES = {
    GateKind.H: GATE_H,
    GateKind.T: GATE_T,
    GateKind.X_HALF: GATE_X_HALF,
    GateKind.Y_HALF: GATE_Y_HALF,
    GateKind.CZ: GATE_CZ,
}


class GateOp:
    """A gate bound to one or two lattice sites.

    Two-site gates are indexed ``[tau_a tau_b ; sigma_a sigma_b]`` with the
    first listed site as the slower bit.  Matrices are expected to be
    unitary; this is the caller's contract and is not enforced here.
    """

    __slots__ = ("kind", "sites", "matrix")

    def __init__(self, kind: GateKind, sites, matrix=None):
        self.kind = kind
        self.sites = tuple((int(r), int(c)) for r, c in sites)
        if kind in _NAMED_MATRICES:
            if matrix is not None:
                raise ValueError(f"{kind.name} carries a fixed matrix")
            self.matrix = _NAMED_MATRICES[kind]
        else:
            m = np.ascontiguousarray(matrix, dtype=np.complex128)
            want = (2, 2) if kind is GateKind.CUSTOM_SINGLE else (4, 4)
            if m.shape != want:
                raise ValueError(f"{kind.name} matrix must be {want}, got {m.shape}")
            m.setflags(write=False)
            self.matrix = m
        expected = 2 if kind in (GateKind.CZ, GateKind.CUSTOM_TWO) else 1
        if len(self.sites) != expected:
            raise ValueError(
                f"{kind.name} takes {expected} site(s), got {len(self.sites)}"
            )

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GateOp):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.sites == other.sites
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.kind, self.sites))

    def __repr__(self) -> str:
        coords = " ".join(f"{r} {c}" for r, c in self.sites)
        return f"GateOp({self.kind.value} {coords})"

    @classmethod
    def h(cls, site: Site) -> "GateOp":
        return cls(GateKind.H, [site])

    @classmethod
    def t(cls, site: Site) -> "GateOp":
        return cls(GateKind.T, [site])

    @classmethod
    def x_half(cls, site: Site) -> "GateOp":
        return cls(GateKind.X_HALF, [site])

    @classmethod
    def y_half(cls, site: Site) -> "GateOp":
        return cls(GateKind.Y_HALF, [site])

    @classmethod
    def cz(cls, site_a: Site, site_b: Site) -> "GateOp":
        return cls(GateKind.CZ, [site_a, site_b])

    @classmethod
    def custom_single(cls, matrix, site: Site) -> "GateOp":
        return cls(GateKind.CUSTOM_SINGLE, [site], matrix)

    @classmethod
    def custom_two(cls, matrix, site_a: Site, site_b: Site) -> "GateOp":
        return cls(GateKind.CUSTOM_TWO, [site_a, site_b], matrix)


@dataclass
class Layer:
    """One clock tick: gates on pairwise-disjoint site sets."""

    gates: list[GateOp] = field(default_factory=list)
    index: int = 0

    def sites(self) -> set[Site]:
        return {s for g in self.gates for s in g.sites}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Layer):
            return NotImplemented
        return self.gates == other.gates


@dataclass
class Circuit:
    """Ordered layers on a rows x cols lattice.

    ``cycles`` is the ``d`` of the (1+d+1) notation when known (set by the
    generator, inferred by the parser when the Hadamard sandwich is
    present).  ``seed``/``generator`` are provenance metadata; none of the
    three take part in structural equality.
    """

    rows: int
    cols: int
    layers: list[Layer] = field(default_factory=list)
    seed: int | None = None
    generator: str | None = None
    cycles: int | None = None

    @property
    def n_qubits(self) -> int:
        return self.rows * self.cols

    def __eq__(self, other) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.layers == other.layers
        )

    def validate(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"lattice {self.rows}x{self.cols} must be >= 1x1")
        for layer in self.layers:
            seen: set[Site] = set()
            for gate in layer.gates:
                for r, c in gate.sites:
                    if not (0 <= r < self.rows and 0 <= c < self.cols):
                        raise ValueError(
                            f"layer {layer.index}: site ({r},{c}) outside lattice"
                        )
                    if (r, c) in seen:
                        raise ValueError(
                            f"layer {layer.index}: site ({r},{c}) used twice"
                        )
                    seen.add((r, c))
                if gate.n_sites == 2 and not _adjacent(*gate.sites):
                    raise ValueError(
                        f"layer {layer.index}: {gate!r} sites are not nearest neighbours"
                    )


def _adjacent(a: Site, b: Site) -> bool:
    return (abs(a[0] - b[0]), abs(a[1] - b[1])) in ((0, 1), (1, 0))


def all_bonds(rows: int, cols: int) -> list[tuple[Site, Site]]:
    """Every nearest-neighbour pair of the lattice."""
    bonds = []
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                bonds.append(((i, j), (i, j + 1)))
            if i + 1 < rows:
                bonds.append(((i, j), (i + 1, j)))
    return bonds


def cz_layout(rows: int, cols: int, cycle: int) -> list[tuple[Site, Site]]:
    """CZ pairs for clock ``cycle``; configurations repeat with period 8.

    Horizontal bonds split into four parity classes 2*(j%2) + (i%2) by their
    left site (i, j), vertical bonds into 2*(i%2) + (j%2) by their upper
    site.  Configurations 0..7 alternate horizontal and vertical classes,
    so the union over any 8 consecutive cycles covers every bond exactly
    once and each configuration is a matching.
    """
    if cycle < 0:
        raise ValueError(f"cycle {cycle} must be >= 0")
    config = cycle % 8
    klass = config // 2
    pairs: list[tuple[Site, Site]] = []
    if config % 2 == 0:
        for i in range(rows):
            for j in range(cols - 1):
                if 2 * (j % 2) + (i % 2) == klass:
                    pairs.append(((i, j), (i, j + 1)))
    else:
        for i in range(rows - 1):
            for j in range(cols):
                if 2 * (i % 2) + (j % 2) == klass:
                    pairs.append(((i, j), (i + 1, j)))
    return pairs


def qubit_stream(seed: int, qubit_index: int) -> np.random.Generator:
    """Independent per-qubit stream: Philox4x64 keyed (seed, qubit_index)."""
    key = np.array([seed & _MASK64, qubit_index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def generate_rqc(rows: int, cols: int, depth: int, seed: int) -> Circuit:
    """Random circuit: H layer, ``depth`` CZ + single-qubit cycles, H layer.

    Cycle t applies the CZ configuration ``cz_layout(rows, cols, t-1)``.  A
    qubit idle this cycle but covered by a CZ in the previous cycle receives
    a single-qubit gate: T the first time, afterwards a uniform draw from
    {T, X_HALF, Y_HALF} minus its previous single-qubit gate.  Deterministic
    in (rows, cols, depth, seed); every qubit draws from its own stream.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"lattice {rows}x{cols} must be >= 1x1")
    if depth < 0:
        raise ValueError(f"depth {depth} must be >= 0")
    n = rows * cols
    streams = [qubit_stream(seed, q) for q in range(n)]
    sites = [(i, j) for i in range(rows) for j in range(cols)]

    layers = [Layer([GateOp.h(s) for s in sites], index=0)]
    last_single: dict[Site, GateKind] = {}
    prev_cz_sites: set[Site] = set()
    single_kinds = (GateKind.T, GateKind.X_HALF, GateKind.Y_HALF)
    for t in range(1, depth + 1):
        pairs = cz_layout(rows, cols, t - 1)
        gates = [GateOp.cz(a, b) for a, b in pairs]
        busy = {s for pair in pairs for s in pair}
        for site in sites:
            if site in busy or site not in prev_cz_sites:
                continue
            prev = last_single.get(site)
            if prev is None:
                kind = GateKind.T
            else:
                options = [k for k in single_kinds if k is not prev]
                q = site[0] * cols + site[1]
                kind = options[int(streams[q].integers(0, len(options)))]
            last_single[site] = kind
            gates.append(GateOp(kind, [site]))
        layers.append(Layer(gates, index=t))
        prev_cz_sites = busy
    layers.append(Layer([GateOp.h(s) for s in sites], index=depth + 1))

    circuit = Circuit(
        rows=rows,
        cols=cols,
        layers=layers,
        seed=seed & _MASK64,
        generator=GENERATOR_NAME,
        cycles=depth,
    )
    circuit.validate()
    return circuit


class CircuitFormatError(Exception):
    """Circuit text violates the format; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def serialize_circuit(circuit: Circuit) -> str:
    """Render the text form; ``parse_circuit`` inverts it exactly."""
    lines = [f"lattice {circuit.rows} {circuit.cols}"]
    if circuit.seed is not None:
        lines.append(f"seed {circuit.seed}")
    if circuit.generator is not None:
        lines.append(f"generator {circuit.generator}")
    for layer in circuit.layers:
        lines.append("layer")
        for gate in layer.gates:
            coords = " ".join(f"{r} {c}" for r, c in gate.sites)
            if gate.kind in _NAMED_MATRICES:
                lines.append(f"{gate.kind.value} {coords}")
            else:
                floats = " ".join(
                    f"{part!r}"
                    for x in gate.matrix.flat
                    for part in (x.real, x.imag)
                )
                lines.append(f"{gate.kind.value} {coords} {floats}")
    return "\n".join(lines) + "\n"


_GATE_ARITY = {
    "h": (GateKind.H, 1, 0),
    "t": (GateKind.T, 1, 0),
    "x2": (GateKind.X_HALF, 1, 0),
    "y2": (GateKind.Y_HALF, 1, 0),
    "cz": (GateKind.CZ, 2, 0),
    "u1": (GateKind.CUSTOM_SINGLE, 1, 8),
    "u2": (GateKind.CUSTOM_TWO, 2, 32),
}


def parse_circuit(text: str) -> Circuit:
    """Parse the line-oriented circuit format ('#' starts a comment)."""
    rows = cols = None
    seed = None
    generator = None
    layers: list[Layer] = []
    current: list[GateOp] | None = None
    seen_sites: set[Site] = set()

    def fail(msg: str, lineno: int):
        raise CircuitFormatError(msg, lineno)

    def parse_int(token: str, what: str, lineno: int) -> int:
        try:
            return int(token)
        except ValueError:
            fail(f"{what} {token!r} is not an integer", lineno)

    def flush():
        nonlocal current
        if current is not None:
            layers.append(Layer(current, index=len(layers)))
            current = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        word = parts[0].lower()
        if word == "lattice":
            if rows is not None:
                fail("duplicate lattice line", lineno)
            if layers or current is not None:
                fail("lattice line must precede layers", lineno)
            if len(parts) != 3:
                fail("lattice takes two integers", lineno)
            rows = parse_int(parts[1], "row count", lineno)
            cols = parse_int(parts[2], "column count", lineno)
            if rows < 1 or cols < 1:
                fail(f"lattice {rows}x{cols} must be >= 1x1", lineno)
        elif word == "seed":
            if len(parts) != 2:
                fail("seed takes one integer", lineno)
            seed = parse_int(parts[1], "seed", lineno) & _MASK64
        elif word == "generator":
            if len(parts) != 2:
                fail("generator takes one name", lineno)
            generator = parts[1]
        elif word == "layer":
            if rows is None:
                fail("layer before lattice line", lineno)
            if len(parts) != 1:
                fail("layer takes no arguments", lineno)
            flush()
            current = []
            seen_sites = set()
        elif word in _GATE_ARITY:
            if rows is None:
                fail("gate before lattice line", lineno)
            if current is None:
                fail("gate outside a layer", lineno)
            kind, n_sites, n_floats = _GATE_ARITY[word]
            want = 1 + 2 * n_sites + n_floats
            if len(parts) != want:
                fail(
                    f"{word} takes {2 * n_sites} site coordinates"
                    + (f" and {n_floats} floats" if n_floats else ""),
                    lineno,
                )
            coords = [parse_int(p, "coordinate", lineno) for p in parts[1 : 1 + 2 * n_sites]]
            gate_sites = [(coords[2 * k], coords[2 * k + 1]) for k in range(n_sites)]
            for r, c in gate_sites:
                if not (0 <= r < rows and 0 <= c < cols):
                    fail(f"site ({r},{c}) outside {rows}x{cols} lattice", lineno)
                if (r, c) in seen_sites:
                    fail(f"site ({r},{c}) already used in this layer", lineno)
                seen_sites.add((r, c))
            if n_sites == 2:
                if gate_sites[0] == gate_sites[1]:
                    fail("two-qubit gate on identical sites", lineno)
                if not _adjacent(*gate_sites):
                    fail(
                        f"sites {gate_sites[0]} and {gate_sites[1]} are not "
                        "nearest neighbours",
                        lineno,
                    )
            matrix = None
            if n_floats:
                try:
                    vals = [float(p) for p in parts[1 + 2 * n_sites :]]
                except ValueError:
                    fail("matrix entries must be floats", lineno)
                dim = 2 if n_sites == 1 else 4
                matrix = (
                    np.array(vals[0::2]) + 1j * np.array(vals[1::2])
                ).reshape(dim, dim)
            current.append(GateOp(kind, gate_sites, matrix))
        else:
            fail(f"unknown directive {parts[0]!r}", lineno)
    if rows is None:
        raise CircuitFormatError("missing lattice line")
    flush()
    circuit = Circuit(
        rows=rows,
        cols=cols,
        layers=layers,
        seed=seed,
        generator=generator,
        cycles=_infer_cycles(rows, cols, layers),
    )
    circuit.validate()
    return circuit


def _infer_cycles(rows: int, cols: int, layers: list[Layer]) -> int | None:
    """d of (1+d+1) when the circuit is sandwiched by all-H layers."""
    if len(layers) < 2:
        return None
    for edge in (layers[0], layers[-1]):
        covered = {g.sites[0] for g in edge.gates if g.kind is GateKind.H}
        if len(edge.gates) != rows * cols or len(covered) != rows * cols:
            return None
    return len(layers) - 2
