"""Exact amplitude contraction of projected networks, cost model, planning
under a memory budget, and single-qubit measurement.

Projecting the state onto a basis string leaves a grid of rank-4 tensors
whose full contraction is the amplitude.  Three strategies are provided:

* generic-rows: absorb sites line by line across the shorter lattice axis;
  the largest intermediate has min(rows, cols) + 1 open bonds.
* square-even: split an even square into four quadrants, contract each to a
  tensor with sqrt(N) open bonds, join top pair, bottom pair, then both.
* square-odd: same four-way split for odd squares, with the centre site
  handled by a dedicated sub-procedure inside the upper-right block.

Every strategy is first dry-run on index extents alone, which prices the
exact peak tensor size and multiply-add count before any element is
touched; the run is refused when the predicted bytes exceed the budget.
Closed-form cost formulas for the same strategies power the planner and
the standalone estimator, using exact integer arithmetic throughout since
the counts can exceed 2**50.
"""

from __future__ import annotations

import math
import types
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import tensors
from .peps import PepsState, parse_bitstring

BYTES_PER_ELEMENT = 16

#: Default contraction memory budget (8 GiB).  Costs are exactly
#: predictable, so refusing early with a report beats thrashing.
DEFAULT_BUDGET_BYTES = 8 * 2**30

#: Largest qubit count for which a refused marginal falls back to
#: exhaustive amplitude enumeration.
DEFAULT_ENUMERATION_LIMIT = 22


class Strategy(Enum):
    GENERIC_ROWS = "generic-rows"
    SQUARE_EVEN = "square-even"
    SQUARE_ODD = "square-odd"
    BRISTLECONE = "bristlecone"  # cost estimator only, no contraction


#: Sweep direction of the generic strategy. "columns" advances down the
#: lattice absorbing one row line at a time (used when cols <= rows);
#: "rows" advances along the rows absorbing column lines (cols > rows).
ORIENTATION_COLUMNS = "columns"
ORIENTATION_ROWS = "rows"


@dataclass(frozen=True)
class CostReport:
    """Exact space/time price of one contraction strategy."""

    space_elements: int
    time_ops: int | None
    formula: str

    @property
    def space_bytes(self) -> int:
        return self.space_elements * BYTES_PER_ELEMENT

    def human_bytes(self) -> str:
        return format_bytes(self.space_bytes)

    def __str__(self) -> str:
        ops = "n/a" if self.time_ops is None else str(self.time_ops)
        return (
            f"{self.formula}: {self.space_elements} elements "
            f"({self.human_bytes()}), {ops} multiply-adds"
        )


def format_bytes(n: int) -> str:
    """Binary units with short labels: 1 TB here means 2**40 bytes."""
    units = ["B", "KB", "MB", "GB", "TB", "PB", "EB", "ZB"]
    if n <= 0:
        return f"{n} B"
    idx = min(int(math.log2(n) // 10), len(units) - 1)
    value = n / 2**(10 * idx)
    return f"{value:.4g} {units[idx]}"


class BudgetError(Exception):
    """Contraction refused: predicted space exceeds the memory budget."""

    def __init__(self, report: CostReport, budget_bytes: int):
        super().__init__(
            f"predicted space {report.space_elements} elements "
            f"({report.human_bytes()}) exceeds the budget of "
            f"{format_bytes(budget_bytes)} [{report.formula}]"
        )
        self.report = report
        self.budget_bytes = budget_bytes


class MeasurementError(Exception):
    """Marginal probabilities are inconsistent; the state is corrupted."""


@dataclass(frozen=True)
class ContractionPlan:
    strategy: Strategy
    orientation: str | None
    predicted_space: int
    predicted_time: int


@dataclass
class PeakMeter:
    """Running account of contraction work.

    ``largest_tensor`` is the biggest single tensor seen (operands,
    intermediates, outputs).  ``peak_transient`` is the largest
    output-plus-biggest-operand footprint of any single contraction, the
    realistic high-water mark given one in-flight operand copy.
    """

    largest_tensor: int = 0
    peak_transient: int = 0
    contractions: int = 0
    multiply_adds: int = 0

    def on_load(self, elements: int) -> None:
        self.largest_tensor = max(self.largest_tensor, elements)

    def on_contract(self, a_elements: int, b_elements: int, out_elements: int, k: int) -> None:
        self.largest_tensor = max(self.largest_tensor, a_elements, b_elements, out_elements)
        self.peak_transient = max(
            self.peak_transient, out_elements + max(a_elements, b_elements)
        )
        self.contractions += 1
        self.multiply_adds += out_elements * k


@dataclass
class ProjectedNetwork:
    """Grid of rank-4 tensors [left, right, up, down] left by projection."""

    rows: int
    cols: int
    grid: list[list[np.ndarray]]


@dataclass
class AmplitudeRecord:
    """One computed overlap <tau|psi>."""

    tau: str
    value: complex

    @property
    def probability(self) -> float:
        return abs(self.value) ** 2


def project(state: PepsState, tau: str) -> ProjectedNetwork:
    """Slice each site's physical index at the bit of ``tau`` for that site."""
    bits = parse_bitstring(tau, state.n_qubits)
    grid = [
        [state.site(i, j)[bits[i * state.cols + j]] for j in range(state.cols)]
        for i in range(state.rows)
    ]
    return ProjectedNetwork(rows=state.rows, cols=state.cols, grid=grid)


def _transpose_payload(t):
    if isinstance(t, np.ndarray):
        return np.transpose(t, (2, 3, 0, 1))  # view, no copy
    s = t.shape
    return types.SimpleNamespace(shape=(s[2], s[3], s[0], s[1]))


def _transposed(net: ProjectedNetwork) -> ProjectedNetwork:
    grid = [
        [_transpose_payload(net.grid[i][j]) for i in range(net.rows)]
        for j in range(net.cols)
    ]
    return ProjectedNetwork(rows=net.cols, cols=net.rows, grid=grid)


def _site_labels(net: ProjectedNetwork, i: int, j: int):
    """Bond labels for axes [l, r, u, d]; None marks a lattice-boundary leg."""
    return (
        ("h", i, j - 1) if j > 0 else None,
        ("h", i, j) if j < net.cols - 1 else None,
        ("v", i - 1, j) if i > 0 else None,
        ("v", i, j) if i < net.rows - 1 else None,
    )


class _Contractor:
    """Pairwise contraction of labelled tensors in a fixed order.

    With ``dry_run`` set only index extents flow through; the meter then
    prices exactly the run an array pass would perform, since both modes
    follow the identical sequence of pairwise contractions.
    """

    def __init__(
        self,
        dry_run: bool = False,
        meter: PeakMeter | None = None,
        max_elements: int | None = None,
    ):
        self.dry_run = dry_run
        self.meter = meter if meter is not None else PeakMeter()
        self.max_elements = max_elements

    def site(self, net: ProjectedNetwork, i: int, j: int):
        t = net.grid[i][j]
        labels = _site_labels(net, i, j)
        keep = [ax for ax in range(4) if labels[ax] is not None]
        for ax in range(4):
            if labels[ax] is None and t.shape[ax] != 1:
                raise ValueError(f"boundary leg of site ({i},{j}) has extent > 1")
        shape = tuple(t.shape[ax] for ax in keep)
        kept = [labels[ax] for ax in keep]
        self.meter.on_load(math.prod(shape))
        if self.dry_run:
            return shape, kept
        return t.reshape(shape), kept

    def combine(self, a, b):
        (pa, la), (pb, lb) = a, b
        common = [x for x in la if x in set(lb)]
        a_axes = [la.index(x) for x in common]
        b_axes = [lb.index(x) for x in common]
        out_labels = [x for x in la if x not in set(common)] + [
            x for x in lb if x not in set(common)
        ]
        if self.dry_run:
            for x, ax, bx in zip(common, a_axes, b_axes):
                if pa[ax] != pb[bx]:
                    raise ValueError(f"extent mismatch on bond {x}")
            out_shape = tuple(
                pa[i] for i in range(len(pa)) if i not in set(a_axes)
            ) + tuple(pb[i] for i in range(len(pb)) if i not in set(b_axes))
            k = math.prod(pa[i] for i in a_axes)
            self.meter.on_contract(
                math.prod(pa), math.prod(pb), math.prod(out_shape), k
            )
            return out_shape, out_labels
        k = math.prod(pa.shape[i] for i in a_axes)
        out = tensors.contract(
            pa, pb, list(zip(a_axes, b_axes)), max_elements=self.max_elements
        )
        self.meter.on_contract(pa.size, pb.size, out.size, k)
        return out, out_labels

    def sweep(self, net: ProjectedNetwork, coords):
        acc = None
        for i, j in coords:
            cur = self.site(net, i, j)
            acc = cur if acc is None else self.combine(acc, cur)
        return acc

    def finish(self, acc) -> complex | None:
        payload, labels = acc
        if labels:
            raise AssertionError(f"open bonds remain after contraction: {labels}")
        if self.dry_run:
            return None
        return complex(payload.reshape(()))


def _rect(r0: int, r1: int, c0: int, c1: int):
    return [(i, j) for i in range(r0, r1) for j in range(c0, c1)]


def _generic_plan(con: _Contractor, net: ProjectedNetwork):
    return con.sweep(net, _rect(0, net.rows, 0, net.cols))


_BLOCK_NAMES = ("ul", "ur", "bl", "br")


def _square_even_plan(con: _Contractor, net: ProjectedNetwork, block_order):
    m = net.rows // 2
    spans = {
        "ul": (0, m, 0, m),
        "ur": (0, m, m, net.cols),
        "bl": (m, net.rows, 0, m),
        "br": (m, net.rows, m, net.cols),
    }
    blocks = {}
    for name in block_order:
        blocks[name] = con.sweep(net, _rect(*spans[name]))
    upper = con.combine(blocks["ul"], blocks["ur"])
    lower = con.combine(blocks["bl"], blocks["br"])
    return con.combine(upper, lower)


def _square_odd_plan(con: _Contractor, net: ProjectedNetwork, block_order):
    m = net.rows // 2  # rows = 2m + 1

    def make_ur():
        # The upper-right block spans rows 0..m, cols m..2m and contains the
        # centre site (m, m) as its bottom-left corner: contract its right
        # (m+1) x m part, then the first m sites of column m, join the two,
        # and absorb the centre tensor last.
        right = con.sweep(net, _rect(0, m + 1, m + 1, net.cols))
        upper_col = con.sweep(net, _rect(0, m, m, m + 1))
        joined = con.combine(upper_col, right)
        return con.combine(joined, con.site(net, m, m))

    makers = {
        "ul": lambda: con.sweep(net, _rect(0, m + 1, 0, m)),
        "ur": make_ur,
        "bl": lambda: con.sweep(net, _rect(m + 1, net.rows, 0, m)),
        "br": lambda: con.sweep(net, _rect(m + 1, net.rows, m, net.cols)),
    }
    blocks = {name: makers[name]() for name in block_order}
    upper = con.combine(blocks["ul"], blocks["ur"])
    lower = con.combine(blocks["bl"], blocks["br"])
    return con.combine(upper, lower)


def _predict(net, plan_fn, formula: str) -> CostReport:
    dry = _Contractor(dry_run=True)
    plan_fn(dry, net)
    return CostReport(
        space_elements=dry.meter.largest_tensor,
        time_ops=dry.meter.multiply_adds,
        formula=formula,
    )


def _run(net, plan_fn, formula: str, budget_bytes: int | None, meter: PeakMeter | None):
    report = _predict(net, plan_fn, formula)
    if budget_bytes is not None and report.space_bytes > budget_bytes:
        raise BudgetError(report, budget_bytes)
    ceiling = None if budget_bytes is None else budget_bytes // BYTES_PER_ELEMENT
    run = _Contractor(dry_run=False, meter=meter, max_elements=ceiling)
    return run.finish(plan_fn(run, net))


def contract_generic(
    net: ProjectedNetwork,
    *,
    budget_bytes: int | None = None,
    meter: PeakMeter | None = None,
) -> complex:
    """Line-by-line sweep; works for any rectangle.

    The lattice is swept across its longer axis so that the absorbed lines
    have min(rows, cols) sites and the running tensor never exceeds
    min(rows, cols) + 1 open bonds.
    """
    work = net if net.cols <= net.rows else _transposed(net)
    return _run(work, _generic_plan, "generic-rows/network", budget_bytes, meter)


def contract_square_even(
    net: ProjectedNetwork,
    *,
    budget_bytes: int | None = None,
    meter: PeakMeter | None = None,
    block_order: tuple[str, ...] = _BLOCK_NAMES,
) -> complex:
    """Four-quadrant contraction of an even square lattice.

    ``block_order`` only reorders when each quadrant tensor is computed;
    the joins are always upper pair, lower pair, then both.
    """
    if net.rows != net.cols or net.rows % 2 != 0 or net.rows < 2:
        raise ValueError(f"square-even needs an even square lattice, got {net.rows}x{net.cols}")
    if sorted(block_order) != sorted(_BLOCK_NAMES):
        raise ValueError(f"block_order must permute {_BLOCK_NAMES}")
    return _run(
        net,
        lambda con, n: _square_even_plan(con, n, block_order),
        "square-even/network",
        budget_bytes,
        meter,
    )


def contract_square_odd(
    net: ProjectedNetwork,
    *,
    budget_bytes: int | None = None,
    meter: PeakMeter | None = None,
    block_order: tuple[str, ...] = _BLOCK_NAMES,
) -> complex:
    """Four-block contraction of an odd square lattice (side >= 3)."""
    if net.rows != net.cols or net.rows % 2 != 1 or net.rows < 3:
        raise ValueError(
            f"square-odd needs an odd square lattice of side >= 3, got {net.rows}x{net.cols}"
        )
    if sorted(block_order) != sorted(_BLOCK_NAMES):
        raise ValueError(f"block_order must permute {_BLOCK_NAMES}")
    return _run(
        net,
        lambda con, n: _square_odd_plan(con, n, block_order),
        "square-odd/network",
        budget_bytes,
        meter,
    )


_STRATEGY_FUNCTIONS = {
    Strategy.GENERIC_ROWS: contract_generic,
    Strategy.SQUARE_EVEN: contract_square_even,
    Strategy.SQUARE_ODD: contract_square_odd,
}


def estimate_cost(
    rows: int | None, cols: int | None, depth: int, strategy: Strategy
) -> CostReport:
    """Closed-form cost of one strategy at bond dimension 2**ceil(depth/8).

    All counts are exact integers.  The Bristlecone estimate ignores the
    lattice arguments: its rotated contraction stores two tensors of 11
    open bonds, hence 2**(ceil(d/8)*11 + 1) elements; no operation count
    is modelled for it.
    """
    if depth < 0:
        raise ValueError(f"depth {depth} must be >= 0")
    k = math.ceil(depth / 8)
    if strategy is Strategy.BRISTLECONE:
        return CostReport(
            space_elements=2 ** (11 * k + 1), time_ops=None, formula="bristlecone"
        )
    if rows is None or cols is None or rows < 1 or cols < 1:
        raise ValueError(f"invalid lattice {rows}x{cols}")
    if strategy is Strategy.GENERIC_ROWS:
        short = min(rows, cols)
        space = 2 ** (k * (short + 1))
        time = max(rows - 2, 0) * max(cols - 2, 0) * 2 ** (k * (short + 3))
        return CostReport(space_elements=space, time_ops=time, formula="generic-rows")
    if rows != cols:
        raise ValueError(f"{strategy.value} needs a square lattice, got {rows}x{cols}")
    side = rows
    if strategy is Strategy.SQUARE_EVEN:
        if side % 2 != 0 or side < 2:
            raise ValueError(f"square-even needs an even side, got {side}")
        space = 2 ** (k * side + 1)
        time = 2 ** ((3 * k * side) // 2 + 1)
        return CostReport(space_elements=space, time_ops=time, formula="square-even")
    if strategy is Strategy.SQUARE_ODD:
        if side % 2 != 1 or side < 3:
            raise ValueError(f"square-odd needs an odd side >= 3, got {side}")
        space = 2 ** (k * (side + 1)) + 2 ** (k * side)
        time = (2**k + 1) * 2 ** ((k * (3 * side - 1)) // 2)
        return CostReport(space_elements=space, time_ops=time, formula="square-odd")
    raise ValueError(f"unknown strategy {strategy}")


def applicable_strategies(rows: int, cols: int) -> list[Strategy]:
    out = [Strategy.GENERIC_ROWS]
    if rows == cols and rows >= 2 and rows % 2 == 0:
        out.append(Strategy.SQUARE_EVEN)
    if rows == cols and rows >= 3 and rows % 2 == 1:
        out.append(Strategy.SQUARE_ODD)
    return out


def plan_contraction(
    rows: int, cols: int, depth: int, budget_bytes: int = DEFAULT_BUDGET_BYTES
) -> ContractionPlan:
    """Cheapest strategy whose predicted space fits the budget.

    Among fitting strategies the one with minimal predicted multiply-adds
    wins; exact ties go to the square strategies, whose block structure
    parallelizes more easily.  Raises BudgetError carrying the
    smallest-space report when nothing fits.
    """
    if budget_bytes <= 0:
        raise ValueError(f"budget {budget_bytes} must be positive")
    orientation = ORIENTATION_ROWS if cols > rows else ORIENTATION_COLUMNS
    reports = [
        (s, estimate_cost(rows, cols, depth, s))
        for s in applicable_strategies(rows, cols)
    ]
    fitting = [(s, r) for s, r in reports if r.space_bytes <= budget_bytes]
    if not fitting:
        best = min(reports, key=lambda sr: sr[1].space_elements)[1]
        raise BudgetError(best, budget_bytes)
    tie_break = {Strategy.SQUARE_EVEN: 0, Strategy.SQUARE_ODD: 0, Strategy.GENERIC_ROWS: 1}
    strategy, report = min(fitting, key=lambda sr: (sr[1].time_ops, tie_break[sr[0]]))
    return ContractionPlan(
        strategy=strategy,
        orientation=orientation if strategy is Strategy.GENERIC_ROWS else None,
        predicted_space=report.space_elements,
        predicted_time=report.time_ops,
    )


def plan_for_state(
    state: PepsState, budget_bytes: int = DEFAULT_BUDGET_BYTES
) -> ContractionPlan:
    """Plan from the state's actual bond dimension rather than a depth."""
    chi = state.bond_dimension()
    depth_equivalent = 8 * max(0, math.ceil(math.log2(chi)))
    return plan_contraction(state.rows, state.cols, depth_equivalent, budget_bytes)


def amplitude(
    state: PepsState,
    tau: str,
    *,
    budget_bytes: int = DEFAULT_BUDGET_BYTES,
    strategy: Strategy | None = None,
    meter: PeakMeter | None = None,
) -> complex:
    """Overlap <tau|psi>: project onto ``tau`` and contract.

    With ``strategy`` unset the planner picks from the state's bond
    dimension; passing a strategy skips planning, leaving only the exact
    dry-run budget check of the contraction itself.
    """
    net = project(state, tau)
    if strategy is None:
        strategy = plan_for_state(state, budget_bytes).strategy
    if strategy not in _STRATEGY_FUNCTIONS:
        raise ValueError(f"strategy {strategy} cannot contract a network")
    return _STRATEGY_FUNCTIONS[strategy](net, budget_bytes=budget_bytes, meter=meter)


def _double_site(t: np.ndarray, sigma: int | None) -> np.ndarray:
    """Ket-bra site tensor with bond pairs fused: extent chi**2 per bond."""
    if sigma is None:
        d = tensors.contract(t, np.conj(t), [(0, 0)])
    else:
        s = t[sigma]
        d = tensors.contract(s, np.conj(s), [])
    d = tensors.permute(d, (0, 4, 1, 5, 2, 6, 3, 7))
    return tensors.merge_axes(d, [[0, 1], [2, 3], [4, 5], [6, 7]])


def _double_layer_network(
    state: PepsState, site: tuple[int, int], outcome: int
) -> ProjectedNetwork:
    grid = []
    for i in range(state.rows):
        row = []
        for j in range(state.cols):
            sigma = outcome if (i, j) == site else None
            row.append(_double_site(state.site(i, j), sigma))
        grid.append(row)
    return ProjectedNetwork(rows=state.rows, cols=state.cols, grid=grid)


def _double_layer_cost(state: PepsState) -> CostReport:
    """Price the ket-bra contraction from shapes alone, before any build."""
    grid = [
        [
            types.SimpleNamespace(
                shape=tuple(e * e for e in state.site(i, j).shape[1:])
            )
            for j in range(state.cols)
        ]
        for i in range(state.rows)
    ]
    net = ProjectedNetwork(rows=state.rows, cols=state.cols, grid=grid)
    work = net if net.cols <= net.rows else _transposed(net)
    return _predict(work, _generic_plan, "generic-rows/double-layer")


def _marginal_by_enumeration(
    state: PepsState, site: tuple[int, int], budget_bytes: int
) -> tuple[float, float]:
    n = state.n_qubits
    position = site[0] * state.cols + site[1]
    totals = [0.0, 0.0]
    for index in range(1 << n):
        bits = format(index, f"0{n}b")
        value = amplitude(
            state, bits, budget_bytes=budget_bytes, strategy=Strategy.GENERIC_ROWS
        )
        totals[int(bits[position])] += abs(value) ** 2
    return totals[0], totals[1]


def site_marginal(
    state: PepsState,
    site: tuple[int, int],
    *,
    budget_bytes: int = DEFAULT_BUDGET_BYTES,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> tuple[float, float]:
    """P(0), P(1) for one qubit, by double-layer contraction.

    The ket-bra network squares every bond extent; when that no longer fits
    the budget and the lattice is small enough, the marginal falls back to
    summing |<tau|psi>|**2 over all basis strings.
    """
    i, j = state._check_site(site)
    report = _double_layer_cost(state)
    if report.space_bytes <= budget_bytes:
        probs = []
        for outcome in (0, 1):
            net = _double_layer_network(state, (i, j), outcome)
            value = contract_generic(net, budget_bytes=budget_bytes)
            probs.append(float(value.real))
        p0, p1 = probs
    else:
        if state.n_qubits > enumeration_limit:
            raise BudgetError(report, budget_bytes)
        p0, p1 = _marginal_by_enumeration(state, (i, j), budget_bytes)
    if p0 < 1e-14 and p1 < 1e-14:
        raise MeasurementError(
            f"both outcome probabilities vanish at site {site}; state is corrupted"
        )
    if abs(p0 + p1 - 1.0) > 1e-10:
        raise MeasurementError(
            f"marginals at site {site} sum to {p0 + p1}, expected 1"
        )
    return max(p0, 0.0), max(p1, 0.0)


def collapse_site(
    state: PepsState, site: tuple[int, int], outcome: int, probability: float
) -> PepsState:
    """Copy of ``state`` with the site's qubit projected onto ``outcome``."""
    if outcome not in (0, 1):
        raise ValueError(f"outcome {outcome} must be 0 or 1")
    if probability <= 0.0:
        raise MeasurementError(f"cannot collapse onto outcome of probability {probability}")
    i, j = state._check_site(site)
    new = state.copy()
    t = new.site(i, j).copy()
    t[1 - outcome] = 0.0
    t[outcome] /= math.sqrt(probability)
    new.set_site(i, j, t)
    return new


def measure_qubit(
    state: PepsState,
    site: tuple[int, int],
    rng: np.random.Generator,
    *,
    budget_bytes: int = DEFAULT_BUDGET_BYTES,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> tuple[int, float, PepsState]:
    """Sample one qubit; returns (outcome, its probability, collapsed copy).

    Re-measuring the returned state at the same site reproduces the outcome
    with probability 1.
    """
    p0, p1 = site_marginal(
        state, site, budget_bytes=budget_bytes, enumeration_limit=enumeration_limit
    )
    outcome = 0 if rng.random() < p0 else 1
    probability = (p0, p1)[outcome]
    collapsed = collapse_site(state, site, outcome, probability)
    return outcome, probability, collapsed


def sample_measurements(
    state: PepsState,
    shots: int,
    rng: np.random.Generator,
    *,
    budget_bytes: int = DEFAULT_BUDGET_BYTES,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> list[str]:
    """Measure every qubit in row-major order, ``shots`` times.

    Collapsed states and marginals are cached per outcome prefix, so the
    cost is bounded by the number of distinct prefixes visited (at most
    2**(n+1)), not by the shot count.  Desk-scale lattices only.
    """
    sites = [(i, j) for i in range(state.rows) for j in range(state.cols)]
    n = len(sites)
    draws = rng.random((shots, n))
    states: dict[str, PepsState] = {"": state}
    marginals: dict[str, tuple[float, float]] = {}
    results = []
    for s in range(shots):
        prefix = ""
        for k, site in enumerate(sites):
            if prefix not in marginals:
                marginals[prefix] = site_marginal(
                    states[prefix],
                    site,
                    budget_bytes=budget_bytes,
                    enumeration_limit=enumeration_limit,
                )
            p0, p1 = marginals[prefix]
            bit = 0 if draws[s, k] < p0 else 1
            nxt = prefix + "01"[bit]
            if k + 1 < n and nxt not in states:
                states[nxt] = collapse_site(states[prefix], site, bit, (p0, p1)[bit])
            prefix = nxt
        results.append(prefix)
    return results
