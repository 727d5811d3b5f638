"""pepsim: exact simulation of 2-D quantum circuits on a PEPS network.

Circuit evolution is cheap and exact; computing one amplitude is the
exponentially hard step, handled by budgeted tensor contraction with an
exact cost model.  A brute-force state-vector simulator provides the
independent ground truth for verification.
"""

from .circuits import (
    Circuit,
    CircuitFormatError,
    GateKind,
    GateOp,
    Layer,
    cz_layout,
    generate_rqc,
    parse_circuit,
    serialize_circuit,
)
from .contraction import (
    AmplitudeRecord,
    BudgetError,
    ContractionPlan,
    CostReport,
    MeasurementError,
    PeakMeter,
    ProjectedNetwork,
    Strategy,
    amplitude,
    collapse_site,
    contract_generic,
    contract_square_even,
    contract_square_odd,
    estimate_cost,
    measure_qubit,
    plan_contraction,
    plan_for_state,
    project,
    sample_measurements,
    site_marginal,
)
from .oracle import QubitLimitError, StateVector, simulate_statevector
from .peps import (
    PepsState,
    apply_circuit,
    bond_singular_values,
    chi_bound,
    evolve,
    factorize_two_qubit,
)
from .stats import DistributionReport, porter_thomas_report
from .tensors import DecompositionError, TensorSizeError

__version__ = "0.1.0"

__all__ = [
    "AmplitudeRecord",
    "BudgetError",
    "Circuit",
    "CircuitFormatError",
    "ContractionPlan",
    "CostReport",
    "DecompositionError",
    "DistributionReport",
    "GateKind",
    "GateOp",
    "Layer",
    "MeasurementError",
    "PeakMeter",
    "PepsState",
    "ProjectedNetwork",
    "QubitLimitError",
    "StateVector",
    "Strategy",
    "TensorSizeError",
    "amplitude",
    "apply_circuit",
    "bond_singular_values",
    "chi_bound",
    "collapse_site",
    "contract_generic",
    "contract_square_even",
    "contract_square_odd",
    "cz_layout",
    "estimate_cost",
    "evolve",
    "factorize_two_qubit",
    "generate_rqc",
    "measure_qubit",
    "parse_circuit",
    "plan_contraction",
    "plan_for_state",
    "porter_thomas_report",
    "project",
    "sample_measurements",
    "serialize_circuit",
    "simulate_statevector",
    "site_marginal",
]
