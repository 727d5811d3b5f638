"""Command-line front end.

Subcommands: ``generate`` (write a random circuit file), ``amplitude``
(compute overlaps), ``estimate`` (print the cost model), ``sample``
(Porter-Thomas statistics and sequential measurement) and ``verify``
(cross-check amplitudes against the brute-force simulator).

Every command is deterministic given its seeds.  Exit codes: 0 success,
2 parse/config error, 3 budget or size refusal, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter

import numpy as np

from .circuits import (
    CircuitFormatError,
    generate_rqc,
    parse_circuit,
    qubit_stream,
    serialize_circuit,
)
from .contraction import (
    DEFAULT_BUDGET_BYTES,
    BudgetError,
    MeasurementError,
    Strategy,
    amplitude,
    applicable_strategies,
    estimate_cost,
    format_bytes,
    plan_contraction,
    plan_for_state,
    sample_measurements,
)
from .oracle import QubitLimitError, relative_deviation, simulate_statevector
from .peps import evolve
from .stats import porter_thomas_report
from .tensors import DecompositionError, TensorSizeError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_NUMERICAL = 4

BUDGET_ENV_VAR = "PEPSIM_MEMORY_BUDGET"

# Dedicated Philox stream keys, disjoint from the per-qubit keys 0..N-1.
_TAU_STREAM = 1 << 63
_MEASURE_STREAM = (1 << 63) + 1


class ConfigError(Exception):
    pass


_UNIT_SUFFIXES = {
    "": 1,
    "B": 1,
    "KB": 2**10, "KIB": 2**10,
    "MB": 2**20, "MIB": 2**20,
    "GB": 2**30, "GIB": 2**30,
    "TB": 2**40, "TIB": 2**40,
    "PB": 2**50, "PIB": 2**50,
}


def parse_bytes(text: str) -> int:
    """'8GiB', '512MB', '1073741824' -> bytes.  Units are binary."""
    s = text.strip().upper().replace(" ", "")
    idx = len(s)
    while idx > 0 and not s[idx - 1].isdigit() and s[idx - 1] != ".":
        idx -= 1
    number, suffix = s[:idx], s[idx:]
    if suffix not in _UNIT_SUFFIXES or not number:
        raise ConfigError(f"cannot parse byte size {text!r}")
    try:
        value = float(number)
    except ValueError:
        raise ConfigError(f"cannot parse byte size {text!r}") from None
    result = int(value * _UNIT_SUFFIXES[suffix])
    if result <= 0:
        raise ConfigError(f"byte size {text!r} must be positive")
    return result


def _default_budget() -> int:
    env = os.environ.get(BUDGET_ENV_VAR)
    if env:
        return parse_bytes(env)
    return DEFAULT_BUDGET_BYTES


def _add_budget_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--memory-budget",
        metavar="BYTES",
        default=None,
        help="contraction memory budget, e.g. 8GiB (default: "
        f"${BUDGET_ENV_VAR} or 8 GiB)",
    )


def _add_circuit_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--circuit", metavar="FILE", help="circuit file to load")
    parser.add_argument("--rows", type=int, help="lattice rows (generator)")
    parser.add_argument("--cols", type=int, help="lattice columns (generator)")
    parser.add_argument("--depth", type=int, help="cycle count d of (1+d+1)")
    parser.add_argument("--seed", type=int, default=0, help="circuit seed (default 0)")


def _resolve_budget(args) -> int:
    if args.memory_budget is not None:
        return parse_bytes(args.memory_budget)
    return _default_budget()


def _load_circuit(args):
    generator_args = [args.rows, args.cols, args.depth]
    if args.circuit is not None:
        if any(v is not None for v in generator_args):
            raise ConfigError("give either --circuit or --rows/--cols/--depth, not both")
        with open(args.circuit, "r", encoding="utf-8") as fh:
            return parse_circuit(fh.read())
    if any(v is None for v in generator_args):
        raise ConfigError("need --circuit, or all of --rows --cols --depth")
    return generate_rqc(args.rows, args.cols, args.depth, args.seed)


def _random_taus(n_qubits: int, count: int, seed: int) -> list[str]:
    rng = qubit_stream(seed, _TAU_STREAM)
    return [
        "".join("01"[b] for b in rng.integers(0, 2, n_qubits)) for _ in range(count)
    ]


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _strategy_from_name(name: str) -> Strategy | None:
    if name == "auto":
        return None
    try:
        return Strategy(name)
    except ValueError:
        raise ConfigError(f"unknown strategy {name!r}") from None


def cmd_generate(args) -> int:
    circuit = generate_rqc(args.rows, args.cols, args.depth, args.seed)
    _write_output(serialize_circuit(circuit), args.output)
    return EXIT_OK


def cmd_amplitude(args) -> int:
    budget = _resolve_budget(args)
    circuit = _load_circuit(args)
    strategy = _strategy_from_name(args.strategy)
    if strategy is None and circuit.cycles is not None:
        # Refuse impossible contractions before paying for the evolution.
        plan_contraction(circuit.rows, circuit.cols, circuit.cycles, budget)
    if args.tau and args.random_amplitudes:
        raise ConfigError("give either --tau or --random-amplitudes, not both")
    if not args.tau and not args.random_amplitudes:
        raise ConfigError("need --tau or --random-amplitudes")
    state = evolve(circuit)
    n = circuit.n_qubits
    taus = list(args.tau) if args.tau else _random_taus(n, args.random_amplitudes, args.tau_seed)
    values = [
        amplitude(state, tau, budget_bytes=budget, strategy=strategy) for tau in taus
    ]
    lines = ["tau,re,im,prob"]
    for tau, v in zip(taus, values):
        lines.append(f"{tau},{v.real!r},{v.imag!r},{abs(v) ** 2!r}")
    _write_output("\n".join(lines) + "\n", args.output)
    if args.verify_oracle:
        reference = simulate_statevector(circuit, qubit_limit=args.oracle_limit)
        worst = 0.0
        for tau, v in zip(taus, values):
            worst = max(worst, relative_deviation(v, reference.amplitude(tau), n))
        stream = sys.stderr if args.output is None else sys.stdout
        print(f"max relative deviation from oracle: {worst:.3e}", file=stream)
        if worst >= 1e-10:
            print("oracle verification FAILED (>= 1e-10)", file=stream)
            return EXIT_NUMERICAL
    return EXIT_OK


def cmd_estimate(args) -> int:
    budget = _resolve_budget(args)
    if args.bristlecone is not None:
        report = estimate_cost(None, None, args.bristlecone, Strategy.BRISTLECONE)
        print("strategy,depth,space_elements,space_bytes,space_human,time_ops")
        print(
            f"bristlecone,{args.bristlecone},{report.space_elements},"
            f"{report.space_bytes},{report.human_bytes()},n/a"
        )
        return EXIT_OK
    if args.rows is None or args.cols is None or args.depth is None:
        raise ConfigError("need ROWS COLS DEPTH positionals (or --bristlecone D)")
    if args.sweep:
        return _estimate_sweep(args, budget)
    strategy = _strategy_from_name(args.strategy)
    names = (
        applicable_strategies(args.rows, args.cols) if strategy is None else [strategy]
    )
    chosen = None
    if strategy is None:
        try:
            chosen = plan_contraction(args.rows, args.cols, args.depth, budget).strategy
        except BudgetError:
            chosen = None
    print("strategy,space_elements,space_bytes,space_human,time_ops,fits_budget,chosen")
    for s in names:
        report = estimate_cost(args.rows, args.cols, args.depth, s)
        fits = report.space_bytes <= budget
        print(
            f"{s.value},{report.space_elements},{report.space_bytes},"
            f"{report.human_bytes()},{report.time_ops},{str(fits).lower()},"
            f"{str(s is chosen).lower()}"
        )
    if strategy is None and chosen is None:
        print(f"no strategy fits the budget of {format_bytes(budget)}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def _estimate_sweep(args, budget: int) -> int:
    lo, hi = args.sweep_from, args.sweep_to
    if lo is None or hi is None:
        raise ConfigError("--sweep needs --from and --to")
    step = args.sweep_step
    print("rows,cols,depth,strategy,space_elements,space_bytes,time_ops")
    for value in range(lo, hi + 1, step):
        if args.sweep == "depth":
            rows, cols, depth = args.rows, args.cols, value
        else:
            rows, cols, depth = value, value, args.depth
        for s in applicable_strategies(rows, cols):
            report = estimate_cost(rows, cols, depth, s)
            print(
                f"{rows},{cols},{depth},{s.value},{report.space_elements},"
                f"{report.space_bytes},{report.time_ops}"
            )
    return EXIT_OK


def cmd_sample(args) -> int:
    budget = _resolve_budget(args)
    circuit = _load_circuit(args)
    if bool(args.porter_thomas) == bool(args.measure_all):
        raise ConfigError("give exactly one of --porter-thomas or --measure-all")
    state = evolve(circuit)
    n = circuit.n_qubits
    if args.porter_thomas:
        taus = _random_taus(n, args.porter_thomas, args.tau_seed)
        probs = [
            abs(amplitude(state, tau, budget_bytes=budget)) ** 2 for tau in taus
        ]
        report = porter_thomas_report(probs, 2**n)
        _write_output(report.to_csv(), args.output)
        stream = sys.stderr if args.output is None else sys.stdout
        print(
            f"n={len(probs)} ks_distance={report.ks_distance:.6f} "
            f"porter_thomas={report.is_porter_thomas}",
            file=stream,
        )
        return EXIT_OK
    rng = qubit_stream(args.measure_seed, _MEASURE_STREAM)
    records = sample_measurements(state, args.shots, rng, budget_bytes=budget)
    lines = ["shot,bitstring"]
    lines.extend(f"{i},{bits}" for i, bits in enumerate(records))
    _write_output("\n".join(lines) + "\n", args.output)
    if args.output is not None:
        counts = Counter(records)
        top = counts.most_common(1)[0]
        print(f"shots={args.shots} distinct={len(counts)} mode={top[0]}:{top[1]}")
    return EXIT_OK


def cmd_verify(args) -> int:
    budget = _resolve_budget(args)
    shapes = []
    for token in args.shapes.split(","):
        try:
            r, c = token.lower().split("x")
            shapes.append((int(r), int(c)))
        except ValueError:
            raise ConfigError(f"bad shape {token!r}, expected like 3x3") from None
    depths = [int(t) for t in args.depths.split(",")]
    print("rows,cols,depth,seed,taus,max_rel_dev,status")
    failures = 0
    for rows, cols in shapes:
        for depth in depths:
            for seed in range(args.seeds):
                circuit = generate_rqc(rows, cols, depth, seed)
                state = evolve(circuit)
                reference = simulate_statevector(circuit, qubit_limit=args.oracle_limit)
                taus = _random_taus(circuit.n_qubits, args.taus, seed)
                worst = 0.0
                for tau in taus:
                    v = amplitude(state, tau, budget_bytes=budget)
                    worst = max(
                        worst,
                        relative_deviation(v, reference.amplitude(tau), circuit.n_qubits),
                    )
                ok = worst < 1e-10
                failures += 0 if ok else 1
                print(
                    f"{rows},{cols},{depth},{seed},{len(taus)},{worst:.3e},"
                    f"{'pass' if ok else 'FAIL'}"
                )
    if failures:
        print(f"{failures} grid point(s) above 1e-10", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pepsim",
        description="Exact 2-D circuit simulation on a PEPS tensor network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a random circuit file")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("amplitude", help="compute overlaps <tau|psi>")
    _add_circuit_source(p)
    p.add_argument("--tau", action="append", default=[], help="bitstring; repeatable")
    p.add_argument("--random-amplitudes", type=int, metavar="K")
    p.add_argument("--tau-seed", type=int, default=0)
    p.add_argument(
        "--strategy",
        default="auto",
        choices=["auto", "generic-rows", "square-even", "square-odd"],
    )
    p.add_argument("--verify-oracle", action="store_true")
    p.add_argument("--oracle-limit", type=int, default=24)
    p.add_argument("-o", "--output")
    _add_budget_flag(p)
    p.set_defaults(func=cmd_amplitude)

    p = sub.add_parser("estimate", help="print the contraction cost model")
    p.add_argument("rows", type=int, nargs="?")
    p.add_argument("cols", type=int, nargs="?")
    p.add_argument("depth", type=int, nargs="?")
    p.add_argument(
        "--strategy",
        default="auto",
        choices=["auto", "generic-rows", "square-even", "square-odd"],
    )
    p.add_argument("--bristlecone", type=int, metavar="DEPTH")
    p.add_argument("--sweep", choices=["depth", "size"])
    p.add_argument("--from", dest="sweep_from", type=int)
    p.add_argument("--to", dest="sweep_to", type=int)
    p.add_argument("--step", dest="sweep_step", type=int, default=1)
    _add_budget_flag(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sample", help="Porter-Thomas statistics or measurements")
    _add_circuit_source(p)
    p.add_argument("--porter-thomas", type=int, metavar="K")
    p.add_argument("--tau-seed", type=int, default=0)
    p.add_argument("--measure-all", action="store_true")
    p.add_argument("--shots", type=int, default=1)
    p.add_argument("--measure-seed", type=int, default=0)
    p.add_argument("-o", "--output")
    _add_budget_flag(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="cross-check amplitudes against brute force")
    p.add_argument("--shapes", default="2x2,2x3,3x3")
    p.add_argument("--depths", default="4,8")
    p.add_argument("--seeds", type=int, default=2)
    p.add_argument("--taus", type=int, default=25)
    p.add_argument("--oracle-limit", type=int, default=24)
    _add_budget_flag(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CircuitFormatError, FileNotFoundError, ValueError) as exc:
        print(f"pepsim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetError, TensorSizeError, QubitLimitError) as exc:
        print(f"pepsim: refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DecompositionError, MeasurementError) as exc:
        print(f"pepsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
