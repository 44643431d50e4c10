"""``betheprep`` command line: solve, build, run, sweep, estimate, compare.

Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 no converged solution,
4 qubit cap exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .bethe import (BetheError, BetheSolution, ModelParams, format_quantum_number,
                    scan_quantum_numbers, solve_bethe)
from .builder import BuildOptions, build_circuit
from .circuit import to_text
from .pipeline import SWEEP_COLUMNS, evaluate, evaluate_row, representative_solution
from .resources import (COMPARE_COLUMNS, CSV_COLUMNS, REPETITION_POLICIES, ResourceModel,
                        alternative_costs, estimate)
from .simulator import DEFAULT_QUBIT_CAP, QubitCapError, sample_measurement, run, project_success

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_NO_SOLUTION, EXIT_CAP = 0, 1, 2, 3, 4

log = logging.getLogger("betheprep")


class UsageError(ValueError):
    pass


class NoSolutionError(RuntimeError):
    pass


# --- argument parsing --------------------------------------------------------------

def parse_int_list(text: str) -> list[int]:
    """``"40:100:10"`` (inclusive range), ``"4,6,8"`` or ``"7"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            if len(bits) not in (2, 3):
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            step = bits[2] if len(bits) == 3 else 1
            out.extend(range(bits[0], bits[1] + 1, step))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty integer list")
    return out


def parse_float_list(text: str) -> list[float]:
    vals = [float(p) for p in text.split(",") if p.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty value list")
    return vals


def parse_quantum_numbers(text: str) -> list[Fraction]:
    try:
        return [Fraction(p) for p in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_model_args(p: argparse.ArgumentParser, grid: bool = False, multi_jz: bool = False) -> None:
    p.add_argument("--L", type=parse_int_list if grid else int, help="chain length")
    p.add_argument("--M", type=parse_int_list if grid else int, help="number of down spins")
    p.add_argument("--jxy", type=float, default=1.0, help="transverse coupling (default 1)")
    p.add_argument("--jz", type=parse_float_list if multi_jz else float, default=None,
                   help="longitudinal coupling (default -0.5)" + (", comma list" if multi_jz else ""))


def _add_output_args(p: argparse.ArgumentParser, formats: tuple[str, ...]) -> None:
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=formats, default=formats[0])


def _add_solution_args(p: argparse.ArgumentParser, allow_enumerate: bool = True) -> None:
    p.add_argument("--quantum-numbers", type=parse_quantum_numbers,
                   help="I-set, e.g. '-3/2,1/2' (use --quantum-numbers=... for leading minus)")
    if allow_enumerate:
        p.add_argument("--enumerate", action="store_true", help="scan every allowed I-set")
    p.add_argument("--solution", help="solution JSON written by 'solve' (overrides model flags)")


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--amplify", type=int, default=0, metavar="N", help="amplification rounds")
    p.add_argument("--cap", type=int, default=DEFAULT_QUBIT_CAP, help="simulator qubit cap")
    p.add_argument("--seed", type=int, default=0, help="seed for the sampled herald shot")
    p.add_argument("--workers", type=int, default=1, help="parallel processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betheprep", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve the Bethe equations")
    _add_model_args(p)
    _add_solution_args(p)
    _add_output_args(p, ("json", "csv"))

    p = sub.add_parser("build", help="emit the preparation circuit")
    _add_model_args(p)
    _add_solution_args(p, allow_enumerate=False)
    p.add_argument("--amplify", type=int, default=0, metavar="N")
    p.add_argument("--edge-skip", action="store_true", help="drop faucet gates that never fire")
    p.add_argument("--reflection", choices=("mcx", "tree"), default="mcx")
    _add_output_args(p, ("circuit-text", "json"))

    p = sub.add_parser("run", help="simulate, post-select and score")
    _add_model_args(p)
    _add_solution_args(p)
    _add_sim_args(p)
    _add_output_args(p, ("json", "csv"))

    p = sub.add_parser("sweep", help="enumerate and simulate every solution per J_z value")
    _add_model_args(p, multi_jz=True)
    _add_sim_args(p)
    _add_output_args(p, ("csv", "json"))

    for name, text in (("estimate", "gate/T-count rows over an (L, M) grid"),
                       ("compare", "estimate rows plus alternative-method counts")):
        p = sub.add_parser(name, help=text)
        _add_model_args(p, grid=True)
        p.add_argument("--epsilon", type=float, default=1e-10, help="rotation synthesis error")
        p.add_argument("--repetitions", choices=REPETITION_POLICIES, default="worst_case_factorial")
        p.add_argument("--success-probability", type=float, default=None,
                       help="p for the 'measured' repetition policy")
        p.add_argument("--edge-skip", action="store_true")
        _add_output_args(p, ("csv", "json"))
    return parser


# --- helpers -------------------------------------------------------------------------

def _jz(args, default: float = -0.5):
    return default if args.jz is None else args.jz


def _params(args) -> ModelParams:
    if args.L is None or args.M is None:
        raise UsageError("--L and --M are required")
    return ModelParams(args.L, args.M, args.jxy, _jz(args))


def _load_solution(path: str) -> BetheSolution:
    with open(path) as fh:
        doc = json.load(fh)
    if "solutions" in doc:
        if len(doc["solutions"]) != 1:
            raise UsageError(f"{path} holds {len(doc['solutions'])} solutions; pick one")
        doc = doc["solutions"][0]
    return BetheSolution.from_json(doc)


def _single_solution(args) -> BetheSolution:
    if getattr(args, "solution", None):
        sol = _load_solution(args.solution)
    else:
        if args.quantum_numbers is None:
            raise UsageError("give --quantum-numbers, --solution or --enumerate")
        sol = solve_bethe(_params(args), args.quantum_numbers)
    if not sol.converged:
        raise NoSolutionError(
            f"I-set {[format_quantum_number(q) for q in sol.quantum_numbers]} did not converge "
            f"(residual {sol.residual:.3g})")
    return sol


def _solutions(args) -> list[BetheSolution]:
    if getattr(args, "enumerate", False):
        sols = [s for _, s, st in scan_quantum_numbers(_params(args)) if st == "ok"]
        if not sols:
            raise NoSolutionError("no converged solution in the enumeration range")
        return sols
    return [_single_solution(args)]


def _csv_text(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(args, text: str) -> None:
    if args.out == "-":
        sys.stdout.write(text)
        return
    with open(args.out, "w") as fh:
        fh.write(text)


def _map(fn, items, workers: int) -> list:
    # executor.map keeps input order, so output is independent of completion order
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- commands ------------------------------------------------------------------------

SOLVE_COLUMNS = ("L", "M", "j_xy", "j_z", "quantum_numbers", "momenta", "residual", "status")


def cmd_solve(args) -> int:
    if args.enumerate:
        records = []
        for qs, sol, status in scan_quantum_numbers(_params(args)):
            rec = {"quantum_numbers": [format_quantum_number(q) for q in qs], "status": status}
            if sol is not None:
                rec["residual"] = float(sol.residual)
                if status == "ok":
                    rec = dict(sol.to_json(), status=status)
            records.append(rec)
        sols = [r for r in records if r["status"] == "ok"]
        rejected = [r for r in records if r["status"] != "ok"]
        p = _params(args)
        doc = {"L": p.L, "M": p.M, "j_xy": p.j_xy, "j_z": p.j_z, "solutions": sols, "rejected": rejected}
    else:
        sol = _single_solution(args)
        sols = [dict(sol.to_json(), status="ok")]
        rejected = []
        doc = sols[0]
    if args.format == "json":
        _emit(args, _json_text(doc))
    else:
        rows = []
        for r in sols + rejected:
            rows.append({
                "L": args.L, "M": args.M, "j_xy": args.jxy, "j_z": _jz(args),
                "quantum_numbers": " ".join(r["quantum_numbers"]),
                "momenta": " ".join(format(k, ".12g") for k in r.get("momenta", [])),
                "residual": format(r["residual"], ".3g") if "residual" in r else "",
                "status": r["status"],
            })
        _emit(args, _csv_text(rows, SOLVE_COLUMNS))
    if not sols:
        raise NoSolutionError("no converged solution in the enumeration range")
    return EXIT_OK


def cmd_build(args) -> int:
    sol = _single_solution(args)
    opts = BuildOptions(amplification_rounds=args.amplify, edge_skip=args.edge_skip,
                        reflection=args.reflection)
    circ = build_circuit(sol, opts)
    if args.format == "circuit-text":
        _emit(args, to_text(circ))
    else:
        rep = estimate(circ)
        _emit(args, _json_text({"layout": circ.layout.header(), "gates": len(circ),
                                "counts": rep.counts, "depth": rep.depth, "qubits": rep.qubits}))
    return EXIT_OK


def _run_one(job) -> dict:
    sol, rounds, cap, seed = job
    opts = BuildOptions(amplification_rounds=rounds)
    circ = build_circuit(sol, opts)
    out = evaluate(sol, rounds, cap)
    # one sampled herald shot, reproducible from the seed
    state = run(circ, cap=cap)
    shot = sample_measurement(state, list(circ.layout.perm_label), seed)
    p = sol.params
    return out.to_json(
        L=p.L, M=p.M, j_xy=p.j_xy, j_z=p.j_z,
        quantum_numbers=[format_quantum_number(q) for q in sol.quantum_numbers],
        amplification_rounds=rounds, seed=seed, herald_shot=shot,
        herald_success=set(shot) <= {"0"},
    )


def _check_cap(sol: BetheSolution, rounds: int, cap: int) -> None:
    from .builder import layout_for
    n = layout_for(sol.params.L, sol.params.M, BuildOptions(amplification_rounds=rounds)).total
    if n > cap:
        raise QubitCapError(
            f"L={sol.params.L}, M={sol.params.M} needs {n} qubits but the cap is {cap}; "
            f"pass --cap {n} to simulate anyway")


def cmd_run(args) -> int:
    sols = _solutions(args)
    for s in sols:
        _check_cap(s, args.amplify, args.cap)
    docs = _map(_run_one, [(s, args.amplify, args.cap, args.seed) for s in sols], args.workers)
    if args.format == "json":
        _emit(args, _json_text(docs[0] if len(docs) == 1 and not args.enumerate else docs))
    else:
        rows = [dict(d, quantum_numbers=" ".join(d["quantum_numbers"]),
                     energy=format(d["energy"], ".12g") if d["energy"] is not None else "",
                     status="ok") for d in docs]
        _emit(args, _csv_text(rows, SWEEP_COLUMNS))
    return EXIT_OK


def _sweep_job(job):
    sol, rounds, cap = job
    return evaluate_row(sol, rounds, cap)


def cmd_sweep(args) -> int:
    if args.L is None or args.M is None:
        raise UsageError("--L and --M are required")
    jzs = _jz(args, default=[-0.5])
    jobs = []
    for jz in jzs:
        params = ModelParams(args.L, args.M, args.jxy, jz)
        for qs, sol, status in scan_quantum_numbers(params):
            if status == "ok":
                jobs.append((sol, args.amplify, args.cap))
            else:
                log.info("J_z=%g I=%s skipped: %s", jz, [str(q) for q in qs], status)
    if not jobs:
        raise NoSolutionError("no converged solution for any J_z value")
    _check_cap(jobs[0][0], args.amplify, args.cap)
    rows = [r.csv_row() for r in _map(_sweep_job, jobs, args.workers)]
    if args.format == "csv":
        _emit(args, _csv_text(rows, SWEEP_COLUMNS))
    else:
        _emit(args, _json_text(rows))
    return EXIT_OK


def _estimate_rows(args, with_compare: bool) -> list[dict]:
    if args.L is None or args.M is None:
        raise UsageError("--L and --M are required")
    model = ResourceModel(epsilon=args.epsilon, repetitions=args.repetitions,
                          success_probability=args.success_probability)
    jz = _jz(args)
    rows = []
    for M in args.M:
        for L in args.L:
            if L < max(M, 2):
                continue
            sol = representative_solution(L, M, args.jxy, jz)
            if not sol.converged:
                raise NoSolutionError(f"reference solution did not converge at L={L}, M={M}")
            circ = build_circuit(sol, BuildOptions(edge_skip=args.edge_skip))
            row = estimate(circ, model).csv_row()
            if with_compare:
                row.update(alternative_costs(L, M))
            rows.append(row)
    return rows


def cmd_estimate(args, with_compare: bool = False) -> int:
    rows = _estimate_rows(args, with_compare)
    cols = CSV_COLUMNS + (COMPARE_COLUMNS if with_compare else ())
    if args.format == "csv":
        _emit(args, _csv_text(rows, cols))
    else:
        _emit(args, _json_text(rows))
    return EXIT_OK


def cmd_compare(args) -> int:
    return cmd_estimate(args, with_compare=True)


COMMANDS = {
    "solve": cmd_solve, "build": cmd_build, "run": cmd_run, "sweep": cmd_sweep,
    "estimate": cmd_estimate, "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except QubitCapError as exc:
        print(f"betheprep: {exc}", file=sys.stderr)
        return EXIT_CAP
    except NoSolutionError as exc:
        print(f"betheprep: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except OSError as exc:
        print(f"betheprep: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, BetheError, ValueError, KeyError) as exc:
        print(f"betheprep: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
