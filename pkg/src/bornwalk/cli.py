"""Command-line entry point; every subcommand is a thin shell over one module.

Exit codes: 0 success, 1 configuration/usage error, 2 numerical failure,
3 failed check. All stochastic output is pinned by --seed, and artifact
files only ever land under --out.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import blockop, geometry, harness, oracle, simplexwalk, wavepacket
from .errors import (
    BornwalkError,
    ConfigInvalid,
    DegenerateExpected,
    DegenerateState,
    DimensionMismatch,
    EigenFailure,
    NoActivePair,
    NonFiniteResult,
    NotHermitian,
    SizeExceeded,
    SolverFailure,
    TooManyUnabsorbed,
)
from .simplex import SimplexPoint

_CONFIG_LIKE = (ConfigInvalid, NotHermitian, DimensionMismatch)
_NUMERICAL = (
    NonFiniteResult,
    DegenerateState,
    EigenFailure,
    SolverFailure,
    SizeExceeded,
    NoActivePair,
    TooManyUnabsorbed,
    DegenerateExpected,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise _UsageError(message)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed for stochastic output")
    p.add_argument("--out", type=Path, default=None, help="directory for artifact files")
    p.add_argument("--format", choices=("json", "csv"), default=None,
                   help="stdout payload format (default per subcommand)")
    p.add_argument("--quiet", action="store_true", help="suppress diagnostics on stderr")
    p.add_argument("--threads", type=int, default=1,
                   help="parallelism hint; results are identical for any value")


def _diag(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _print_payload(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _parse_start(text: str, args) -> SimplexPoint:
    vals = [float(x) for x in text.split(",")]
    total = sum(vals)
    if any(v < 0 for v in vals):
        raise ConfigInvalid("start coordinates must be nonnegative", field="start")
    if total <= 0:
        raise ConfigInvalid("start coordinates must not all be zero", field="start")
    if abs(total - 1.0) > 1e-9:
        _diag(args, f"warning: start sums to {total:g}; auto-normalizing")
    vals = [v / total for v in vals]
    k = max(range(len(vals)), key=vals.__getitem__)
    vals[k] = 1.0 - (sum(vals) - vals[k])
    return SimplexPoint(vals)


def _parse_times(text: str) -> list[float]:
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigInvalid("time range must be start:stop:step with step > 0", field="times")
        lo, hi, dt = parts
        count = int(np.floor((hi - lo) / dt + 1e-9)) + 1
        return [lo + i * dt for i in range(count)]
    return [float(x) for x in text.split(",")]


def _write_out(args, files: dict, inputs: dict) -> None:
    """Write payload files plus a manifest under --out."""
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        if isinstance(content, str):
            (out / name).write_text(content)
        else:
            content(out / name)  # figure renderer callback
    manifest = {
        "command": args.command,
        "seed": args.seed,
        "inputs": {k: harness.canonical_digest(v) for k, v in inputs.items()},
        "outputs": sorted(files),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2))
    _diag(args, f"wrote {', '.join(sorted(files))} and manifest.json to {out}")


# --- subcommands -------------------------------------------------------------

def _cmd_born(args) -> int:
    from . import figures

    wave = wavepacket.wavefunction_from_json(Path(args.wave).read_text())
    array = geometry.DetectorArray.from_json(Path(args.array).read_text())
    problems = geometry.validate(array)
    if problems:
        raise ConfigInvalid("; ".join(str(v) for v in problems), field="array")
    quad = _quad_from_args(args)
    weights = wavepacket.born_weights(wave, array, quad)
    csv_text = wavepacket.weights_to_csv(weights)
    json_text = json.dumps({"weights": weights.tolist()}, sort_keys=True, indent=2)
    _print_payload(json_text if args.format == "json" else csv_text)
    if args.out:
        _write_out(
            args,
            {
                "weights.csv": csv_text,
                "weights.json": json_text,
                "weights.png": lambda p: figures.weights_figure(weights, p),
            },
            {"wave": json.loads(wavepacket.wavefunction_to_json(wave)),
             "array": json.loads(array.to_json())},
        )
    return 0


def _quad_from_args(args) -> wavepacket.QuadratureSpec:
    nodes = args.nodes
    if nodes:
        parts = [int(x) for x in nodes.split(",")]
        nodes = tuple(parts * 3) if len(parts) == 1 else tuple(parts)
    else:
        nodes = (48, 48, 48)
    return wavepacket.QuadratureSpec(nodes=nodes, halfwidth=args.halfwidth)


def _cmd_walk(args) -> int:
    from . import figures

    start = _parse_start(args.start, args)
    kernel = simplexwalk.parse_kernel(args.kernel)
    run = simplexwalk.run_walk(
        start, kernel, seed=args.seed, max_steps=args.max_steps, thin=args.thin
    )
    csv_text = simplexwalk.path_to_csv(run) if run.path is not None else None
    summary = {
        "seed": run.seed,
        "steps_taken": run.steps_taken,
        "absorbed_at": run.absorbed_at,
        "start": start.tolist(),
        "kernel": kernel.spec(),
    }
    json_text = json.dumps(summary, sort_keys=True, indent=2)
    _print_payload(json_text if args.format == "json" or csv_text is None else csv_text)
    _diag(args, f"absorbed at vertex {run.absorbed_at} after {run.steps_taken} steps"
          if run.absorbed_at else f"not absorbed within {run.steps_taken} steps")
    if args.out:
        files = {"walk.json": json_text}
        if csv_text is not None:
            files["path.csv"] = csv_text
            files["walk.png"] = lambda p: figures.walk_figure(run, p)
        _write_out(args, files, {"start": start.tolist(), "kernel": kernel.spec()})
    return 0


def _cmd_ensemble(args) -> int:
    from . import figures

    start = _parse_start(args.start, args)
    kernel = simplexwalk.parse_kernel(args.kernel)
    rep = simplexwalk.ensemble(
        start, kernel, count=args.count, master_seed=args.seed, max_steps=args.max_steps
    )
    json_text = rep.to_json()
    csv_lines = ["region_index,count,freq"]
    for i, (c, f) in enumerate(zip(rep.counts, rep.freq), start=1):
        csv_lines.append(f"{i},{c},{f!r}")
    csv_text = "\n".join(csv_lines) + "\n"
    _print_payload(csv_text if args.format == "csv" else json_text)
    if args.out:
        absorbed = rep.count - rep.unabsorbed
        bands = []
        for w in start:
            w = float(w)
            half = 3.0 * math.sqrt(max(w * (1.0 - w), 0.0) / absorbed)
            bands.append((w - half, w + half))
        pseudo = harness.ScenarioReport(
            scenario_name=f"ensemble start={args.start} kernel={kernel.spec()}",
            scenario_digest=harness.canonical_digest(
                {"start": start.tolist(), "kernel": kernel.spec(), "count": args.count}
            ),
            expected=start,
            ensemble=rep,
            bands_3sigma=tuple(bands),
            block_check=None,
        )
        _write_out(
            args,
            {
                "report.json": json_text + "\n",
                "report.csv": csv_text,
                "report.png": lambda p: figures.scenario_figure(pseudo, p),
            },
            {"start": start.tolist(), "kernel": kernel.spec()},
        )
    return 0


def _cmd_oracle(args) -> int:
    if args.gamblers_ruin:
        try:
            start_k = int(args.start)
        except ValueError as exc:
            raise ConfigInvalid("gambler's-ruin start must be one integer", field="start") from exc
        prob = oracle.gamblers_ruin(start_k, args.grid)
        print(f"{prob:.12g}")
        if args.out:
            _write_out(
                args,
                {"oracle.json": json.dumps(
                    {"start": start_k, "M": args.grid, "absorption_at_M": prob},
                    sort_keys=True, indent=2)},
                {"start": start_k, "M": args.grid},
            )
        return 0
    start = tuple(int(x) for x in args.start.split(","))
    chain = oracle.LatticeChain(len(start), args.grid)
    absorption = oracle.lattice_absorption(chain, start)
    json_text = oracle.absorption_to_json(chain, start, absorption)
    if args.format == "csv":
        lines = ["vertex,probability"]
        lines += [f"{i + 1},{float(p)!r}" for i, p in enumerate(absorption)]
        print("\n".join(lines))
    else:
        print(json_text)
    if args.out:
        _write_out(args, {"oracle.json": json_text}, {"start": list(start), "M": args.grid})
    return 0


def _cmd_evolve(args) -> int:
    from . import figures

    H = blockop.hamiltonian_from_json(Path(args.hamiltonian).read_text())
    state = blockop.state_from_json(Path(args.state).read_text())
    times = _parse_times(args.times)
    csv_text = blockop.trajectory_csv(H, state, times)
    coords = [
        blockop.simplex_map(blockop.evolve(H, state, t)).tolist() for t in times
    ]
    json_text = json.dumps({"times": times, "coords": coords}, sort_keys=True, indent=2)
    _print_payload(json_text if args.format == "json" else csv_text)
    if args.out:
        _write_out(
            args,
            {
                "trajectory.csv": csv_text,
                "trajectory.json": json_text,
                "trajectory.png": lambda p: figures.trajectory_figure(times, coords, p),
            },
            {"hamiltonian": json.loads(blockop.hamiltonian_to_json(H)),
             "state": json.loads(blockop.state_to_json(state))},
        )
    return 0


def _cmd_check(args) -> int:
    dims = None
    if args.dims:
        parts = [int(x) for x in args.dims.split(",")]
        if len(parts) < 3:
            raise ConfigInvalid("--dims needs m,d_1,...,d_n with n >= 2", field="dims")
        dims = blockop.Dims(m=parts[0], d=tuple(parts[1:]))
    H, dims = blockop.operator_from_json(Path(args.hamiltonian).read_text(), dims)
    if dims.n > 16:
        raise ConfigInvalid("subset sweep is capped at 16 sectors", field="dims")
    ok_form = blockop.verify_form(H, dims)
    failed_subsets = []
    for r in range(dims.n + 1):
        for w in itertools.combinations(range(1, dims.n + 1), r):
            if not blockop.check_invariance(H, dims, w):
                failed_subsets.append(list(w))
    result = {
        "verify_form": bool(ok_form),
        "subsets_checked": 2 ** dims.n,
        "failed_subsets": failed_subsets,
        "passed": bool(ok_form) and not failed_subsets,
    }
    print(json.dumps(result, sort_keys=True, indent=2))
    if args.out:
        _write_out(args, {"check.json": json.dumps(result, sort_keys=True, indent=2)},
                   {"dims": dims.to_dict()})
    return 0 if result["passed"] else 3


def _cmd_scenario(args) -> int:
    if args.two_slit:
        kernel = simplexwalk.parse_kernel(args.kernel) if args.kernel else None
        scn = harness.two_slit(
            separation=args.separation,
            sigma=args.sigma,
            kz=args.kz,
            strips=args.strips,
            extent=args.extent,
            kernel=kernel,
            walks=args.count,
            master_seed=args.seed,
        )
    elif args.file:
        scn = harness.scenario_from_json(Path(args.file).read_text())
        if args.seed_given:
            scn = harness.Scenario(
                name=scn.name, array=scn.array, wave=scn.wave, kernel=scn.kernel,
                walks=scn.walks, master_seed=args.seed, quadrature=scn.quadrature,
                max_steps=scn.max_steps, block_check=scn.block_check,
            )
    else:
        raise ConfigInvalid("scenario needs --file or --two-slit", field="scenario")
    _diag(args, f"running scenario: {scn.name} ({scn.walks} walks)")
    report = harness.run_scenario(scn, out_dir=args.out)
    _print_payload(report.to_csv() if args.format == "csv" else report.to_json())
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="bornwalk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("born",
                       help="detector weights of a wave function over an array")
    p.add_argument("--wave", required=True, help="wave-function JSON file")
    p.add_argument("--array", required=True, help="detector-array JSON file")
    p.add_argument("--nodes", default=None, help="per-axis quadrature nodes, e.g. 48 or 64,64,48")
    p.add_argument("--halfwidth", type=float, default=8.0, help="truncation half-width in sigmas")
    _common_flags(p)
    p.set_defaults(func=_cmd_born)

    p = sub.add_parser("walk", help="single walk with path dump")
    p.add_argument("--start", required=True, help="comma-separated start coordinates")
    p.add_argument("--kernel", required=True, help="pair:H or dirichlet:GAMMA[,BETA]")
    p.add_argument("--max-steps", type=int, default=simplexwalk.DEFAULT_MAX_STEPS)
    p.add_argument("--thin", type=int, default=1, help="record every k-th step")
    _common_flags(p)
    p.set_defaults(func=_cmd_walk)

    p = sub.add_parser("ensemble",
                       help="absorption frequencies over many walks")
    p.add_argument("--start", required=True)
    p.add_argument("--kernel", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=simplexwalk.DEFAULT_MAX_STEPS)
    _common_flags(p)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("oracle",
                       help="exact absorption probabilities on the lattice")
    p.add_argument("--gamblers-ruin", action="store_true",
                   help="two-vertex fair walk (start is one integer)")
    p.add_argument("--lattice", action="store_true",
                   help="simplex lattice chain (start is a composition of the grid)")
    p.add_argument("--start", required=True)
    p.add_argument("--grid", type=int, required=True, help="lattice resolution M")
    _common_flags(p)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("evolve",
                       help="sector-weight trajectory under a block operator")
    p.add_argument("--hamiltonian", required=True, help="operator JSON file")
    p.add_argument("--state", required=True, help="joint-state JSON file")
    p.add_argument("--times", required=True, help="comma list or start:stop:step")
    _common_flags(p)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("check",
                       help="sector-invariance and product-form checks on an operator")
    p.add_argument("--hamiltonian", required=True, help="operator JSON file")
    p.add_argument("--dims", default=None, help="m,d_1,...,d_n (overrides the file)")
    _common_flags(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("scenario", help="full pipeline run")
    p.add_argument("--file", default=None, help="scenario JSON file")
    p.add_argument("--two-slit", action="store_true", help="build the two-slit scenario")
    p.add_argument("--separation", type=float, default=4.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--kz", type=float, default=0.0)
    p.add_argument("--strips", type=int, default=8)
    p.add_argument("--extent", type=float, default=8.0)
    p.add_argument("--count", type=int, default=20_000, help="walks (two-slit builder)")
    p.add_argument("--kernel", default=None, help="kernel override (two-slit builder)")
    _common_flags(p)
    p.set_defaults(func=_cmd_scenario)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
        args.seed_given = any(a == "--seed" or a.startswith("--seed=") for a in argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (*_CONFIG_LIKE, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except BornwalkError as exc:  # anything else from this package
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
