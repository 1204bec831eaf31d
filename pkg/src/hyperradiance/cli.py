"""Command-line interface.

All rates and frequencies are given in units of the atomic decay rate kappa.
Exit codes: 0 success, 1 validation failure, 2 invalid arguments or config,
3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .errors import SolverError
from .liouville import coupled_splitting, dressed_spectrum
from .model import CONVENTIONS, ModelParams
from .outputs import build_manifest, write_csv, write_json, write_manifest, write_matrices
from .sweep import PRESETS, SweepConfig, preset, run_point, sweep_2d, sweep_detuning
from .validation import run_checks

log = logging.getLogger("hyperradiance")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _cutoffs(text: str):
    if text == "auto":
        return "auto"
    try:
        nc, nm = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or 'Nc,Nm', got {text!r}") from None
    if nc < 1 or nm < 1:
        raise argparse.ArgumentTypeError("cutoffs must be >= 1")
    return (nc, nm)


def _atoms(text: str) -> tuple[int, ...]:
    return {"1": (1,), "2": (2,), "both": (1, 2)}[text]


def cmd_point(args) -> int:
    # the grid is unused for a single point
    config = SweepConfig(
        delta_range=(args.delta - 1.0, args.delta + 1.0, 2),
        j_values=[args.j],
        omega=args.omega,
        gamma_c=args.gamma_c,
        gamma_m=args.gamma_m,
        cutoffs=args.cutoffs,
        convention=args.convention,
        transpose=args.transpose,
        atoms=_atoms(args.atoms),
    )
    try:
        rec = run_point(args.delta, args.j, config)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = rec.to_dict()
    out["dissipator_convention"] = args.convention
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _load_config(args) -> SweepConfig:
    if bool(args.config) == bool(args.preset):
        raise UsageError("give exactly one of --config or --preset")
    if args.preset:
        config = preset(args.preset)
    else:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        config = SweepConfig.from_dict(data)
    if args.cutoffs is not None:
        config.cutoffs = args.cutoffs
    if args.convention is not None:
        config.convention = args.convention
    if args.workers is not None:
        config.workers = args.workers
    config.__post_init__()
    return config


def cmd_sweep(args) -> int:
    try:
        config = _load_config(args)
    except (UsageError, ValueError, TypeError, KeyError) as exc:
        print(f"error: invalid sweep configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    prefix = args.out
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    files = []
    if config.kind == "map":
        grid = sweep_2d(config)
        records = [r for row in grid for r in row]
        files.extend(write_matrices(prefix, grid))
    else:
        records = sweep_detuning(config)
    if args.format == "csv":
        files.insert(0, write_csv(Path(f"{prefix}.csv"), records))
    else:
        files.insert(0, write_json(Path(f"{prefix}.json"), records, config))
    manifest = build_manifest(config, records, files, time.perf_counter() - t0)
    write_manifest(prefix, manifest)
    failed = manifest["n_failed"]
    print(f"wrote {len(records)} points to {files[0]} ({failed} failed)")
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_dressed(args) -> int:
    p = ModelParams(
        delta=args.delta, j_coupling=args.j, omega_pump=0.0,
        n_atoms=int(args.atoms), cavity_cutoff=2, mech_cutoff=2,
    )
    space = p.space()
    pairs = dressed_spectrum(p, space)
    split = coupled_splitting(pairs, space)
    if args.json:
        levels = []
        for energy, vecr in pairs:
            amps = {space.label(space.levels(k)): [a.real, a.imag] for k, a in enumerate(vecr) if abs(a) > 1e-12}
            levels.append({"energy": energy, "amplitudes": amps})
        print(json.dumps({"n_atoms": p.n_atoms, "j": args.j, "delta": args.delta,
                          "levels": levels, "splitting": split}, indent=2))
        return EXIT_OK
    print(f"one-excitation manifold: n_atoms={p.n_atoms}, J={args.j:g}, delta={args.delta:g}")
    for energy, vecr in pairs:
        terms = [
            f"{a.real:+.6f}{space.label(space.levels(k))}"
            for k, a in enumerate(vecr)
            if abs(a) > 1e-12
        ]
        print(f"  {energy:+12.6f}   {' '.join(terms)}")
    print(f"splitting: {split:.6f}")
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_checks(convention=args.convention, quick=args.quick)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL")
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperradiance",
        description="Steady-state photon/phonon statistics, entanglement and radiance "
        "of one or two qubits in a tripartite optomechanical system.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="solve one (delta, J) point")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--j", type=float, required=True)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--gamma-c", type=float, default=10.0)
    p.add_argument("--gamma-m", type=float, default=10.0)
    p.add_argument("--atoms", choices=["1", "2", "both"], default="both")
    p.add_argument("--cutoffs", type=_cutoffs, default="auto", help="'auto' or 'Nc,Nm'")
    p.add_argument("--convention", choices=CONVENTIONS, default="paper")
    p.add_argument("--transpose", choices=["photon", "phonon"], default="photon")
    p.set_defaults(func=cmd_point)

    s = sub.add_parser("sweep", help="run a detuning sweep or a (J, delta) map")
    s.add_argument("--config", help="JSON file with SweepConfig fields")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--out", required=True, help="output path prefix")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.add_argument("--workers", type=int, default=_env_workers())
    s.add_argument("--cutoffs", type=_cutoffs, default=None)
    s.add_argument("--convention", choices=CONVENTIONS, default=None)
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("dressed", help="print the one-excitation dressed states")
    d.add_argument("--j", type=float, required=True)
    d.add_argument("--atoms", choices=["1", "2"], default="1")
    d.add_argument("--delta", type=float, default=0.0)
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_dressed)

    v = sub.add_parser("validate", help="run the built-in oracle checks")
    v.add_argument("--convention", choices=CONVENTIONS, default="paper")
    v.add_argument("--quick", action="store_true", help="skip the time-evolution oracle")
    v.set_defaults(func=cmd_validate)
    return parser


def _env_workers() -> int | None:
    raw = os.environ.get("HYPERRADIANCE_WORKERS")
    return int(raw) if raw and raw.isdigit() and int(raw) > 0 else None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
