"""Command-line interface: ``choi-cones {analyze,pair,gen,truncate-experiment}``.

Exit codes: 0 success, 1 input error, 2 numerical failure, 3 an Unknown
verdict under ``--strict``.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import generators, io
from .core import DimensionError, QuantumMap
from .correspondence import CyclicVector, NotCyclicError, choi_C, choi_D, pair
from .positivity import NotHermitianPreserving, SeeSawConfig, is_cp, is_cp_via_D, is_k_positive
from .schmidt import schmidt_number_bounds
from .superpos import d_norm, eb_sample_screen
from .truncation import COLUMNS, adseq, constant, convergence_run, diag_cyclic, from_list, interpolation

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_UNKNOWN = 0, 1, 2, 3


class InputError(Exception):
    pass


def parse_x0(spec: str, n: int) -> tuple[CyclicVector, str]:
    """``mes``, ``diag:p=<real>[,normalized]`` or a path to an x0/matrix JSON file."""
    if spec == "mes":
        return CyclicVector.mes(n), "mes"
    if spec.startswith("diag:"):
        opts = dict(part.partition("=")[::2] for part in spec[5:].split(","))
        try:
            p = float(opts.pop("p"))
        except (KeyError, ValueError):
            raise InputError(f"bad x0 spec {spec!r}; expected diag:p=<real>") from None
        normalized = "normalized" in opts
        opts.pop("normalized", None)
        if opts:
            raise InputError(f"unknown x0 options {sorted(opts)}")
        return diag_cyclic(n, p, normalized), spec
    path = Path(spec)
    if not path.is_file():
        raise InputError(f"x0 spec {spec!r} is neither 'mes', 'diag:p=...' nor a file")
    m, raw = io.read(path)
    if not isinstance(m, np.ndarray):
        raise InputError(f"{spec} does not hold an x0 matrix")
    if m.shape != (n, n):
        raise InputError(f"x0 is {m.shape[0]}x{m.shape[1]}, map acts on {n}x{n}")
    return CyclicVector.from_matrix(m, normalize=False), f"file:{io.digest(raw)}"


def load_map(path: str) -> tuple[QuantumMap, io.MapFile, bytes]:
    obj, raw = io.read(path)
    if not isinstance(obj, io.MapFile):
        raise InputError(f"{path} is not a map file")
    return obj.to_map(), obj, raw


class Timer:
    def __init__(self):
        self.stages: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = time.perf_counter() - t0


def _verdict_json(v) -> dict:
    out = {"k": v.k, "status": v.status.value, "achieved_min": v.achieved_min}
    if v.witness is not None:
        out["witness"] = io.encode_matrix(v.witness)
    return out


def analyze(phi: QuantumMap, x0: CyclicVector, cfg: SeeSawConfig, kmax: int, timer: Timer, eb_samples: int = 50) -> tuple[dict, bool]:
    """Full cone report for one map; every value is deterministic given ``cfg.seed``."""
    res: dict = {}
    with timer.stage("cp"):
        c, d = is_cp(phi, x0, cfg.tol), is_cp_via_D(phi, x0, cfg.tol)
        res["cp"] = {"ok": c.ok, "min_eig": c.min_eig, "min_eig_D": d.min_eig, "hermitian": c.hermitian}
    with timer.stage("k_positive"):
        kp = []
        for k in range(1, kmax + 1):
            try:
                kp.append(_verdict_json(is_k_positive(phi, k, x0, cfg)))
            except NotHermitianPreserving:
                kp.append({"k": k, "status": "not_hermitian_preserving"})
        res["k_positive"] = kp
    with timer.stage("d_norm"):
        res["d_norm"] = d_norm(phi, x0).value
    unknown = False
    with timer.stage("superpositivity"):
        if not c.ok:
            res["sn_bounds"] = None
            res["k_superpositive"] = [{"k": k, "answer": "not_applicable"} for k in range(1, kmax + 1)]
            res["entanglement_breaking"] = {"answer": "not_applicable"}
        else:
            dmat = choi_D(phi, x0)
            dmat = (dmat + dmat.conj().T) / 2
            scale = float(np.trace(dmat).real)
            if scale <= 1e-14 * max(1.0, float(np.abs(dmat).max())):
                lower, upper = 1, 1
                res["sn_bounds"] = {"lower": 1, "upper": 1, "note": "zero map"}
            else:
                bounds = schmidt_number_bounds(dmat / scale, cfg)
                lower, upper = bounds.lower, bounds.upper
                entry = {"lower": lower, "upper": upper if upper is not None else "unknown"}
                if bounds.lower_witness is not None:
                    w = bounds.lower_witness
                    entry["lower_witness"] = {"k": w.k, "kind": w.kind, "pairing": w.value}
                if bounds.upper_decomposition is not None:
                    entry["upper_terms"] = len(bounds.upper_decomposition.weights)
                    entry["upper_residual"] = bounds.upper_decomposition.residual
                res["sn_bounds"] = entry
            sp = []
            for k in range(1, kmax + 1):
                if upper is not None and upper <= k:
                    ans = "yes"
                elif lower >= k + 1:
                    ans = "no"
                else:
                    ans = "unknown"
                    unknown = True
                sp.append({"k": k, "answer": ans})
            res["k_superpositive"] = sp
            ok, worst = eb_sample_screen(phi, cfg.seed, eb_samples, cfg.tol)
            res["entanglement_breaking"] = {
                "answer": sp[0]["answer"],
                "screen_samples": eb_samples,
                "screen_ppt": ok,
                "screen_min_pt_eig": worst,
            }
    return res, unknown


def _emit(report: dict, as_table: bool, out=None):
    out = out or sys.stdout
    if not as_table:
        out.write(io.dumps(report) + "\n")
        return
    rows = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for key in sorted(obj):
                walk(f"{prefix}.{key}" if prefix else key, obj[key])
        elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
            for i, item in enumerate(obj):
                walk(f"{prefix}[{i}]", item)
        elif isinstance(obj, list):
            rows.append((prefix, f"<{len(obj)} entries>"))
        elif isinstance(obj, float):
            rows.append((prefix, io.format_float(obj)))
        else:
            rows.append((prefix, str(obj)))

    walk("", report)
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        out.write(f"{k.ljust(width)}  {v}\n")


def _config(args) -> SeeSawConfig:
    return SeeSawConfig(restarts=args.restarts, max_iters=args.max_iters, tol=args.tol, seed=args.seed, threads=args.threads)


def cmd_analyze(args) -> int:
    phi, mapfile, raw = load_map(args.map)
    x0, x0_spec = parse_x0(args.x0, phi.dim)
    kmax = args.kmax if args.kmax is not None else phi.dim
    if not 1 <= kmax <= phi.dim:
        raise InputError(f"--kmax must lie in [1, {phi.dim}]")
    cfg = _config(args)
    timer = Timer()
    results, unknown = analyze(phi, x0, cfg, kmax, timer, args.eb_samples)
    report = {
        "input": {"sha256": io.digest(raw), "dim": phi.dim, "rep": mapfile.rep, "n_pairs": phi.n_pairs},
        "x0": {"spec": x0_spec, "cond": x0.cond, "norm_sq": x0.norm_sq},
        "seed": cfg.seed,
        "budget": {**cfg.budget(), "kmax": kmax, "eb_samples": args.eb_samples},
        "results": results,
    }
    if args.timings:
        report["timings"] = timer.stages
    _emit(report, args.table)
    for name, secs in timer.stages.items():
        print(f"[timing] {name}: {secs:.3f}s", file=sys.stderr)
    return EXIT_UNKNOWN if (args.strict and unknown) else EXIT_OK


def cmd_pair(args) -> int:
    psi, _, _ = load_map(args.map_a)
    phi, _, _ = load_map(args.map_b)
    if psi.dim != phi.dim:
        raise InputError(f"maps act on different dimensions ({psi.dim} vs {phi.dim})")
    x0, _ = parse_x0(args.x0, phi.dim)
    value = pair(choi_C(psi, x0), choi_D(phi, x0))
    if args.json:
        print(io.dumps({"re": value.real, "im": value.imag}))
    elif abs(value.imag) <= 1e-12 * max(1.0, abs(value)):
        print(io.format_float(value.real))
    else:
        print(f"{io.format_float(value.real)} {io.format_float(value.imag)}")
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        kind, obj, rep = generators.generate(args.name, args.n)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    meta = {"name": args.name}
    if kind == "map":
        f = io.MapFile.from_map(obj, args.rep or rep, meta)
    else:
        if args.rep:
            raise InputError("--rep applies to maps only")
        f = io.StateFile((args.n, args.n), obj, meta)
    text = io.write(f, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def _family(args):
    spec = args.family
    base, _, arg = spec.partition(":")
    if base == "adseq":
        if args.p is None or args.eps is None:
            raise InputError("adseq needs --p and --eps")
        if args.p <= 0:
            raise InputError("--p must be positive")
        return adseq(args.p, args.eps, args.N)
    if base in ("constant", "interp"):
        if not arg:
            raise InputError(f"{base} needs a generator name or map file, e.g. {base}:depolarizing:0.5")
        if Path(arg).is_file():
            target, _, _ = load_map(arg)
        else:
            try:
                kind, target, _ = generators.generate(arg, args.dim)
            except ValueError as exc:
                raise InputError(str(exc)) from None
            if kind != "map":
                raise InputError(f"{arg} is not a map generator")
        return constant(target, args.N) if base == "constant" else interpolation(target, args.N)
    if base == "list":
        paths = [p for p in arg.split(",") if p]
        if len(paths) < 2:
            raise InputError("list needs the target followed by at least one map file")
        maps = [load_map(p)[0] for p in paths]
        return from_list(maps[1:], maps[0])
    raise InputError(f"unknown family {spec!r}; use adseq, constant:<map>, interp:<map> or list:<target>,<maps...>")


def cmd_truncate(args) -> int:
    if args.N < 1:
        raise InputError("--N must be positive")
    fam = _family(args)
    x0 = None
    if args.x0 is not None:
        x0, _ = parse_x0(args.x0, fam.dim)
    rows = convergence_run(fam, x0, args.test_size, args.seed, args.threads)
    lines = ["# " + "\t".join(COLUMNS)]
    for r in rows:
        lines.append("\t".join(str(getattr(r, c)) if c == "m" else io.format_float(getattr(r, c)) for c in COLUMNS))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _default_seed() -> int:
    raw = os.environ.get("CHOI_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"CHOI_SEED must be an integer, got {raw!r}") from None


def build_parser(default_seed: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="choi-cones", description="Generalized Choi matrices and positivity cones.")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--seed", type=int, default=default_seed, help="RNG seed (default: $CHOI_SEED or 0)")
        p.add_argument("--restarts", type=int, default=32)
        p.add_argument("--max-iters", type=int, default=200)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--threads", type=int, default=1)

    a = sub.add_parser("analyze", help="cone report for a map file")
    a.add_argument("map")
    a.add_argument("--x0", default="mes")
    a.add_argument("--kmax", type=int)
    a.add_argument("--eb-samples", type=int, default=50)
    fmt = a.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON report (default)")
    fmt.add_argument("--table", action="store_true", help="aligned key/value table")
    a.add_argument("--strict", action="store_true", help="exit 3 if any verdict is unknown")
    a.add_argument("--timings", action="store_true", help="embed stage timings in the report")
    solver_flags(a)
    a.set_defaults(func=cmd_analyze)

    p = sub.add_parser("pair", help="Tr(C_psi D_phi) for map files psi, phi")
    p.add_argument("map_a")
    p.add_argument("map_b")
    p.add_argument("--x0", default="mes")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_pair)

    g = sub.add_parser("gen", help="write a built-in map or state")
    g.add_argument("name", help=", ".join(generators.MAP_GENERATORS + generators.STATE_GENERATORS))
    g.add_argument("n", type=int)
    g.add_argument("--rep", choices=io.REPS)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("truncate-experiment", help="tabulate a convergence run")
    t.add_argument("family")
    t.add_argument("--N", type=int, default=16, help="sequence length (and dimension for adseq)")
    t.add_argument("--dim", type=int, default=2, help="dimension for generator-based families")
    t.add_argument("--p", type=float)
    t.add_argument("--eps", type=float)
    t.add_argument("--x0")
    t.add_argument("--test-size", type=int, default=20)
    t.add_argument("--seed", type=int, default=default_seed)
    t.add_argument("--threads", type=int, default=1)
    t.add_argument("--out")
    t.set_defaults(func=cmd_truncate)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser(_default_seed())
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        # LinAlgError subclasses ValueError, so it must be caught first
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, io.FormatError, DimensionError, NotCyclicError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
