"""Command-line front end.

Exit codes: 0 success, 1 verification or solver failure, 2 usage or
validation error. Messages for failures go to standard error.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from . import _backend
from .compare import compare_modes, format_table, write_table_csv
from .framelet import dct_bank, dhf_bank, verify_tffb
from .imagecore import ImageError, format_from_suffix, make_synthetic, read_image, write_image
from .metrics import psnr, quality
from .sim import KERNELS, DegradationSpec, degrade
from .solver import (ConfigError, DivergenceError, SolverConfig, SolverError, restore,
                     write_history_csv)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FRAME_TOL = 1e-10
RESTORE_MODES = ("tntf", "tv-aniso", "tv-iso", "dct", "dhf+dct")

log = logging.getLogger("tntf")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on its own errors; keep that but route through here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _csv_list(text, convert=str):
    items = [t.strip() for t in text.split(",") if t.strip()]
    try:
        return [convert(t) for t in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _float_list(text):
    return _csv_list(text, float)


def _load_truth(spec):
    """A file path, or ``synthetic:KIND:SIZE[:SEED]``."""
    if spec.startswith("synthetic:"):
        parts = spec.split(":")
        if len(parts) not in (3, 4):
            raise UsageError("synthetic truth must be synthetic:KIND:SIZE[:SEED]")
        try:
            size = int(parts[2])
            seed = int(parts[3]) if len(parts) == 4 else 0
        except ValueError as exc:
            raise UsageError(f"bad synthetic spec {spec!r}: {exc}") from exc
        return make_synthetic(parts[1], size, seed)
    return read_image(spec)


def write_manifest(path, manifest):
    Path(path).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def manifest_path(out):
    out = Path(out)
    return out.with_name(out.name + ".json")


def cmd_synth(args):
    img = make_synthetic(args.kind, args.size, args.seed)
    write_image(img, args.out, format_from_suffix(args.out))
    return EXIT_OK


def cmd_degrade(args):
    spec = DegradationSpec(args.sigma, args.seed, args.kernel)
    u = read_image(args.input)
    if min(u.shape) < 5:
        raise ValueError("image must be at least 5x5")
    z = degrade(u, spec)
    write_image(z, args.out, format_from_suffix(args.out))
    sidecar = Path(args.out).with_name(Path(args.out).name + ".txt")
    sidecar.write_text(f"kernel={spec.kernel}\nsigma={spec.sigma!r}\nseed={spec.seed}\n"
                       f"input={args.input}\n")
    return EXIT_OK


def cmd_restore(args):
    cfg = SolverConfig(gamma=args.gamma, delta=args.delta, max_iters=args.max_iters,
                       rel_tol=args.tol, base_lambda=args.lam,
                       sigma=args.sigma if args.sigma is not None else 0.0,
                       mode=args.mode, freeze_params=args.freeze_params, seed=args.seed)
    if cfg.mode in ("tntf", "dct-only", "dhf+dct") and args.sigma is None:
        raise ConfigError(f"--sigma is required for mode {args.mode}")
    if cfg.mode != "dct-only" and not cfg.base_lambda > 0:
        raise ConfigError("--lambda must be positive")
    truth = read_image(args.truth) if args.truth else None
    z = read_image(args.input)

    t0 = time.perf_counter()
    result = restore(z, cfg)
    wall = time.perf_counter() - t0
    write_image(result.image, args.out, format_from_suffix(args.out))
    if args.history:
        write_history_csv(result.history, args.history)

    manifest = {
        "command": "restore",
        "parameters": cfg.as_dict(),
        "input": str(args.input),
        "output": str(args.out),
        "history": str(args.history) if args.history else None,
        "iterations": result.iterations,
        "converged": result.converged,
        "effective_delta": result.delta_used,
        "lipschitz": result.lipschitz,
        "backend": _backend.name,
        "wall_time_seconds": wall,
        "version": __version__,
    }
    if truth is not None:
        rep = quality(truth, result.image)
        manifest["truth"] = str(args.truth)
        manifest["metrics"] = {"psnr_db": rep.psnr_db, "ssim": rep.ssim}
        print(rep)
    write_manifest(args.manifest or manifest_path(args.out), manifest)
    return EXIT_OK


def cmd_metrics(args):
    ref, test = read_image(args.ref), read_image(args.test)
    if ref.shape != test.shape:
        raise ValueError(f"image sizes differ: {ref.shape} vs {test.shape}")
    print(quality(ref, test))
    return EXIT_OK


def cmd_verify_frames(args):
    if args.grid < 8:
        raise UsageError("--grid must be at least 8")
    bank = dhf_bank() if args.bank == "dhf" else dct_bank()
    res = verify_tffb(bank, args.grid)
    print(f"bank: {args.bank}  grid: {args.grid}")
    print(f"max tffb residual:              {res['max_tffb_residual']:.3e}")
    print(f"max partition-of-unity residual: {res['max_pou_residual']:.3e}")
    # the DCT bank is only claimed to satisfy partition of unity
    checked = [res["max_pou_residual"]]
    if args.bank == "dhf":
        checked.append(res["max_tffb_residual"])
    ok = max(checked) <= FRAME_TOL
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_compare(args):
    if not args.modes:
        raise UsageError("--modes must list at least one mode")
    for m in args.modes:
        if m not in RESTORE_MODES and m != "dct-only":
            raise UsageError(f"unknown mode {m!r}")
    if not args.lambda_grid:
        raise UsageError("--lambda-grid must list at least one value")
    truth = _load_truth(args.truth)
    base = SolverConfig(max_iters=args.max_iters, rel_tol=args.tol)
    z, results = compare_modes(truth, args.sigma, args.seed, args.modes, args.lambda_grid, base)
    print(format_table(results, observed_psnr=psnr(truth, z)))
    if args.csv:
        write_table_csv(results, args.csv)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="tntf", description="Tight-framelet image restoration.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log every 30 iterations")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="write a synthetic test image")
    s.add_argument("--kind", default="square-circle", choices=("square-circle", "ramp-disk"))
    s.add_argument("--size", type=int, default=128)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("degrade", help="blur and add seeded Gaussian noise")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--kernel", default="average5", choices=sorted(KERNELS))
    s.set_defaults(func=cmd_degrade)

    s = sub.add_parser("restore", help="restore a degraded image")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--mode", default="tntf", choices=RESTORE_MODES)
    s.add_argument("--lambda", dest="lam", type=float, default=2e-4)
    s.add_argument("--sigma", type=float, default=None,
                   help="noise level; required by the modes with a DCT level")
    s.add_argument("--gamma", type=float, default=1.99)
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--max-iters", type=int, default=400)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--history", default=None, help="per-iteration CSV")
    s.add_argument("--freeze-params", action="store_true")
    s.add_argument("--seed", type=int, default=0, help="seed for the norm estimates")
    s.add_argument("--truth", default=None, help="ground truth for metrics in the manifest")
    s.add_argument("--manifest", default=None, help="default: OUT.json")
    s.set_defaults(func=cmd_restore)

    s = sub.add_parser("metrics", help="PSNR and SSIM of a test image")
    s.add_argument("--ref", required=True)
    s.add_argument("--test", required=True)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("verify-frames", help="check filter bank identities")
    s.add_argument("--bank", required=True, choices=("dhf", "dct"))
    s.add_argument("--grid", type=int, default=64)
    s.set_defaults(func=cmd_verify_frames)

    s = sub.add_parser("compare", help="restore under several modes with lambda grid search")
    s.add_argument("--truth", required=True, help="image path or synthetic:KIND:SIZE[:SEED]")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--modes", type=_csv_list, required=True)
    s.add_argument("--lambda-grid", type=_float_list, required=True)
    s.add_argument("--max-iters", type=int, default=400)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--csv", default=None, help="also write the table here")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tntf {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"tntf {args.command}: solver failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ImageError, ConfigError, SolverError, ValueError, OSError) as exc:
        print(f"tntf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
