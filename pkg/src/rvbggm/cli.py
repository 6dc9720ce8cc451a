"""Command-line front end: ``rvbggm {coverings,ggm,sweep,fit,certify}``.

Exit codes: 0 ok, 2 bad input, 3 I/O failure, 4 over a size cap, 5 degenerate
or under-determined fit, 1 anything else.

Every output embeds the run configuration, a content hash of the inputs, the
seed and the tool version. Output paths and the worker count are not part of
the embedded configuration, so reruns are byte-identical wherever they write.
Wall-clock times are only written with ``--record-timings``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .dmrm import DmrmHandle, build_base_states, derive_alpha_basis, dump_table_json, recurse_inner_products
from .errors import CapExceeded, FitError, InputError, RvbError, TooLargeForExhaustive
from .ggm import (
    CERTIFY_TOL,
    DEFAULT_EXHAUSTIVE_CAP,
    Family,
    certify_genuine_entanglement,
    ggm_exact,
    ggm_restricted,
    random_ssa_trials,
)
from .lattice import LatticeSpec, covering_count_transfer, enumerate_coverings, format_coverings
from .scaling import curve_points, extrapolate, fit_scaling, read_samples_csv
from .statevec import build_rvb, dump_state_json

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_CAP, EXIT_FIT, EXIT_OTHER = 0, 2, 3, 4, 5, 1

DEFAULT_CAP_MP = 12
DEFAULT_COVERING_CAP = 1_000_000
DEFAULT_SSA_TRIALS = 200
TOL_AGREE = 1e-9
TOL_SSA = 1e-10
DEFAULT_RESTRICTED = "single_site,adjacent_column_pairs,site_pairs"
DEFAULT_SWEEP_RESTRICTED = "single_site,nearest_neighbor_pairs"

SWEEP_COLUMNS = ("n_total", "family", "G", "lambda_sq", "partition_family", "wall_time",
                 "m", "mp", "bc", "search", "status")

GLOBAL_DEFAULTS = {
    "m": None,
    "mp": None,
    "bc": None,
    "restricted": False,
    "cap_exhaustive": DEFAULT_EXHAUSTIVE_CAP,
    "cap_mp": DEFAULT_CAP_MP,
    "seed": 0,
    "out": None,
    "tol_certify": CERTIFY_TOL,
    "tol_agree": TOL_AGREE,
    "tol_ssa": TOL_SSA,
    "record_timings": False,
    "jobs": 1,
}

# keys that change where results go, not what they are
_UNEMBEDDED = {"out", "plot_out", "input", "dump_state", "dump_table", "jobs", "handler"}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, InputError):
        return EXIT_INPUT
    if isinstance(exc, CapExceeded):
        return EXIT_CAP
    if isinstance(exc, FitError):
        return EXIT_FIT
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_OTHER


# ---------------------------------------------------------------------------
# provenance


def git_blob_hash(data: bytes) -> str:
    """SHA-1 in the form git uses for blob objects."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def embedded_config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _UNEMBEDDED}


def provenance(args: argparse.Namespace, inputs: bytes = b"") -> dict:
    config = embedded_config(args)
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return {
        "config": config,
        "input_hash": git_blob_hash(canonical + inputs),
        "seed": args.seed,
        "version": __version__,
    }


def meta_comment_lines(meta: dict) -> list[str]:
    return [
        "config=" + json.dumps(meta["config"], sort_keys=True, separators=(",", ":")),
        f"input_hash={meta['input_hash']}",
        f"seed={meta['seed']}",
        f"version={meta['version']}",
    ]


def to_json(payload: dict, meta: dict) -> str:
    return json.dumps({**payload, "meta": meta}, sort_keys=True, indent=2) + "\n"


def emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# helpers


def _spec(args: argparse.Namespace, default_bc: str = "open") -> LatticeSpec:
    if args.m is None or args.mp is None:
        raise InputError("--m and --mp are required")
    spec = LatticeSpec(args.m, args.mp, args.bc or default_bc)
    args.bc = spec.boundary.value  # embed the effective boundary
    return spec


def _families(text: str) -> list[Family]:
    fams = [Family.parse(t) for t in text.split(",") if t.strip()]
    if not fams:
        raise InputError("empty family list")
    return fams


class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.times: dict[str, float] = {}

    def run(self, name: str, fn: Callable, *a, **kw):
        start = time.perf_counter()
        out = fn(*a, **kw)
        if self.enabled:
            self.times[name] = time.perf_counter() - start
        return out


# ---------------------------------------------------------------------------
# commands


def cmd_coverings(args: argparse.Namespace) -> int:
    spec = _spec(args)
    count = covering_count_transfer(spec)
    if count > args.cap_coverings:
        raise CapExceeded(f"{spec.label} has {count} coverings, above --cap-coverings {args.cap_coverings}")
    covs = enumerate_coverings(spec)
    meta = provenance(args)
    lines = [f"count={len(covs)}"] + meta_comment_lines(meta)
    emit(format_coverings(spec, covs, lines), args.out)
    return EXIT_OK


def _restricted_result(spec: LatticeSpec, families: list[Family], state=None):
    handle = DmrmHandle(spec)
    usable = handle.supported(families)
    if usable:
        return ggm_restricted(handle, usable)
    if state is not None:
        return ggm_restricted(state, families, spec)
    raise CapExceeded(f"no requested family can be evaluated for {spec.label}")


def cmd_ggm(args: argparse.Namespace) -> int:
    spec = _spec(args)
    families = _families(args.families)
    clock = _Clock(args.record_timings)
    report: dict = {"lattice": {"m": spec.m, "mp": spec.m_prime, "bc": spec.boundary.value,
                                "num_sites": spec.num_sites}}
    if args.dump_table:
        _write_table(spec.m_prime, args)
    if spec.num_sites <= args.cap_exhaustive:
        state = clock.run("build_rvb", build_rvb, spec)
        exact = clock.run("ggm_exact", ggm_exact, state, args.cap_exhaustive)
        report["exact"] = exact.to_dict()
        report.update(value=exact.value, search="exhaustive",
                      achieving_partition=exact.achieving_partition.to_list())
        if not args.skip_certify:
            cert = clock.run("certify", certify_genuine_entanglement, state, args.cap_exhaustive, args.tol_certify)
            report["certification"] = cert.to_dict()
        if args.restricted:
            restricted = clock.run("ggm_restricted", _restricted_result, spec, families, state)
            report["restricted"] = restricted.to_dict()
            report["agreement"] = bool(abs(restricted.value - exact.value) <= args.tol_agree)
            report["restricted_is_upper_bound"] = bool(restricted.value >= exact.value - args.tol_agree)
        if args.dump_state:
            emit(_state_text(state, args), args.dump_state)
    else:
        if not args.restricted:
            raise TooLargeForExhaustive(
                f"{spec.num_sites} sites exceed --cap-exhaustive {args.cap_exhaustive}; pass --restricted"
            )
        if spec.m_prime > args.cap_mp:
            raise CapExceeded(f"m_prime={spec.m_prime} exceeds --cap-mp {args.cap_mp}")
        restricted = clock.run("ggm_restricted", _restricted_result, spec, families)
        report["restricted"] = restricted.to_dict()
        report.update(value=restricted.value, search="restricted",
                      achieving_partition=restricted.achieving_partition.to_list())
    if args.record_timings:
        report["timings"] = clock.times
    emit(to_json(report, provenance(args)), args.out)
    return EXIT_OK


def _state_text(state, args) -> str:
    payload = json.loads(dump_state_json(state))
    payload["meta"] = provenance(args)
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _write_table(height: int, args: argparse.Namespace) -> None:
    if height % 2:
        raise InputError("recursion tables exist for even column heights only")
    table = recurse_inner_products(derive_alpha_basis(build_base_states(height)), args.table_n_max)
    payload = json.loads(dump_table_json(table))
    emit(to_json(payload, provenance(args)), args.dump_table)


def cmd_certify(args: argparse.Namespace) -> int:
    spec = _spec(args)
    if spec.num_sites > args.cap_exhaustive:
        raise TooLargeForExhaustive(
            f"{spec.num_sites} sites exceed --cap-exhaustive {args.cap_exhaustive}"
        )
    state = build_rvb(spec)
    cert = certify_genuine_entanglement(state, args.cap_exhaustive, args.tol_certify)
    rng = np.random.default_rng(args.seed)
    trials = random_ssa_trials(state, args.ssa_trials, rng, cap=None) if args.ssa_trials else []
    slacks = [t["slack"] for t in trials]
    report = {
        **cert.to_dict(),
        "lattice": {"m": spec.m, "mp": spec.m_prime, "bc": spec.boundary.value, "num_sites": spec.num_sites},
        "ssa": {
            "trials": len(trials),
            "min_slack": min(slacks) if slacks else None,
            "all_nonnegative": all(s >= -args.tol_ssa for s in slacks),
            "tolerance": args.tol_ssa,
        },
    }
    emit(to_json(report, provenance(args)), args.out)
    return EXIT_OK


# -- sweep ----------------------------------------------------------------


def sweep_points(m_min: int, m_max: int, kinds: Sequence[str], cap_mp: int) -> list[tuple[str, int, int]]:
    """Canonical list of (family, m, m_prime) sweep points, ordered by size."""
    pts = []
    for m in range(m_min + m_min % 2, m_max + 1, 2):
        if "perfect" in kinds and m <= cap_mp:
            pts.append(("perfect", m, m))
        if "imperfect" in kinds:
            pts.extend(("imperfect", m, mp) for mp in (m - 1, m + 1) if 1 <= mp <= cap_mp)
    return sorted(pts, key=lambda p: (p[1] * p[2], p[0], p[1]))


def _sweep_point(task: tuple) -> dict:
    family, m, mp, bc, cap_exhaustive, families, timed = task
    row = {"n_total": m * mp, "family": family, "m": m, "mp": mp, "bc": bc}
    start = time.perf_counter()
    try:
        spec = LatticeSpec(m, mp, bc)
        if spec.num_sites <= cap_exhaustive:
            res = ggm_exact(build_rvb(spec), cap_exhaustive)
            fam = "all_bipartitions"
        else:
            res = _restricted_result(spec, [Family.parse(f) for f in families.split(",")])
            fam = res.achieving_family.value
        row.update(G=repr(res.value), lambda_sq=repr(res.lambda_sq_max), partition_family=fam,
                   search=res.search, status="ok")
    except RvbError as exc:
        row.update(G="NA", lambda_sq="NA", partition_family="NA", search="NA",
                   status=f"error:{type(exc).__name__}", _exit=exit_code_for(exc))
    row["wall_time"] = repr(time.perf_counter() - start) if timed else "NA"
    return row


def cmd_sweep(args: argparse.Namespace) -> int:
    bc = args.bc = args.bc or "ph"
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    bad = set(kinds) - {"perfect", "imperfect"}
    if bad:
        raise InputError(f"unknown lattice families {sorted(bad)}")
    m_min = args.m_min if args.m is None else args.m
    m_max = args.m_max if args.m is None else args.m
    points = sweep_points(m_min, m_max, kinds, args.cap_mp)
    if not points:
        raise InputError("empty sweep range")
    _families(args.families)
    tasks = [(f, m, mp, bc, args.cap_exhaustive, args.families, args.record_timings) for f, m, mp in points]
    meta = provenance(args)
    header = "".join(f"# {line}\n" for line in meta_comment_lines(meta))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    sink = open(args.out, "w", encoding="utf-8") if args.out not in (None, "-") else sys.stdout
    codes = []
    try:
        sink.write(header + buf.getvalue())
        sink.flush()
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                rows = pool.map(_sweep_point, tasks)  # map preserves the canonical order
                for row in rows:
                    codes.append(_write_row(sink, row))
        else:
            for task in tasks:
                codes.append(_write_row(sink, _sweep_point(task)))
    finally:
        if sink is not sys.stdout:
            sink.close()
    failed = [c for c in codes if c]
    return failed[0] if failed else EXIT_OK


def _write_row(sink, row: dict) -> int:
    buf = io.StringIO()
    csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, extrasaction="ignore", lineterminator="\n").writerow(row)
    sink.write(buf.getvalue())
    sink.flush()  # partial results survive a later failure
    return row.get("_exit", 0)


# -- fit ------------------------------------------------------------------


def cmd_fit(args: argparse.Namespace) -> int:
    if not args.input:
        raise InputError("--input is required")
    raw = Path(args.input).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"input is not UTF-8: {exc}") from None
    samples = read_samples_csv(text)
    meta = provenance(args, raw)
    fit = fit_scaling(samples, family=args.fit_family)
    n_max = max(fit.n_values)
    curve = curve_points(fit, min(fit.n_values), args.curve_factor * n_max, args.curve_points)
    report = {
        "fit": fit.to_dict(),
        "g_infinity": extrapolate(fit, float("inf")),
        "samples": len(fit.n_values),
        "family": args.fit_family or "joint",
    }
    emit(to_json(report, meta), args.out)
    plot_path = args.plot_out
    if plot_path is None and args.out not in (None, "-"):
        plot_path = str(Path(args.out).with_suffix(".curve.csv"))
    if plot_path is not None:
        lines = [f"# {line}" for line in meta_comment_lines(meta)] + ["n,G_fitted"]
        lines += [f"{n!r},{g!r}" for n, g in curve]
        emit("\n".join(lines) + "\n", plot_path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_globals(p: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    g = p.add_argument_group("global options")
    g.add_argument("--m", type=int, default=s, help="number of columns")
    g.add_argument("--mp", type=int, default=s, help="number of rows (column height)")
    g.add_argument("--bc", choices=("open", "ph"), default=s,
                   help="boundary: open, or periodic along the horizontal axis (default open; sweep: ph)")
    g.add_argument("--restricted", action="store_true", default=s,
                   help="also (or, above the exhaustive cap, only) search the restricted families")
    g.add_argument("--cap-exhaustive", type=int, default=s,
                   help=f"largest site count for exhaustive search (default {DEFAULT_EXHAUSTIVE_CAP})")
    g.add_argument("--cap-mp", type=int, default=s, help=f"largest column height (default {DEFAULT_CAP_MP})")
    g.add_argument("--seed", type=int, default=s, help="seed for randomized checks (default 0)")
    g.add_argument("--out", default=s, help="output file (default stdout)")
    g.add_argument("--tol-certify", type=float, default=s,
                   help=f"least mixedness that counts as entangled (default {CERTIFY_TOL:g})")
    g.add_argument("--tol-agree", type=float, default=s,
                   help=f"exact vs restricted agreement tolerance (default {TOL_AGREE:g})")
    g.add_argument("--tol-ssa", type=float, default=s,
                   help=f"allowed negative strong-subadditivity slack (default {TOL_SSA:g})")
    g.add_argument("--record-timings", action="store_true", default=s,
                   help="write wall-clock times (makes output run-dependent)")
    g.add_argument("--jobs", type=int, default=s, help="worker processes for sweeps (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rvbggm", description="RVB lattice entanglement toolkit.")
    parser.add_argument("--version", action="version", version=f"rvbggm {__version__}")
    _add_globals(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverings", help="enumerate dimer coverings")
    _add_globals(p)
    p.add_argument("--cap-coverings", type=int, default=DEFAULT_COVERING_CAP)
    p.set_defaults(handler=cmd_coverings)

    p = sub.add_parser("ggm", help="generalized geometric measure of one lattice")
    _add_globals(p)
    p.add_argument("--families", default=DEFAULT_RESTRICTED, help="comma-separated restricted families")
    p.add_argument("--skip-certify", action="store_true")
    p.add_argument("--dump-state", default=None, help="write the RVB state as JSON")
    p.add_argument("--dump-table", default=None, help="write the recursion table for this height as JSON")
    p.add_argument("--table-n-max", type=int, default=16)
    p.set_defaults(handler=cmd_ggm)

    p = sub.add_parser("sweep", help="GGM over perfect and imperfect lattice families")
    _add_globals(p)
    p.add_argument("--m-min", type=int, default=4)
    p.add_argument("--m-max", type=int, default=6)
    p.add_argument("--kinds", default="perfect,imperfect", help="lattice families to sweep")
    p.add_argument("--families", default=DEFAULT_SWEEP_RESTRICTED,
                   help="restricted families above the exhaustive cap")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("fit", help="finite-size scaling fit of a GGM sequence")
    _add_globals(p)
    p.add_argument("--input", default=None, help="CSV with n_total, g (or G), family[, search]")
    p.add_argument("--fit-family", choices=("perfect", "imperfect"), default=None,
                   help="fit one family only (default: joint)")
    p.add_argument("--plot-out", default=None, help="curve CSV (default: <out>.curve.csv)")
    p.add_argument("--curve-points", type=int, default=64)
    p.add_argument("--curve-factor", type=float, default=4.0, help="curve extends to this multiple of max n")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("certify", help="exhaustive entanglement certification and SSA trials")
    _add_globals(p)
    p.add_argument("--ssa-trials", type=int, default=DEFAULT_SSA_TRIALS)
    p.set_defaults(handler=cmd_certify)
    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    for key in ("cap_exhaustive", "cap_mp", "jobs"):
        if getattr(args, key) < 1:
            raise InputError(f"--{key.replace('_', '-')} must be positive")
    return args


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        return args.handler(args)
    except (RvbError, OSError) as exc:
        print(f"rvbggm: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
