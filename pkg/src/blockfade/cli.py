"""
Command line front end.

    blockfade bounds --snr-db 15,25 --coherence 20 --blocks 5,10,20 --bound dt,mc
    blockfade figure 2 --samples 1000000 --out fig2.csv
    blockfade aloha
    blockfade selftest

Every flag can also be given in a key=value file passed with --config
(keys are the flag names without dashes, e.g. snr-db=15,25); flags given on
the command line win over the file.
"""

import argparse
import sys

import numpy as np

from . import runs
from .runs import RunConfig, run_aloha, run_bounds, run_figure  # noqa: F401
from .specfun import DomainError

KEYS = ("snr-db", "coherence", "blocks", "epsilon", "samples", "seed", "workers",
        "confidence", "bound", "units", "format", "out")


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _words(text):
    return [v.strip() for v in str(text).split(",") if v.strip()]


CONVERT = {
    "snr-db": ("snr_db", _floats),
    "coherence": ("t", int),
    "blocks": ("l", _ints),
    "epsilon": ("epsilon", float),
    "samples": ("samples", int),
    "seed": ("seed", int),
    "workers": ("workers", int),
    "confidence": ("confidence", float),
    "bound": ("bound", _words),
    "units": ("units", str),
    "format": ("format", str),
    "out": ("out", str),
}


def read_config(path):
    """Parse a key=value file; blank lines and lines starting with # are skipped."""
    values = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{n}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in CONVERT:
                raise DomainError(f"{path}:{n}: unknown key {key!r}")
            values[key] = val
    return values


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file with defaults for the flags below")
    for key in KEYS:
        common.add_argument(f"--{key}", default=None)
    parser = argparse.ArgumentParser(
        prog="blockfade",
        description="Finite-blocklength rate bounds for noncoherent Rayleigh block fading.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("bounds", parents=[common], help="bound table over an SNR x L grid")
    fig = sub.add_parser("figure", parents=[common], help="data of one figure (1-6)")
    fig.add_argument("figure", type=int)
    sub.add_parser("aloha", parents=[common], help="optimal slotted-ALOHA slot counts")
    sub.add_parser("selftest", parents=[common], help="quick consistency checks")
    return parser


def make_config(args):
    """RunConfig from defaults, then the config file, then explicit flags."""
    cfg = RunConfig(subcommand=args.subcommand, figure=getattr(args, "figure", None))
    if args.subcommand == "figure":
        cfg.samples = 1_000_000
    given = read_config(args.config) if args.config else {}
    for key in KEYS:
        val = getattr(args, key.replace("-", "_"))
        if val is not None:
            given[key] = val
    for key, val in given.items():
        name, conv = CONVERT[key]
        try:
            setattr(cfg, name, conv(val))
        except ValueError as exc:
            raise DomainError(f"{key}: {exc}") from None
    return cfg


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_errors(rows):
    bad = [r for r in rows if r.error]
    for r in bad:
        print(f"error: snr_db={r.snr_db} t={r.t} l={r.l} kind={r.kind}: {r.error}",
              file=sys.stderr)
    return 1 if bad else 0


def selftest():
    """A few fast end-to-end checks; returns the number of failures."""
    from .aloha import AlohaScenario, optimize_slots
    from .bounds import McConfig, dt_lower, mc_upper
    from .infodens import ChannelParams, info_density, mismatched_density
    from .sampling import RngState, sample_block_pair
    from .specfun import q_func, q_func_inv

    checks = []
    checks.append(("q_func_inv(q_func(2)) == 2", abs(q_func_inv(q_func(2.0)) - 2.0) < 1e-12))
    p = ChannelParams(20, 10 ** 2.5)
    b = sample_block_pair(20, RngState(1), 1000)
    gap = np.max(np.abs(mismatched_density(p, p.rho, b) - info_density(p, b)))
    checks.append(("j(alpha=rho) == i", gap <= 1e-12))
    table = {("noncoherent", 15, 5): 4, ("coherent", 25, 5): 12, ("awgn", 15, 20): 8}
    ok = all(optimize_slots(AlohaScenario(480, 256, 12, m, t, 10 ** (db / 10)))[0] == s
             for (m, db, t), s in table.items())
    checks.append(("slot table cells", ok))
    mc = McConfig(n_samples=20000, seed=1, xi_grid_size=1025, alpha_grid=9, heterogeneous=0)
    q = ChannelParams(20, 10 ** 2.5, 10, 1e-3)
    lo, hi = dt_lower(q, mc), mc_upper(q, mc)
    slack = 3 * (lo.rate_ci_half_width + hi.rate_ci_half_width)
    checks.append(("dt <= mc", lo.rate <= hi.rate + slack))
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
    return sum(not passed for _, passed in checks)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        if cfg.subcommand == "selftest":
            return 1 if selftest() else 0
        if cfg.subcommand == "aloha":
            recs = run_aloha(cfg)
            _emit(runs.render(recs, runs.ALOHA_FIELDS, cfg.format), cfg.out)
            return 0
        cfg.validate()
        if cfg.subcommand == "figure":
            rows, comments = run_figure(cfg.figure, cfg)
        else:
            rows, comments = run_bounds(cfg), []
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    recs = [runs.row_record(r, cfg.units) for r in rows]
    _emit(runs.render(recs, runs.FIELDS, cfg.format, comments), cfg.out)
    return _report_errors(rows)


if __name__ == "__main__":
    sys.exit(main())
