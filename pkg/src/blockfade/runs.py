"""
Grid drivers behind the command line: bound tables, figure datasets and the
random-access slot table, plus CSV/JSON serialization.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

from . import bounds as bd
from .aloha import AlohaScenario, optimize_slots
from .infodens import ChannelParams
from .moments import i_lower_mean_closed, u_tilde
from .sampling import McConfig
from .specfun import DomainError, q_func

FIELDS = ("snr_db", "t", "l", "epsilon", "kind", "rate_nats", "rate_bits",
          "ci_low", "ci_high", "samples", "seed")
ALOHA_FIELDS = ("model", "snr_db", "t", "n", "k_bits", "d", "slots", "p_success")
LN2 = math.log(2.0)


@dataclass
class RunConfig:
    subcommand: str = "bounds"
    snr_db: list = field(default_factory=lambda: [15.0])
    t: int = 20
    l: list = field(default_factory=lambda: [10])
    epsilon: float = 1e-3
    samples: int = 100_000
    seed: int = 0
    workers: int = 1
    confidence: float = 0.95
    bound: list = field(default_factory=lambda: list(bd.KINDS))
    units: str = "nats"
    format: str = "csv"
    out: str = None
    figure: int = None

    def validate(self):
        if not self.snr_db:
            raise DomainError("snr_db: empty list")
        if not self.l:
            raise DomainError("blocks: empty list")
        if any(int(v) != v or v < 1 for v in self.l):
            raise DomainError(f"blocks: entries must be positive integers, got {self.l}")
        if int(self.t) != self.t or self.t <= 2:
            raise DomainError(f"coherence: must be an integer > 2, got {self.t}")
        if not 0 < self.epsilon < 0.5:
            raise DomainError(f"epsilon: must lie in (0, 1/2), got {self.epsilon}")
        unknown = [k for k in self.bound if k not in bd.KINDS]
        if unknown:
            raise DomainError(f"bound: unknown kinds {unknown}")
        if self.units not in ("nats", "bits"):
            raise DomainError(f"units: must be nats or bits, got {self.units}")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format: must be csv or json, got {self.format}")

    def mc(self):
        return McConfig(n_samples=self.samples, seed=self.seed, workers=self.workers,
                        confidence=self.confidence)


@dataclass
class Row:
    snr_db: float
    t: int
    l: int
    epsilon: float
    kind: str
    rate: float
    ci: float
    meta: tuple = None
    error: str = None
    on_epsilon: bool = False


def rho_of(db):
    return 10.0 ** (db / 10.0)


def evaluate(kind, p, mc):
    """One BoundResult for a bound kind at channel parameters p."""
    if kind == "dt":
        return bd.dt_lower(p, mc)
    if kind == "mc":
        return bd.mc_upper(p, mc)
    if kind == "na_highsnr_closed":
        return bd.na_high_snr(p, "closed")
    if kind == "na_highsnr_simplified":
        return bd.na_high_snr(p, "simplified")
    if kind == "na_coherent":
        return bd.na_coherent(p)
    if kind == "na_quasistatic":
        return bd.na_quasistatic(p, mc)
    if kind == "na_awgn":
        return bd.na_awgn(p.l * p.t, p.rho, p.epsilon, p)
    if kind == "capacity_lower":
        return bd.capacity_lower(p)
    raise DomainError(f"unknown bound kind {kind!r}")


def _row(db, t, l, eps, kind, mc):
    try:
        r = evaluate(kind, ChannelParams(t, rho_of(db), l, eps), mc)
        return Row(db, t, l, eps, kind, r.rate, r.rate_ci_half_width, r.mc_meta)
    except (bd.BoundError, DomainError) as exc:
        return Row(db, t, l, eps, kind, math.nan, math.nan, None, str(exc))


def run_bounds(cfg):
    """One row per (SNR, block count, bound kind)."""
    cfg.validate()
    mc = cfg.mc()
    return [_row(db, cfg.t, l, cfg.epsilon, kind, mc)
            for db in cfg.snr_db for l in cfg.l for kind in cfg.bound]


# ---------------------------------------------------------------------------
#  Figure datasets
# ---------------------------------------------------------------------------

FIG_BLOCKS = (1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 35, 40, 50)
FIG_COHERENCE = (4, 5, 10, 20, 25, 50, 100, 125, 250, 500)
FIG_SNR = tuple(x / 2.0 for x in range(0, 61, 5))
FIG6_SNR = tuple(x / 2.0 for x in range(24, 45))
FIG6_RATE_BITS = 4.0
FIG_EPSILON = 1e-3


def _fig6_rows(mc):
    t, l = 20, 25
    rate = FIG6_RATE_BITS * LN2
    meta = (mc.n_samples, mc.seed)
    rows = []
    for db in FIG6_SNR:
        p = ChannelParams(t, rho_of(db), l, FIG_EPSILON)
        na = q_func((i_lower_mean_closed(t, p.rho) / t - rate)
                    / math.sqrt(u_tilde(t) / (l * t * t)))
        coh = q_func((bd.coherent_capacity(p.rho) - rate)
                     / math.sqrt(bd.coherent_dispersion(p.rho, t) / l))
        dt, dt_ci = bd.dt_error_at_rate(p, rate, mc)
        try:
            mcv, mc_ci = bd.mc_error_at_rate(p, rate, mc)
            mc_row = Row(db, t, l, mcv, "mc", rate, mc_ci, meta, on_epsilon=True)
        except bd.BoundError as exc:
            mc_row = Row(db, t, l, math.nan, "mc", rate, math.nan, None, str(exc), True)
        rows += [Row(db, t, l, dt, "dt", rate, dt_ci, meta, on_epsilon=True), mc_row,
                 Row(db, t, l, na, "na_highsnr_closed", rate, 0.0, on_epsilon=True),
                 Row(db, t, l, coh, "na_coherent", rate, 0.0, on_epsilon=True)]
    return rows


FIG6_NOTE = ("# figure 6: error probability vs SNR at a fixed rate of 4 bits per channel use; "
             "the epsilon column holds the error probability and ci_low/ci_high bound it; "
             "the LDPC code curve is omitted (out of scope)")


def run_figure(fig_id, cfg):
    """Rows of the curve families of one figure; returns (rows, header comments)."""
    mc = cfg.mc()
    eps = FIG_EPSILON
    if fig_id in (1, 2):
        db = 15.0 if fig_id == 1 else 25.0
        kinds = ("dt", "mc", "na_highsnr_closed", "na_highsnr_simplified",
                 "na_coherent", "capacity_lower")
        return [_row(db, 20, l, eps, k, mc) for l in FIG_BLOCKS for k in kinds], []
    if fig_id in (3, 4):
        db = 15.0 if fig_id == 3 else 25.0
        kinds = ("dt", "mc", "na_highsnr_simplified", "na_coherent", "na_quasistatic")
        return [_row(db, t, 500 // t, eps, k, mc) for t in FIG_COHERENCE for k in kinds], []
    if fig_id == 5:
        kinds = ("dt", "mc", "na_highsnr_closed", "na_highsnr_simplified",
                 "na_coherent", "capacity_lower")
        return [_row(db, 20, 25, eps, k, mc) for db in FIG_SNR for k in kinds], []
    if fig_id == 6:
        return _fig6_rows(mc), [FIG6_NOTE]
    raise DomainError(f"unknown figure {fig_id}; choose 1-6")


# ---------------------------------------------------------------------------
#  Random-access table
# ---------------------------------------------------------------------------

ALOHA_N, ALOHA_K, ALOHA_D = 480, 256, 12


def run_aloha(cfg=None):
    """Optimal slot count for each model, SNR in {15, 25} dB and T in {5, 20}."""
    rows = []
    for model in ("noncoherent", "coherent", "awgn", "classic"):
        for db in (15.0, 25.0):
            for t in (5, 20):
                s = AlohaScenario(ALOHA_N, ALOHA_K, ALOHA_D, model, t, rho_of(db))
                slots, p = optimize_slots(s)
                rows.append({"model": model, "snr_db": db, "t": t, "n": ALOHA_N,
                             "k_bits": ALOHA_K, "d": ALOHA_D, "slots": slots,
                             "p_success": p})
    return rows


# ---------------------------------------------------------------------------
#  Serialization
# ---------------------------------------------------------------------------

def fmt(x):
    """Twelve significant digits; integers and strings pass through."""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def row_record(row, units):
    scale = 1.0 if units == "nats" else 1.0 / LN2
    samples, seed = row.meta if row.meta else ("", "")
    if row.on_epsilon:
        lo, hi = row.epsilon - row.ci, row.epsilon + row.ci
    else:
        lo, hi = (row.rate - row.ci) * scale, (row.rate + row.ci) * scale
    return {"snr_db": row.snr_db, "t": row.t, "l": row.l, "epsilon": row.epsilon,
            "kind": row.kind, "rate_nats": row.rate, "rate_bits": row.rate / LN2,
            "ci_low": lo, "ci_high": hi, "samples": samples, "seed": seed}


def render(records, fields, fmt_name, comments=()):
    if fmt_name == "json":
        clean = [{k: (float(fmt(v)) if isinstance(v, float) else v) for k, v in r.items()}
                 for r in records]
        return json.dumps(clean, indent=1, allow_nan=True) + "\n"
    buf = io.StringIO()
    for c in comments:
        buf.write(c + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        w.writerow([fmt(r[k]) for k in fields])
    return buf.getvalue()
