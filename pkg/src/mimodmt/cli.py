"""Command-line front end: sweeps, figure presets, CSV/JSON emission.

All SNR inputs are in dB; everything internal is linear SNR and nats.
Output column sets are fixed per command so downstream plotting scripts
can rely on a stable schema, and reruns with identical arguments produce
byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Callable, Optional, Sequence

from .channels import (
    ChannelDims,
    ChannelModel,
    IidChannel,
    KeyholeMode,
    KroneckerChannel,
    MultiKeyholeChannel,
    load_scenario,
    make_exponential_correlation,
)
from .dmt import (
    MuxGainDef,
    model_dmt_point,
    model_outage_ln,
    prop3_dmt,
    prop4_dmt,
    combined_dmt,
    snr_offset_c_ln,
    th4_dmt,
    zheng_tse_dmt,
    d_prime_numeric,
    rate_from_mux,
)
from .errors import (
    DataError,
    MimoDmtError,
    ParameterError,
    PrecisionError,
    RegimeError,
)
from .moments import LN2, db_to_gamma, gamma_to_db, gaussian_outage_ln, moments_for
from .montecarlo import SimConfig, estimate_moments, estimate_outage
from .oracle import (
    single_keyhole_outage,
    siso_rayleigh_outage,
    vector_rayleigh_outage,
    wishart2x2_outage,
)

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_REGIME = 3
EXIT_PRECISION = 4

FLAG_SKIPPED = "skipped-regime"

DEFAULT_TRIALS = 100_000
MAX_PRESET_TRIALS = 10_000_000


# --- small helpers --------------------------------------------------------


def parse_snr_range(text: str) -> list[float]:
    """Parse 'start:stop:step' (dB) into an inclusive grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ParameterError(f"--snr-db expects start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ParameterError(f"--snr-db has a non-numeric field: {text!r}") from exc
    if step <= 0:
        raise ParameterError(f"--snr-db step must be > 0, got {step}")
    if stop < start:
        raise ParameterError(f"--snr-db stop must be >= start, got {text!r}")
    grid = []
    k = 0
    while True:
        v = start + k * step
        if v > stop + 1e-9:
            break
        grid.append(v)
        k += 1
    return grid


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".10g")
    return str(value)


def write_table(columns: Sequence[str], rows: Sequence[dict], args) -> None:
    """Emit rows in the fixed column order as CSV or JSON."""
    if args.format == "json":
        payload = [
            {c: (None if isinstance(r.get(c), float) and math.isnan(r[c]) else r.get(c)) for c in columns}
            for r in rows
        ]
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = [",".join(columns)]
        for r in rows:
            lines.append(",".join(_fmt(r.get(c, "")) for c in columns))
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_model(args) -> ChannelModel:
    """Channel model from --scenario or from the inline flags."""
    if args.scenario:
        return load_scenario(args.scenario)
    dims = ChannelDims(args.m, args.n)
    if args.model == "iid":
        return IidChannel(dims, entry_dist=args.entry_dist)
    if args.model == "kronecker":
        return KroneckerChannel(
            dims,
            rt=make_exponential_correlation(dims.m, args.rho_t),
            rr=make_exponential_correlation(dims.n, args.rho_r),
        )
    mode = KeyholeMode(
        b=1.0,
        rt=make_exponential_correlation(dims.m, args.rho_t),
        rr=make_exponential_correlation(dims.n, args.rho_r),
    )
    return MultiKeyholeChannel(dims, modes=(mode,))


def input_rate_nats(args) -> Optional[float]:
    """Fixed rate from --rate-nats, honoring --units for the entered value."""
    if args.rate_nats is None:
        return None
    rate = args.rate_nats
    if args.units == "bits":
        rate *= LN2
    if rate < 0:
        raise ParameterError(f"rate must be >= 0, got {rate}")
    return rate


def point_rate(model: ChannelModel, args, gamma: float) -> float:
    fixed = input_rate_nats(args)
    if fixed is not None:
        return fixed
    mux = MuxGainDef.parse(args.mux)
    moments, a = moments_for(model, gamma)
    return rate_from_mux(args.r, mux, gamma, moments, model.m_star, a=a)


def pick_oracle(model: ChannelModel) -> Callable[[float, float], float]:
    """Exact-outage function applicable to the model, if one exists."""
    dims = model.dims
    if isinstance(model, IidChannel) and model.entry_dist == "gaussian":
        if dims.m == 1 and dims.n == 1:
            return siso_rayleigh_outage
        if min(dims.m, dims.n) == 1:
            return lambda g, rate: vector_rayleigh_outage(g, rate, dims)
        if dims.m == 2 and dims.n == 2:
            return wishart2x2_outage
    if isinstance(model, MultiKeyholeChannel) and model.n_modes == 1:
        mode = model.modes[0]
        if mode.rt.is_identity and mode.rr.is_identity:
            return lambda g, rate: single_keyhole_outage(g, rate, dims, b=mode.b)
    raise ParameterError(
        "no exact oracle applies to this model "
        "(supported: i.i.d. Gaussian with min(m,n)=1 or 2x2; "
        "single keyhole with identity correlations)"
    )


# --- commands -------------------------------------------------------------


def cmd_moments(args) -> int:
    model = build_model(args)
    rows = []
    for snr_db in parse_snr_range(args.snr_db):
        gamma = db_to_gamma(snr_db)
        moments, a = moments_for(model, gamma)
        rows.append(
            {
                "snr_db": snr_db,
                "gamma": gamma,
                "mean_nats": moments.mean_nats,
                "var_nats2": moments.var_nats2,
                "offset_a": a,
            }
        )
    write_table(["snr_db", "gamma", "mean_nats", "var_nats2", "offset_a"], rows, args)
    return EXIT_OK


def cmd_outage(args) -> int:
    model = build_model(args)
    rows = []
    for snr_db in parse_snr_range(args.snr_db):
        gamma = db_to_gamma(snr_db)
        try:
            rate = point_rate(model, args, gamma)
        except RegimeError:
            rows.append(
                {
                    "snr_db": snr_db,
                    "gamma": gamma,
                    "r": args.r if args.r is not None else math.nan,
                    "rate_nats": math.nan,
                    "p_out_model": math.nan,
                    "flag": FLAG_SKIPPED,
                }
            )
            continue
        moments, _ = moments_for(model, gamma)
        ln_p = gaussian_outage_ln(moments, rate)
        rows.append(
            {
                "snr_db": snr_db,
                "gamma": gamma,
                "r": args.r if args.r is not None else math.nan,
                "rate_nats": rate,
                "p_out_model": math.exp(ln_p),
                "flag": "",
            }
        )
    write_table(
        ["snr_db", "gamma", "r", "rate_nats", "p_out_model", "flag"], rows, args
    )
    return EXIT_OK


def _dmt_rows(model: ChannelModel, mux: MuxGainDef, r: float, snr_grid: Sequence[float], step: float) -> list[dict]:
    rows = []
    for snr_db in snr_grid:
        gamma = db_to_gamma(snr_db)
        try:
            point = model_dmt_point(model, mux, r, gamma, step=step)
            rows.append(
                {
                    "snr_db": snr_db,
                    "gamma": gamma,
                    "r": r,
                    "rate_nats": point.rate_nats,
                    "p_out_model": point.p_out,
                    "d_gamma": point.d_gamma,
                    "d_prime": point.d_prime,
                    "c_gamma": point.c_gamma,
                    "flag": "",
                }
            )
        except RegimeError:
            rows.append(
                {
                    "snr_db": snr_db,
                    "gamma": gamma,
                    "r": r,
                    "rate_nats": math.nan,
                    "p_out_model": math.nan,
                    "d_gamma": math.nan,
                    "d_prime": math.nan,
                    "c_gamma": math.nan,
                    "flag": FLAG_SKIPPED,
                }
            )
    return rows


DMT_COLUMNS = [
    "snr_db",
    "gamma",
    "r",
    "rate_nats",
    "p_out_model",
    "d_gamma",
    "d_prime",
    "c_gamma",
    "flag",
]


def cmd_dmt(args) -> int:
    model = build_model(args)
    if args.r is None:
        raise ParameterError("dmt requires --r")
    mux = MuxGainDef.parse(args.mux)
    rows = _dmt_rows(model, mux, args.r, parse_snr_range(args.snr_db), args.step)
    write_table(DMT_COLUMNS, rows, args)
    return EXIT_OK


def cmd_offset(args) -> int:
    """SNR offset c_gamma over the grid (same evaluation as dmt)."""
    model = build_model(args)
    if args.r is None:
        raise ParameterError("offset requires --r")
    mux = MuxGainDef.parse(args.mux)
    rows = _dmt_rows(model, mux, args.r, parse_snr_range(args.snr_db), args.step)
    cols = ["snr_db", "gamma", "r", "rate_nats", "p_out_model", "d_prime", "c_gamma", "flag"]
    write_table(cols, [{c: row[c] for c in cols} for row in rows], args)
    return EXIT_OK


def cmd_mc(args) -> int:
    model = build_model(args)
    snr_grid = tuple(db_to_gamma(s) for s in parse_snr_range(args.snr_db))
    fixed = input_rate_nats(args)
    config = SimConfig(
        model=model,
        snr_grid=snr_grid,
        trials=args.trials,
        seed=args.seed,
        r=None if fixed is not None else args.r,
        mux=None if fixed is not None else MuxGainDef.parse(args.mux),
        rate_nats=fixed,
        workers=args.workers,
    )
    rows = []
    for point in estimate_outage(config):
        rows.append(
            {
                "snr_db": gamma_to_db(point.gamma),
                "gamma": point.gamma,
                "rate_nats": point.rate_nats,
                "p_hat": point.p_hat,
                "stderr": point.stderr,
                "trials": point.trials,
                "flag": point.flag,
            }
        )
    write_table(
        ["snr_db", "gamma", "rate_nats", "p_hat", "stderr", "trials", "flag"], rows, args
    )
    return EXIT_OK


def cmd_oracle(args) -> int:
    model = build_model(args)
    oracle = pick_oracle(model)
    rows = []
    for snr_db in parse_snr_range(args.snr_db):
        gamma = db_to_gamma(snr_db)
        try:
            rate = point_rate(model, args, gamma)
        except RegimeError:
            rows.append(
                {
                    "snr_db": snr_db,
                    "gamma": gamma,
                    "rate_nats": math.nan,
                    "p_out_oracle": math.nan,
                    "flag": FLAG_SKIPPED,
                }
            )
            continue
        rows.append(
            {
                "snr_db": snr_db,
                "gamma": gamma,
                "rate_nats": rate,
                "p_out_oracle": oracle(gamma, rate),
                "flag": "",
            }
        )
    write_table(["snr_db", "gamma", "rate_nats", "p_out_oracle", "flag"], rows, args)
    return EXIT_OK


def cmd_validate(args) -> int:
    """Three-way model / Monte-Carlo / oracle comparison with pass gates.

    Gates per grid point: model within a factor 3 of the oracle where the
    oracle outage is in [1e-4, 0.5], and Monte-Carlo within 3 binomial
    standard errors of the oracle where p_hat >= 1e-4.
    """
    model = build_model(args)
    if args.trials < 1:
        raise ParameterError("validate needs at least 1 trial")
    try:
        oracle = pick_oracle(model)
    except ParameterError:
        oracle = None
    snr_db_grid = parse_snr_range(args.snr_db)
    snr_grid = tuple(db_to_gamma(s) for s in snr_db_grid)
    fixed = input_rate_nats(args)
    config = SimConfig(
        model=model,
        snr_grid=snr_grid,
        trials=args.trials,
        seed=args.seed,
        r=None if fixed is not None else args.r,
        mux=None if fixed is not None else MuxGainDef.parse(args.mux),
        rate_nats=fixed,
        workers=args.workers,
    )
    mc = estimate_outage(config)
    rows = []
    all_pass = True
    for snr_db, point in zip(snr_db_grid, mc):
        gamma = point.gamma
        if point.flag == FLAG_SKIPPED:
            rows.append(
                {
                    "snr_db": snr_db,
                    "gamma": gamma,
                    "rate_nats": math.nan,
                    "p_out_model": math.nan,
                    "p_hat": math.nan,
                    "stderr": math.nan,
                    "p_out_oracle": math.nan,
                    "model_oracle_ratio": math.nan,
                    "mc_oracle_z": math.nan,
                    "passed": True,
                    "flag": FLAG_SKIPPED,
                }
            )
            continue
        moments, _ = moments_for(model, gamma)
        p_model = math.exp(gaussian_outage_ln(moments, point.rate_nats))
        p_oracle = oracle(gamma, point.rate_nats) if oracle else math.nan
        ratio = math.nan
        z = math.nan
        passed = True
        if oracle:
            if 1e-4 <= p_oracle <= 0.5:
                ratio = max(p_model, 1e-300) / p_oracle
                passed = passed and (1 / 3 <= ratio <= 3)
            if point.p_hat >= 1e-4 and point.stderr > 0:
                z = (point.p_hat - p_oracle) / point.stderr
                passed = passed and abs(z) <= 3
        else:
            # no exact reference: gate the model against Monte-Carlo
            if point.p_hat >= 1e-4 and point.stderr > 0:
                ratio = max(p_model, 1e-300) / point.p_hat
                passed = 1 / 3 <= ratio <= 3
        all_pass = all_pass and passed
        rows.append(
            {
                "snr_db": snr_db,
                "gamma": gamma,
                "rate_nats": point.rate_nats,
                "p_out_model": p_model,
                "p_hat": point.p_hat,
                "stderr": point.stderr,
                "p_out_oracle": p_oracle,
                "model_oracle_ratio": ratio,
                "mc_oracle_z": z,
                "passed": passed,
                "flag": point.flag,
            }
        )
    write_table(
        [
            "snr_db",
            "gamma",
            "rate_nats",
            "p_out_model",
            "p_hat",
            "stderr",
            "p_out_oracle",
            "model_oracle_ratio",
            "mc_oracle_z",
            "passed",
            "flag",
        ],
        rows,
        args,
    )
    # a failed gate is reported in the table, not via the exit code
    return EXIT_OK


# --- figure presets -------------------------------------------------------
#
# Each preset encodes one figure's system parameters; output is the plotted
# data (no rendering). Monte-Carlo presets run at desk scale by default;
# --trials overrides, capped at 1e7.


def _preset_trials(args, default: int) -> int:
    trials = args.trials if args.trials is not None else default
    return min(trials, MAX_PRESET_TRIALS)


def _cell(fn):
    """Evaluate one curve cell, mapping regime errors to NaN."""
    try:
        return fn()
    except RegimeError:
        return math.nan


def fig_one(args) -> tuple[list[str], list[dict]]:
    """10x10, r = 9, raw-log definition: outage and power-law estimate vs SNR."""
    model = IidChannel(ChannelDims(10, 10))
    rows = _dmt_rows(model, MuxGainDef.RAW_LOG, 9.0, parse_snr_range(args.snr_db or "30:80:2"), args.step)
    for row in rows:
        d = row["d_prime"]
        c = row["c_gamma"]
        row["p_powerlaw"] = _cell(lambda: c * row["gamma"] ** (-d)) if not math.isnan(d) else math.nan
        row["ref_inv_gamma"] = 1.0 / row["gamma"]
    return DMT_COLUMNS[:-1] + ["p_powerlaw", "ref_inv_gamma", "flag"], rows


def fig_two(args) -> tuple[list[str], list[dict]]:
    """2x2, r = 1: outage under the three definitions, oracle, MC, 1/gamma."""
    model = IidChannel(ChannelDims(2, 2))
    grid = parse_snr_range(args.snr_db or "2:30:2")
    trials = _preset_trials(args, DEFAULT_TRIALS)
    config = SimConfig(
        model=model,
        snr_grid=tuple(db_to_gamma(s) for s in grid),
        trials=trials,
        seed=args.seed,
        r=1.0,
        mux=MuxGainDef.MEAN_CAPACITY,
        workers=args.workers,
    )
    mc = estimate_outage(config)
    rows = []
    for snr_db, point in zip(grid, mc):
        gamma = db_to_gamma(snr_db)
        row = {"snr_db": snr_db, "gamma": gamma}
        for tag, mux in (
            ("rawlog", MuxGainDef.RAW_LOG),
            ("offsetlog", MuxGainDef.OFFSET_LOG),
            ("meancap", MuxGainDef.MEAN_CAPACITY),
        ):
            row[f"p_out_{tag}"] = _cell(
                lambda mux=mux: math.exp(model_outage_ln(model, mux, 1.0, gamma))
            )
        row["p_out_oracle"] = wishart2x2_outage(gamma, point.rate_nats)
        row["p_hat_mc"] = point.p_hat
        row["mc_stderr"] = point.stderr
        row["ref_inv_gamma"] = 1.0 / gamma
        row["flag"] = point.flag
        rows.append(row)
    cols = [
        "snr_db",
        "gamma",
        "p_out_rawlog",
        "p_out_offsetlog",
        "p_out_meancap",
        "p_out_oracle",
        "p_hat_mc",
        "mc_stderr",
        "ref_inv_gamma",
        "flag",
    ]
    return cols, rows


def fig_three(args) -> tuple[list[str], list[dict]]:
    """2x2 at 10 dB: SNR offset versus multiplexing gain (mean-capacity def)."""
    model = IidChannel(ChannelDims(2, 2))
    gamma = db_to_gamma(10.0)
    rows = []
    r = 0.05
    while r < 1.951:
        point = model_dmt_point(model, MuxGainDef.MEAN_CAPACITY, round(r, 2), gamma, step=args.step)
        rows.append(
            {
                "r": round(r, 2),
                "rate_nats": point.rate_nats,
                "p_out_model": point.p_out,
                "d_prime": point.d_prime,
                "c_gamma": point.c_gamma,
            }
        )
        r += 0.05
    return ["r", "rate_nats", "p_out_model", "d_prime", "c_gamma"], rows


def _dprime_three_defs(n: int, r: float, args, default_range: str) -> tuple[list[str], list[dict]]:
    model = IidChannel(ChannelDims(n, n))
    rows = []
    for snr_db in parse_snr_range(args.snr_db or default_range):
        gamma = db_to_gamma(snr_db)
        row = {"snr_db": snr_db, "gamma": gamma}
        for tag, mux in (
            ("rawlog", MuxGainDef.RAW_LOG),
            ("offsetlog", MuxGainDef.OFFSET_LOG),
            ("meancap", MuxGainDef.MEAN_CAPACITY),
        ):
            row[f"dprime_{tag}"] = _cell(
                lambda mux=mux: d_prime_numeric(
                    lambda g: model_outage_ln(model, mux, r, g),
                    gamma,
                    step=args.step,
                    log_domain=True,
                )
            )
        row["dprime_closed_meancap"] = th4_dmt(n, r, gamma).d_prime
        row["dprime_closed_rawlog"] = prop3_dmt(n, r, gamma, MuxGainDef.RAW_LOG).d_prime
        row["dprime_closed_offsetlog"] = prop3_dmt(n, r, gamma, MuxGainDef.OFFSET_LOG).d_prime
        row["d_asymptotic"] = zheng_tse_dmt(ChannelDims(n, n), r)
        rows.append(row)
    cols = [
        "snr_db",
        "gamma",
        "dprime_rawlog",
        "dprime_offsetlog",
        "dprime_meancap",
        "dprime_closed_rawlog",
        "dprime_closed_offsetlog",
        "dprime_closed_meancap",
        "d_asymptotic",
    ]
    return cols, rows


def fig_four(args):
    """10x10, r = 9: differential diversity gain vs SNR, three definitions."""
    return _dprime_three_defs(10, 9.0, args, "5:40:1")


def fig_five(args):
    """2x2, r = 1: differential diversity gain vs SNR, three definitions."""
    return _dprime_three_defs(2, 1.0, args, "5:40:1")


def fig_six(args) -> tuple[list[str], list[dict]]:
    """2x2, r = 1: SNR offset vs SNR, numeric model and closed forms."""
    model = IidChannel(ChannelDims(2, 2))
    rows = []
    for snr_db in parse_snr_range(args.snr_db or "5:40:1"):
        gamma = db_to_gamma(snr_db)
        point = model_dmt_point(model, MuxGainDef.MEAN_CAPACITY, 1.0, gamma, step=args.step)
        closed = th4_dmt(2, 1.0, gamma)
        rows.append(
            {
                "snr_db": snr_db,
                "gamma": gamma,
                "c_model_meancap": point.c_gamma,
                "c_closed_meancap": closed.c_gamma,
                "c_closed_reliable": closed.reliable,
                "c_limit_rawlog": prop3_dmt(2, 1.0, gamma, MuxGainDef.RAW_LOG).c_gamma_limit,
                "c_limit_offsetlog": prop3_dmt(2, 1.0, gamma, MuxGainDef.OFFSET_LOG).c_gamma_limit,
            }
        )
    cols = [
        "snr_db",
        "gamma",
        "c_model_meancap",
        "c_closed_meancap",
        "c_closed_reliable",
        "c_limit_rawlog",
        "c_limit_offsetlog",
    ]
    return cols, rows


def fig_seven(args) -> tuple[list[str], list[dict]]:
    """10x9, r = 8.7: numeric model d' vs the non-square closed forms."""
    dims = ChannelDims(9, 10)
    model = IidChannel(dims)
    rows = []
    for snr_db in parse_snr_range(args.snr_db or "10:40:1"):
        gamma = db_to_gamma(snr_db)
        row = {"snr_db": snr_db, "gamma": gamma}
        row["dprime_model"] = _cell(
            lambda: d_prime_numeric(
                lambda g: model_outage_ln(model, MuxGainDef.MEAN_CAPACITY, 8.7, g),
                gamma,
                step=args.step,
                log_domain=True,
            )
        )
        row["dprime_closed"] = _cell(lambda: prop4_dmt(dims, 8.7, gamma).d_prime)
        row["d_combined"] = _cell(lambda: combined_dmt(dims, 8.7, gamma))
        row["d_asymptotic"] = zheng_tse_dmt(dims, 8.7)
        rows.append(row)
    cols = ["snr_db", "gamma", "dprime_model", "dprime_closed", "d_combined", "d_asymptotic"]
    return cols, rows


FIGURES = {
    "fig1": fig_one,
    "fig2": fig_two,
    "fig3": fig_three,
    "fig4": fig_four,
    "fig5": fig_five,
    "fig6": fig_six,
    "fig7": fig_seven,
}


def cmd_figure(args) -> int:
    columns, rows = FIGURES[args.name](args)
    write_table(columns, rows, args)
    return EXIT_OK


# --- argument parsing -----------------------------------------------------


def _add_common(p: argparse.ArgumentParser, snr_required: bool = True):
    p.add_argument("--model", choices=["iid", "kronecker", "keyhole"], default="iid")
    p.add_argument("--m", type=int, default=2, help="transmit antennas")
    p.add_argument("--n", type=int, default=2, help="receive antennas")
    p.add_argument("--entry-dist", choices=["gaussian", "two_point"], default="gaussian")
    p.add_argument("--rho-t", type=float, default=0.0, help="transmit exponential correlation")
    p.add_argument("--rho-r", type=float, default=0.0, help="receive exponential correlation")
    p.add_argument("--scenario", help="JSON scenario file (overrides model flags)")
    p.add_argument("--snr-db", required=snr_required, help="start:stop:step in dB")
    p.add_argument("--mux", choices=["rawlog", "offsetlog", "meancap"], default="meancap")
    p.add_argument("--r", type=float, help="multiplexing gain")
    p.add_argument("--rate-nats", type=float, help="fixed rate (interpreted per --units)")
    p.add_argument("--units", choices=["nats", "bits"], default="nats")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--step", type=float, default=0.05, help="log-SNR derivative step")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimodmt",
        description="Finite-SNR diversity-multiplexing tradeoff curves, "
        "SNR offsets and outage probabilities for MIMO fading channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    handlers = {
        "moments": cmd_moments,
        "outage": cmd_outage,
        "dmt": cmd_dmt,
        "offset": cmd_offset,
        "mc": cmd_mc,
        "oracle": cmd_oracle,
        "validate": cmd_validate,
    }
    for name, fn in handlers.items():
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(handler=fn)

    p = sub.add_parser("figure", help="figure-reproduction presets")
    p.add_argument("name", choices=sorted(FIGURES))
    _add_common(p, snr_required=False)
    p.set_defaults(handler=cmd_figure)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    if args.trials is None and args.command in ("mc", "validate"):
        args.trials = DEFAULT_TRIALS
    try:
        return args.handler(args)
    except (ParameterError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except PrecisionError as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except MimoDmtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER


if __name__ == "__main__":
    sys.exit(main())
