"""Command-line front end: ``omimo beampattern | ksweep | sinr | nsp-check``."""

import argparse
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from omimo.files import (
    load_config,
    parse_overrides,
    read_channel_csv,
    write_csv,
    write_manifest,
)
from omimo.nsp import InfeasibleProjectionError, feasibility, null_space_projection
from omimo.overlapped import SubarrayPartition, transmit_weights
from omimo.scenario import (
    ConfigError,
    beampattern_sweep,
    channel_for,
    column_label,
    output_sinr,
    random_stream,
    sample_channel,
    sidelobe_metrics,
    k_sweep,
    sweep_argmax,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TOLERANCE = 2
EXIT_IO = 3

NSP_TOL = 1e-10


class ToleranceError(RuntimeError):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _out_dir(arg) -> Path:
    out = Path(arg or os.environ.get("OMIMO_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc
    if not values:
        raise ConfigError("empty list")
    return values


# --------------------------------------------------------------- commands

def cmd_beampattern(args) -> int:
    config, options = load_config(args.config, parse_overrides(args.set))
    use_nsp = args.nsp or options.get("nsp", False)
    channel_path = args.channel or options.get("channel")

    channel = None
    if use_nsp:
        check = feasibility(config.mt, config.nr)
        if channel_path is not None:
            channel = read_channel_csv(channel_path)
            if channel.shape[1] != config.mt:
                raise ConfigError(f"channel has {channel.shape[1]} columns, mt={config.mt}")
        elif not check:
            raise InfeasibleProjectionError(check.message)
        else:
            channel = channel_for(config)

    table = beampattern_sweep(config, workers=args.workers)
    if use_nsp:
        nsp_table = beampattern_sweep(config, use_nsp=True, channel=channel, workers=args.workers)
        table.columns.update(nsp_table.columns)

    # pure-MIMO unprojected PSL is the reference for every suppression delta
    if config.mt in config.k_list:
        baseline_col = table.columns[column_label(config.mt)]
    else:
        from dataclasses import replace

        ref = beampattern_sweep(replace(config, k_list=(config.mt,)))
        baseline_col = ref.columns[column_label(config.mt)]
    baseline = sidelobe_metrics(table.theta_deg, baseline_col).psl_db

    out = _out_dir(args.out)
    labels = list(table.columns)
    bp = write_csv(
        out / "beampattern.csv",
        ["theta_deg", *labels],
        zip(table.theta_deg, *(table.columns[c] for c in labels)),
    )
    rows = []
    for label in labels:
        m = sidelobe_metrics(table.theta_deg, table.columns[label])
        rows.append([label.removeprefix("gain_db_"), m.psl_db, m.mainlobe_width_deg, m.peak_deg,
                     baseline - m.psl_db])
        print(f"{label:>16}: PSL {m.psl_db:8.2f} dB  mainlobe {m.mainlobe_width_deg:6.2f} deg  "
              f"peak {m.peak_deg:7.2f} deg  vs pure MIMO {baseline - m.psl_db:+7.2f} dB")
    metrics = write_csv(
        out / "metrics.csv",
        ["formulation", "psl_db", "mainlobe_width_deg", "peak_deg", "psl_improvement_db"],
        rows,
    )
    opts = {"nsp": use_nsp}
    if channel_path is not None:
        opts["channel"] = str(Path(channel_path).resolve())
    write_manifest(out, "beampattern", config, [bp, metrics], opts, _now())
    return EXIT_OK


def cmd_ksweep(args) -> int:
    sizes = _parse_int_list(args.mt)
    if any(m < 1 for m in sizes):
        raise ConfigError("every M_T must be >= 1")
    sweeps = {m: dict(k_sweep(m)) for m in sizes}
    kmax = max(sizes)
    rows = []
    for k in range(1, kmax + 1):
        rows.append([k, *(sweeps[m].get(k, "") for m in sizes)])
    out = _out_dir(args.out)
    path = write_csv(out / "ksweep.csv", ["K", *(f"M_eps_MT{m}" for m in sizes)], rows)
    for m in sizes:
        best, ks = sweep_argmax(k_sweep(m))
        print(f"M_T={m}: max M_eps={best} at K in {{{', '.join(map(str, ks))}}}")
    write_manifest(out, "ksweep", None, [path], {"mt": sizes}, _now())
    return EXIT_OK


def cmd_sinr(args) -> int:
    overrides = parse_overrides(args.set)
    if args.nsp:
        overrides["nsp"] = True
    config, _ = load_config(args.config, overrides)
    stats = output_sinr(config, workers=args.workers)
    rows = [[t, s, q] for t, (s, q) in enumerate(zip(stats.sinr_db, stats.suppression_db))]
    for name in ("mean", "median", "std"):
        rows.append([name, stats.sinr[name], stats.suppression[name]])
    out = _out_dir(args.out)
    path = write_csv(out / "sinr_trials.csv", ["trial", "sinr_db", "suppression_db"], rows)
    print(f"SINR over {config.trials} trials (K={config.k}, nsp={config.nsp}): "
          f"mean {stats.sinr['mean']:.3f} dB, median {stats.sinr['median']:.3f} dB, "
          f"std {stats.sinr['std']:.3f} dB")
    write_manifest(out, "sinr", config, [path], {}, _now())
    return EXIT_OK


def cmd_nsp_check(args) -> int:
    if args.channel:
        H = read_channel_csv(args.channel)
        source = args.channel
    else:
        try:
            nr, mt = (int(v) for v in args.random.lower().split("x"))
        except ValueError as exc:
            raise ConfigError(f"--random expects NRxMT, got {args.random!r}") from exc
        if nr < 1 or mt < 1:
            raise ConfigError("channel dimensions must be >= 1")
        H = sample_channel(nr, mt, random_stream(args.seed, 1))
        source = f"random {nr}x{mt}, seed {args.seed}"

    proj = null_space_projection(H, tol=args.tol)
    P = proj.matrix
    nr, mt = H.shape
    h_norm = np.linalg.norm(H)
    p_norm = np.linalg.norm(P)
    annihilation = np.linalg.norm(H @ P)
    idempotency = np.linalg.norm(P @ P - P)
    hermitian = np.linalg.norm(P - P.conj().T)
    verdict = feasibility(mt, nr)

    checks = [
        ("||HP||_F / ||H||_F", annihilation / h_norm if h_norm else annihilation,
         annihilation <= NSP_TOL * max(1.0, h_norm)),
        ("||P^2 - P||_F", idempotency, idempotency <= NSP_TOL),
        ("||P - P^H||_F", hermitian, hermitian <= NSP_TOL * max(1.0, p_norm)),
    ]
    print(f"channel: {source} ({nr}x{mt})")
    for name, value, ok in checks:
        print(f"{name:>20} = {value:.3e}  [{'ok' if ok else 'FAIL'}]")
    print(f"{'rank(P)':>20} = {proj.rank}")
    print(f"{'rank(H)':>20} = {proj.channel_rank}")
    print(f"{'null-space dim':>20} = {proj.rank}")
    print(f"{'feasibility':>20} = {verdict.message}")
    if proj.rank == 0:
        print(f"{'verdict':>20} = infeasible: P = 0, NSP cannot transmit")
    if not all(ok for _, _, ok in checks):
        raise ToleranceError("projector failed a tolerance check")
    return EXIT_OK


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="omimo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config=True):
        if config:
            p.add_argument("config", nargs="?", help="key = value config file or manifest.json")
            p.add_argument("--set", action="append", metavar="KEY=VALUE",
                           help="override a config key (repeatable)")
        p.add_argument("--out", help="output directory (default $OMIMO_OUT or .)")

    p = sub.add_parser("beampattern", help="normalized beampatterns per K (optionally with NSP)")
    common(p)
    p.add_argument("--nsp", action="store_true", help="add null-space-projected columns")
    p.add_argument("--channel", help="interference channel CSV (default: seeded random)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_beampattern)

    p = sub.add_parser("ksweep", help="effective aperture versus K")
    common(p, config=False)
    p.add_argument("--mt", default="10,15,20", help="comma-separated M_T values")
    p.set_defaults(func=cmd_ksweep)

    p = sub.add_parser("sinr", help="Monte-Carlo output SINR")
    common(p)
    p.add_argument("--nsp", action="store_true", help="project transmissions per trial")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sinr)

    p = sub.add_parser("nsp-check", help="verify the projector for one channel")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--channel", help="channel CSV")
    src.add_argument("--random", metavar="NRxMT", help="draw a CN(0,1) channel")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12, help="relative rank threshold")
    p.set_defaults(func=cmd_nsp_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToleranceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, InfeasibleProjectionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
