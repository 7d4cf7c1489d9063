"""Command-line front end: config documents, presets, CSV emission, and the
certificate/oracle subcommands.

Exit codes: 0 all requested certificates passed, 1 a certificate failed,
2 usage or configuration error, 3 numerical blow-up.
"""

import argparse
import configparser
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import adaptation as ad
from . import certificates as cert
from . import engine
from . import lyapunov as lyap
from .backend import active_backend_name, available_backends, get_backend
from .errors import ConfigError, NkslabError
from .schedule import SwitchingSequence, random_schedule, uniform_schedule, validate_dwell

PRESETS = ("ges_fig2", "guub_fig4", "full_sensing")

_SECTION_KEYS = {
    "domain": {"mode", "y", "n_per_subdomain", "amplitude_a"},
    "scheme": {"c", "dt", "t_final", "integrator", "blowup_cap"},
    "lambda": {"kind", "value", "x_table", "f_table", "prime_sup"},
    "forcing": {"kind", "amplitude", "angular_frequency", "x_table", "f_table"},
    "schedule": {"kind", "instants", "gap1", "gap2", "horizon", "t1_lo",
                 "t1_hi", "t2_lo", "t2_hi", "seed"},
    "adaptation": {"variant", "delta1", "delta2", "sigma", "epsilon", "tau",
                   "c1", "c2", "theta1_init", "theta2_init", "delta_per_step"},
    "output": {"stride", "snapshot_stride"},
}

CSV_HEADER = "t,V1,V2,theta1_hat,theta2_hat,u1,u2"


def _floats(text: str) -> tuple:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _load_document(source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    if source in PRESETS:
        text = resources.files("nkslab.presets").joinpath(f"{source}.cfg").read_text()
        parser.read_string(text, source=source)
        return parser
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"no such preset or config file: {source}")
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"parse error in {path}: {exc}") from exc
    return parser


def _validate_sections(parser: configparser.ConfigParser, source: str):
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        unknown = set(parser[section]) - _SECTION_KEYS[section]
        if unknown:
            raise ConfigError(f"{source}: unknown keys in [{section}]: {sorted(unknown)}")


def _build_schedule(sec) -> SwitchingSequence:
    kind = sec.get("kind", "explicit")
    if kind == "explicit":
        return SwitchingSequence(instants=np.array(_floats(sec["instants"])))
    if kind == "uniform":
        return uniform_schedule(float(sec["gap1"]), float(sec["gap2"]),
                                float(sec["horizon"]))
    if kind == "random":
        bounds = (float(sec["t1_lo"]), float(sec["t1_hi"]),
                  float(sec["t2_lo"]), float(sec["t2_hi"]))
        return random_schedule(bounds, float(sec["horizon"]), int(sec["seed"]))
    raise ConfigError(f"unknown schedule kind {kind!r}")


def parse_config(source: str) -> engine.ExperimentConfig:
    """Load a preset name or a config-file path into a validated config."""
    parser = _load_document(source)
    _validate_sections(parser, source)
    try:
        dom = parser["domain"]
        sch = parser["scheme"]
        lam = parser["lambda"]
        mode = dom["mode"]
        t_final = float(sch["t_final"])

        lam_spec = engine.LambdaSpec(
            kind=lam.get("kind", "constant"),
            value=float(lam.get("value", "0")),
            x_table=_floats(lam["x_table"]) if "x_table" in lam else None,
            f_table=_floats(lam["f_table"]) if "f_table" in lam else None,
            prime_sup=float(lam.get("prime_sup", "0")),
        )
        frc = parser["forcing"] if parser.has_section("forcing") else {}
        frc_spec = engine.ForcingSpec(
            kind=frc.get("kind", "zero") if frc else "zero",
            amplitude=float(frc.get("amplitude", "0")) if frc else 0.0,
            angular_frequency=float(frc.get("angular_frequency", "0")) if frc else 0.0,
            x_table=_floats(frc["x_table"]) if frc and "x_table" in frc else None,
            f_table=_floats(frc["f_table"]) if frc and "f_table" in frc else None,
        )

        adp = parser["adaptation"]
        variant = adp.get("variant", ad.GES_ALG1)
        c1 = c2 = None
        if variant == ad.ISS_ALG3:
            if "c1" in adp and "c2" in adp:
                c1, c2 = float(adp["c1"]), float(adp["c2"])
            else:
                c1, c2 = cert.nominal_C(frc_spec.sup, float(dom["y"]))
        acfg = ad.AdaptationConfig(
            variant=variant,
            delta1=float(adp.get("delta1", "0.01")),
            delta2=float(adp.get("delta2", "0.01")),
            sigma=float(adp.get("sigma", "100")),
            epsilon=float(adp["epsilon"]) if "epsilon" in adp else None,
            tau=float(adp["tau"]) if "tau" in adp else None,
            C1=c1, C2=c2,
            theta1_init=float(adp.get("theta1_init", "0")),
            theta2_init=float(adp.get("theta2_init", "0")),
            delta_per_step=adp.getboolean("delta_per_step", fallback=False),
        )

        schedule = None
        if mode != engine.FULL_SENSING_GPA:
            if not parser.has_section("schedule"):
                raise ConfigError(f"{source}: intermittent mode needs a [schedule] section")
            schedule = _build_schedule(parser["schedule"])

        out = parser["output"] if parser.has_section("output") else {}
        return engine.ExperimentConfig(
            mode=mode,
            Y=float(dom.get("y", "0.5")),
            n_per_subdomain=int(dom.get("n_per_subdomain", "10")),
            c=float(sch.get("c", "0.4")),
            dt=float(sch["dt"]),
            t_final=t_final,
            lambda_spec=lam_spec,
            forcing_spec=frc_spec,
            amplitude_A=float(dom.get("amplitude_a", "3.0")),
            schedule=schedule,
            adaptation=acfg,
            snapshot_stride=int(out.get("snapshot_stride", "100")) if out else 100,
            blowup_cap=float(sch.get("blowup_cap", "1e9")),
            output_stride=int(out.get("stride", "10")) if out else 10,
            integrator=sch.get("integrator", "euler"),
        )
    except ConfigError:
        raise
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{source}: invalid or missing key ({exc})") from exc


def emit_csv(log: lyap.TrajectoryLog, path) -> None:
    """Write the log rows in full round-trip precision plus one snapshot file
    per stored state profile (snapshot_<index>.csv with columns x,u)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in zip(*log.columns()):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    x_nodes = log.meta.get("x_nodes")
    if x_nodes is not None and len(log.snapshot_times):
        for idx, profile in enumerate(log.snapshots):
            snap_path = path.parent / f"{path.stem}_snapshot_{idx}.csv"
            with open(snap_path, "w") as fh:
                fh.write("x,u\n")
                for x, u in zip(x_nodes, profile):
                    fh.write(f"{repr(float(x))},{repr(float(u))}\n")


def read_csv(path) -> lyap.TrajectoryLog:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 7:
        raise ConfigError(f"{path}: expected 7 columns, found {data.shape[1]}")
    return lyap.TrajectoryLog(
        t=data[:, 0], V1=data[:, 1], V2=data[:, 2],
        theta1_hat=data[:, 3], theta2_hat=data[:, 4],
        u1=data[:, 5], u2=data[:, 6], meta={"source": str(path)})


def _print_run_summary(log: lyap.TrajectoryLog):
    v = log.v_total
    print(f"backend={log.meta.get('backend')}  rows={len(log)}  "
          f"V(0)={v[0]:.6g}  V(end)={v[-1]:.6g}  max V={v.max():.6g}")
    print(f"theta1_hat(end)={log.theta1_hat[-1]:.6g}  "
          f"theta2_hat(end)={log.theta2_hat[-1]:.6g}")
    if log.truncated:
        print(f"RUN TRUNCATED: {log.diagnostic}")


def _certificate_for_mode(cfg, log):
    sigma = cfg.adaptation.sigma
    if cfg.mode == engine.INTERMITTENT_GES:
        window = lyap.final_cycles_window(cfg.schedule.instants)
        return lyap.check_ges(log, sigma, fit_window=window)
    if cfg.mode == engine.FULL_SENSING_GPA:
        return lyap.check_gpa(log, sigma, cfg.adaptation.epsilon, cfg.adaptation.tau)
    if cfg.mode == engine.INTERMITTENT_ISS:
        return lyap.check_iss(log, sigma)
    return None   # GUUB needs a sweep; use the sweep subcommand


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    backend = get_backend(args.backend) if args.backend else None
    log = engine.run_closed_loop(cfg, backend=backend)
    _print_run_summary(log)
    if args.out:
        out = Path(args.out) / f"{Path(args.config).stem}.csv"
        emit_csv(log, out)
        print(f"wrote {out}")
    if log.truncated:
        return 3
    report = _certificate_for_mode(cfg, log)
    if report is None:
        print("no single-run certificate for this mode (use `sweep` for the "
              "uniform-bound check)")
        return 0
    print(report)
    print(report.machine_block())
    return 0 if report.passed else 1


def _cmd_sweep(args) -> int:
    cfg = parse_config(args.config)
    amplitudes = _floats(args.amplitudes)
    cfgs = [replace(cfg, amplitude_A=amp) for amp in amplitudes]
    backend = get_backend(args.backend) if args.backend else None
    logs = engine.run_batch(cfgs, backend=backend)
    for amp, log in zip(amplitudes, logs):
        print(f"A = {amp}:")
        _print_run_summary(log)
        if args.out:
            out = Path(args.out) / f"a{amp:g}.csv"
            emit_csv(log, out)
            print(f"wrote {out}")
    if any(log.truncated for log in logs):
        return 3
    report = lyap.check_ultimate_bound(logs)
    print(report)
    print(report.machine_block())
    return 0 if report.passed else 1


def _cmd_certify(args) -> int:
    logs = [read_csv(p) for p in args.csv]
    kind = args.kind
    if kind == "ges":
        window = (args.fit_lo, args.fit_hi) if args.fit_lo is not None else None
        report = lyap.check_ges(logs[0], args.sigma, fit_window=window)
    elif kind == "gpa":
        if args.epsilon is None or args.tau is None:
            raise ConfigError("certify gpa needs --epsilon and --tau")
        report = lyap.check_gpa(logs[0], args.sigma, args.epsilon, args.tau)
    elif kind == "iss":
        report = lyap.check_iss(logs[0], args.sigma)
    elif kind == "guub":
        report = lyap.check_ultimate_bound(logs)
    else:
        raise ConfigError(f"unknown certificate kind {kind!r}")
    print(report)
    print(report.machine_block())
    return 0 if report.passed else 1


def _cmd_oracle(args) -> int:
    if args.oracle == "halperin":
        rng = np.random.default_rng(args.seed)
        failures = 0
        for _ in range(args.trials):
            coeffs = rng.uniform(-1, 1, size=(2, 5))
            def u(x):
                return sum(coeffs[0][k] * np.sin((k + 1) * np.pi * x)
                           + coeffs[1][k] * np.cos((k + 1) * np.pi * x) for k in range(5))
            def du(x):
                return sum((k + 1) * np.pi * (coeffs[0][k] * np.cos((k + 1) * np.pi * x)
                           - coeffs[1][k] * np.sin((k + 1) * np.pi * x)) for k in range(5))
            def d2u(x):
                return sum(-((k + 1) * np.pi) ** 2 * (coeffs[0][k] * np.sin((k + 1) * np.pi * x)
                           + coeffs[1][k] * np.cos((k + 1) * np.pi * x)) for k in range(5))
            lhs, rhs, holds = cert.halperin_pitt_check(u, du, d2u, 0.0, 1.0, args.epsilon)
            failures += 0 if holds else 1
        print(f"halperin: {args.trials - failures}/{args.trials} hold at eps={args.epsilon}")
        return 0 if failures == 0 else 1
    if args.oracle == "gronwall":
        bound = cert.gronwall_sqrt_bound(args.V0, args.theta, args.C, args.delta, args.t)
        ref = float(cert.gronwall_reference(args.V0, args.theta, args.C, args.t))
        margin = (bound - ref) / max(ref, 1e-300)
        print(f"bound={bound:.9g}  integrated={ref:.9g}  relative margin={margin:.3e}")
        return 0 if bound >= ref * (1 - 1e-6) else 1
    if args.oracle == "envelope":
        rng = np.random.default_rng(args.seed)
        worst = -np.inf
        for _ in range(args.trials):
            n_gaps = args.N_star + int(rng.integers(1, 10))
            bad = frozenset(rng.choice(n_gaps, size=args.N_star, replace=False).tolist()
                            ) if args.N_star else frozenset()
            spec = cert.SequenceEnvelopeSpec(
                M=args.M, psi=args.psi, sigma=args.sigma, N_star=args.N_star,
                T_lower=args.T_lower, T_upper=args.T_upper, bad_indices=bad)
            gaps = rng.uniform(args.T_lower, args.T_upper, size=n_gaps)
            traj = cert.simulate_envelope_recurrence(spec, args.V0, gaps)
            bounds = [cert.sequence_envelope_bound(spec, args.V0, i)
                      for i in range(len(traj))]
            worst = max(worst, float(np.max(traj / np.asarray(bounds))))
        print(f"envelope: worst trajectory/bound ratio over {args.trials} "
              f"sequences = {worst:.6f}")
        return 0 if worst <= 1.0 + 1e-9 else 1
    raise ConfigError(f"unknown oracle {args.oracle!r}")


def _cmd_validate_schedule(args) -> int:
    cfg = parse_config(args.config)
    if cfg.schedule is None:
        print("full-sensing config: check grid is uniform with period "
              f"tau={cfg.adaptation.tau}")
        return 0
    bounds = validate_dwell(cfg.schedule)
    print(f"instants: {[float(t) for t in cfg.schedule.instants]}")
    print(f"empirical dwell bounds: T1 in [{bounds[0]:g}, {bounds[1]:g}], "
          f"T2 in [{bounds[2]:g}, {bounds[3]:g}]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nkslab",
        description="Adaptive boundary control laboratory for the noisy "
                    "Kuramoto-Sivashinsky equation under intermittent sensing "
                    f"(backends: {', '.join(available_backends())}; "
                    f"active: {active_backend_name()})")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a preset or config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="directory for CSV output")
    p_run.add_argument("--backend", choices=["python", "compiled"])
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="amplitude sweep + uniform-bound check")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--amplitudes", default="3,5,7")
    p_sweep.add_argument("--out")
    p_sweep.add_argument("--backend", choices=["python", "compiled"])
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cert = sub.add_parser("certify", help="run a certificate check on CSV logs")
    p_cert.add_argument("kind", choices=["ges", "gpa", "iss", "guub"])
    p_cert.add_argument("csv", nargs="+")
    p_cert.add_argument("--sigma", type=float, default=100.0)
    p_cert.add_argument("--epsilon", type=float)
    p_cert.add_argument("--tau", type=float)
    p_cert.add_argument("--fit-lo", type=float, dest="fit_lo")
    p_cert.add_argument("--fit-hi", type=float, dest="fit_hi")
    p_cert.set_defaults(func=_cmd_certify)

    p_oracle = sub.add_parser("oracle", help="exercise a lemma oracle")
    p_oracle.add_argument("oracle", choices=["halperin", "gronwall", "envelope"])
    p_oracle.add_argument("--epsilon", type=float, default=1.0)
    p_oracle.add_argument("--trials", type=int, default=100)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--V0", type=float, default=1.0)
    p_oracle.add_argument("--theta", type=float, default=1.0)
    p_oracle.add_argument("--C", type=float, default=2.0)
    p_oracle.add_argument("--delta", type=float, default=1.0)
    p_oracle.add_argument("--t", type=float, default=1.0)
    p_oracle.add_argument("--M", type=float, default=1.0)
    p_oracle.add_argument("--psi", type=float, default=1.0)
    p_oracle.add_argument("--sigma", type=float, default=2.0)
    p_oracle.add_argument("--N-star", type=int, default=2, dest="N_star")
    p_oracle.add_argument("--T-lower", type=float, default=0.5, dest="T_lower")
    p_oracle.add_argument("--T-upper", type=float, default=1.5, dest="T_upper")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_val = sub.add_parser("validate-schedule", help="dwell-time validation")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate_schedule)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NkslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
