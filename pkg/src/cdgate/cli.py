"""Command-line front end.

Exit codes: 0 success, 2 config error, 3 accuracy failure, 4 check failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dynamics import AccuracyError
from .gates import LeakageError
from .plots import PlotError, emit_plots
from .scenarios import (
    PRESETS,
    SWEEP_PARAMS,
    SWEEP_PRESETS,
    ConfigError,
    SweepSpec,
    resolve_scenario,
    run_scenario,
    run_sweep,
    validate_effective_model,
    write_sweep_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_ACCURACY, EXIT_CHECK = 0, 2, 3, 4


def _values(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --values list {text!r}") from exc


def cmd_run(args) -> int:
    cfg = resolve_scenario(args.target)
    over = {}
    if args.dt is not None:
        over["dt"] = args.dt
    if args.quad is not None:
        over["quad_n"] = args.quad
    if args.fock is not None:
        over["n_max"] = args.fock
    cfg = replace(cfg, **over).validate()
    res = run_scenario(cfg)
    path = res.write_csv(Path(args.out) / f"{cfg.name}.csv")
    diag = ", ".join(f"{k}={v:.4g}" for k, v in res.diagnostics.items() if isinstance(v, (int, float)))
    print(f"{cfg.name}: final fidelity {res.final_fidelity:.6f}, leakage {res.leakage:.2e}, {res.runtime:.2f}s -> {path}")
    print(f"  {diag}")
    if args.check:
        bad = res.check()
        for b in bad:
            print(f"  CHECK FAILED: {b}")
        if bad:
            return EXIT_CHECK
        print("  check passed")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.preset in SWEEP_PRESETS:
        base = SWEEP_PRESETS[args.preset]
        param = args.param or base.param
        values = _values(args.values) if args.values else base.values
        spec = SweepSpec(param, values, base.base if param == base.param else replace(base.base, name=args.preset))
        name = args.preset
    elif args.preset in PRESETS:
        if not args.param or not args.values:
            raise ConfigError("a run preset needs --param and --values to sweep")
        spec = SweepSpec(args.param, _values(args.values), PRESETS[args.preset])
        name = args.preset
    else:
        raise ConfigError(f"unknown preset {args.preset!r}")
    rows = run_sweep(spec)
    path = write_sweep_csv(rows, Path(args.out) / f"{name}-{spec.param}.csv")
    for r in rows:
        print(f"{spec.param}={r.value:g}: {r.final_fidelity:.6f} leak {r.leakage:.2e} {r.status}")
    print(f"-> {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = resolve_scenario(args.preset)
    rep = validate_effective_model(cfg)
    print(f"spectrum on the five-state manifold: {np.array2string(rep.spectrum, precision=6)} (err {rep.spectrum_error:.2e})")
    print(f"min full-vs-effective overlap: {rep.min_overlap:.6f}")
    print(f"survival |phi_1>: {rep.survival_phi1:.12f}   |phi_7>: {rep.survival_phi7:.6f}")
    print(f"population of Fock layer n={cfg.n_max + 1}: {rep.fock_leak:.2e}")
    if args.out:
        out = Path(args.out) / f"{cfg.name}-effective.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w") as fh:
            fh.write("t,overlap\n")
            for t, o in zip(rep.times, rep.overlap):
                fh.write(f"{t!r},{o!r}\n")
        print(f"-> {out}")
    return EXIT_OK


def cmd_plots(args) -> int:
    for p in emit_plots(Path(args.dir)):
        print(p)
    return EXIT_OK


def cmd_list(args) -> int:
    for name, c in PRESETS.items():
        flag = " (slow)" if c.slow else ""
        print(f"run   {name:18s} {c.regime}/{c.protocol}/{c.gate} t_f={c.t_f:g}{flag}")
    for name, s in SWEEP_PRESETS.items():
        print(f"sweep {name:18s} {s.param} over {len(s.values)} values")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cdgate", description="Counterdiabatic geometric gate simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one preset or config file")
    r.add_argument("target", help="preset name or path to a key = value config file")
    r.add_argument("--out", default="results")
    r.add_argument("--check", action="store_true", help="exit 4 if the preset thresholds fail")
    r.add_argument("--dt", type=float)
    r.add_argument("--quad", type=int, help="quadrature grid size per angle")
    r.add_argument("--fock", type=int, help="Fock cutoff n_max")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="sweep t_f, gamma or kappa")
    s.add_argument("preset")
    s.add_argument("--param", choices=sorted(SWEEP_PARAMS))
    s.add_argument("--values", help="comma-separated, sorted")
    s.add_argument("--out", default="results")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate-effective", help="compare the full and effective two-qubit models")
    v.add_argument("preset")
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    pl = sub.add_parser("plots", help="emit plot scripts for the CSVs in a directory")
    pl.add_argument("dir")
    pl.set_defaults(func=cmd_plots)

    ls = sub.add_parser("list", help="list presets")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PlotError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AccuracyError, LeakageError) as exc:
        hint = f" (try --dt {exc.suggested_dt:.3g})" if getattr(exc, "suggested_dt", None) else ""
        print(f"accuracy failure: {exc}{hint}", file=sys.stderr)
        return EXIT_ACCURACY


if __name__ == "__main__":
    sys.exit(main())
