"""Scenario configuration, built-in presets and the run/sweep pipeline."""

from __future__ import annotations

import configparser
import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import DensityMatrix
from .dynamics import (
    AccuracyError,
    LindbladSet,
    TimeGrid,
    Trajectory,
    default_dt,
    evolve_columns,
    evolve_lindblad,
    export_trajectory_csv,
)
from .gates import (
    FIXED_SINGLE,
    FIXED_TWO,
    LeakageError,
    average_fidelity,
    gate_matrix,
    single_qubit_state,
    target_gate,
    two_qubit_state,
)
from .hamiltonians import (
    COMPUTATIONAL_PHI,
    QRSubspace,
    embed_effective_matrix,
    h_qr_coupling,
    phi_index,
    qr_effective_model,
    qubit_resonator_model,
    three_level_model,
)
from .pulses import GATES, PROTOCOLS, REGIMES, PulseSchedule, ScheduleError, build_schedule

FIDELITY_MODES = ("average", "fixed")
SWEEP_PARAMS = {"tf": "t_f", "gamma": "gamma", "kappa": "kappa"}
THREE_LEVEL_COMPUTATIONAL = (0, 2)


class ConfigError(ValueError):
    """Invalid scenario or sweep configuration."""


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    regime: str = "tdd"
    protocol: str = "counterdiabatic"
    gate: str = "sigma-x"
    t_f: float = 3.0
    omega_theta: float = 1.0
    omega_big: float = 0.01
    delta: float = 50.0
    g1: float = 50.0
    g2: float = 50.0
    n_max: int = 2
    gamma: float = 0.0
    kappa: float = 0.0
    alphas: tuple[float, ...] = ()
    dt: float | None = None
    quad_n: int = 16
    fidelity: str = ""
    dissipative: bool = False
    n_samples: int = 1000
    min_fidelity: float | None = None
    max_fidelity: float | None = None
    slow: bool = False

    def validate(self) -> "ScenarioConfig":
        if self.regime not in REGIMES:
            raise ConfigError(f"unknown regime {self.regime!r}; choose from {REGIMES}")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}; choose from {PROTOCOLS}")
        if self.gate not in GATES:
            raise ConfigError(f"unknown gate {self.gate!r}; choose from {GATES}")
        if self.regime == "one-photon-resonance" and self.protocol != "counterdiabatic":
            raise ConfigError("one-photon resonance is defined only with the counterdiabatic drive")
        if not self.t_f > 0:
            raise ConfigError("t_f must be positive")
        if self.regime == "large-detuning" and not self.delta > 0:
            raise ConfigError("large detuning needs delta > 0")
        if self.gamma < 0 or self.kappa < 0:
            raise ConfigError("decay rates must be non-negative")
        if self.kappa > 0 and self.gate != "two-qubit":
            raise ConfigError("kappa applies only to the two-qubit model")
        if self.gate == "two-qubit" and (self.g1 <= 0 or self.g2 <= 0):
            raise ConfigError("g1 and g2 must be positive")
        if self.n_max < 2:
            raise ConfigError("n_max must be >= 2")
        if self.fidelity and self.fidelity not in FIDELITY_MODES:
            raise ConfigError(f"fidelity must be one of {FIDELITY_MODES}")
        if self.resolved_fidelity() == "average" and (self.gate == "two-qubit" or self.is_dissipative()):
            raise ConfigError("average fidelity is defined for closed single-qubit runs only")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.quad_n < 2:
            raise ConfigError("quad_n must be >= 2")
        n_alpha = 6 if self.gate == "two-qubit" else 2
        if self.alphas and len(self.alphas) != n_alpha:
            raise ConfigError(f"{self.gate} needs {n_alpha} initial-state angles")
        return self

    def is_dissipative(self) -> bool:
        return self.dissipative or self.gamma > 0 or self.kappa > 0

    def resolved_fidelity(self) -> str:
        if self.fidelity:
            return self.fidelity
        if self.gate != "two-qubit" and self.regime != "large-detuning" and not self.is_dissipative():
            return "average"
        return "fixed"

    def resolved_alphas(self) -> tuple[float, ...]:
        if self.alphas:
            return tuple(self.alphas)
        return FIXED_TWO if self.gate == "two-qubit" else FIXED_SINGLE


@dataclass
class RunResult:
    config: ScenarioConfig
    times: np.ndarray = field(repr=False)
    fidelity: np.ndarray = field(repr=False)
    final_fidelity: float
    leakage: float
    populations: np.ndarray = field(repr=False)
    labels: tuple[str, ...]
    drift: np.ndarray = field(repr=False)
    diagnostics: dict = field(default_factory=dict)
    runtime: float = 0.0
    trajectory: Trajectory | None = field(default=None, repr=False)

    def check(self) -> list[str]:
        """Threshold violations of the preset, empty when all pass."""
        bad = []
        c = self.config
        if c.min_fidelity is not None and not self.final_fidelity >= c.min_fidelity:
            bad.append(f"final fidelity {self.final_fidelity:.6f} < {c.min_fidelity}")
        if c.max_fidelity is not None and not self.final_fidelity < c.max_fidelity:
            bad.append(f"final fidelity {self.final_fidelity:.6f} >= {c.max_fidelity}")
        return bad

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "fidelity", *[f"pop_{lab}" for lab in self.labels], "norm_drift"])
            for k, t in enumerate(self.times):
                w.writerow([repr(float(x)) for x in (t, self.fidelity[k], *self.populations[k], self.drift[k])])
        return path


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------


def make_model(cfg: ScenarioConfig, schedule: PulseSchedule | None = None, n_max: int | None = None):
    schedule = schedule or build_schedule(cfg)
    if cfg.gate == "two-qubit":
        return qubit_resonator_model(schedule, cfg.g1, cfg.g2, cfg.n_max if n_max is None else n_max)
    return three_level_model(schedule)


def make_grid(cfg: ScenarioConfig, model) -> TimeGrid:
    dt = cfg.dt if cfg.dt is not None else default_dt(cfg.t_f, model.max_frequency)
    return TimeGrid(0.0, model.t_total, dt, model.breakpoints, cfg.n_samples)


def computational_indices(cfg: ScenarioConfig, n_max: int | None = None) -> list[int]:
    if cfg.gate == "two-qubit":
        return [phi_index(k, cfg.n_max if n_max is None else n_max) for k in COMPUTATIONAL_PHI]
    return list(THREE_LEVEL_COMPUTATIONAL)


def initial_full_state(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """Initial state in the model space and its target image."""
    a = cfg.resolved_alphas()
    u = gate_matrix(target_gate(cfg.regime, cfg.gate)).matrix
    comp = two_qubit_state(*a) if cfg.gate == "two-qubit" else single_qubit_state(*a)
    dim = 9 * (cfg.n_max + 1) if cfg.gate == "two-qubit" else 3
    idx = computational_indices(cfg)
    psi0 = np.zeros(dim, dtype=complex)
    tgt = np.zeros(dim, dtype=complex)
    psi0[idx] = comp
    tgt[idx] = u @ comp
    return psi0, tgt


def large_detuning_diagnostics(schedule: PulseSchedule, n: int = 20001) -> dict:
    """Regime checks for a counterdiabatic large-detuning schedule.

    ``r1 = max |Omega_{p,s}| / Delta``; ``ratio_*`` is the range of
    ``|Omega_p / Omega_s|`` over samples where both amplitudes are at least half
    the peak; ``r2 = mean |dTheta/dt| / max |Delta_eff|``.
    """
    t = np.linspace(0.0, schedule.t_total, n)
    p, s, d = schedule.evaluate(t)
    ap, as_ = np.abs(p), np.abs(s)
    peak = max(ap.max(), as_.max())
    mask = (ap >= 0.5 * peak) & (as_ >= 0.5 * peak)
    ratio = ap[mask] / as_[mask]
    eff = schedule.effective_controls(t)
    de_max = float(np.max(np.abs(eff.delta_eff)))
    return {
        "r1": float(peak / np.max(np.abs(d))),
        "ratio_min": float(ratio.min()) if ratio.size else float("nan"),
        "ratio_max": float(ratio.max()) if ratio.size else float("nan"),
        "r2": float(np.mean(np.abs(eff.omega_eff_cd)) / de_max) if de_max > 0 else float("inf"),
    }


def run_scenario(cfg: ScenarioConfig, keep_trajectory: bool = False) -> RunResult:
    cfg.validate()
    start = time.perf_counter()
    try:
        schedule = build_schedule(cfg)
    except ScheduleError as exc:
        raise ConfigError(str(exc)) from exc
    model = make_model(cfg, schedule)
    grid = make_grid(cfg, model)
    idx = computational_indices(cfg)
    psi0, tgt = initial_full_state(cfg)
    diagnostics: dict = {"dt": grid.dt, "steps": grid.n_steps}
    if cfg.regime == "large-detuning" and cfg.protocol == "counterdiabatic":
        diagnostics.update(large_detuning_diagnostics(schedule))

    if cfg.is_dissipative():
        lind = (
            LindbladSet.qubit_resonator(cfg.gamma, cfg.kappa, cfg.n_max)
            if cfg.gate == "two-qubit"
            else LindbladSet.three_level(cfg.gamma)
        )
        traj = evolve_lindblad(model, DensityMatrix(np.outer(psi0, psi0.conj())), lind, grid)
        fid = np.clip(np.real(np.einsum("i,tij,j->t", tgt.conj(), traj.states, tgt)), 0.0, 1.0)
        pops = traj.populations()
        leak = float(1.0 - pops[-1, idx].sum())
        diagnostics["min_eigenvalue"] = traj.min_eigenvalue
    elif cfg.resolved_fidelity() == "average":
        traj = evolve_columns(model, np.eye(model.dim, dtype=complex)[:, idx], grid)
        sub = traj.states[:, idx, :]
        avg = average_fidelity(lambda c: sub @ c, target_gate(cfg.regime, cfg.gate), cfg.quad_n)
        fid = avg.trace
        fixed = traj.states @ psi0[idx]
        pops = np.abs(fixed) ** 2
        leak = float(np.max(1.0 - np.sum(np.abs(sub[-1]) ** 2, axis=0)))
    else:
        traj = evolve_columns(model, psi0[:, None], grid)
        states = traj.states[:, :, 0]
        fid = np.abs(states @ tgt.conj()) ** 2
        pops = np.abs(states) ** 2
        leak = float(1.0 - pops[-1, idx].sum())
    diagnostics["max_step_drift"] = traj.max_step_drift
    return RunResult(
        config=cfg,
        times=traj.times,
        fidelity=np.asarray(fid, dtype=float),
        final_fidelity=float(fid[-1]),
        leakage=max(leak, 0.0),
        populations=pops,
        labels=model.labels,
        drift=traj.drift,
        diagnostics=diagnostics,
        runtime=time.perf_counter() - start,
        trajectory=traj if keep_trajectory else None,
    )


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple[float, ...]
    base: ScenarioConfig

    def __post_init__(self) -> None:
        if self.param not in SWEEP_PARAMS:
            raise ConfigError(f"sweep parameter must be one of {tuple(SWEEP_PARAMS)}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ConfigError("empty sweep")
        lo_ok = all(v > 0 for v in vals) if self.param == "tf" else all(v >= 0 for v in vals)
        if not lo_ok:
            raise ConfigError("sweep values must be positive (t_f) or non-negative (rates)")
        if list(vals) != sorted(vals):
            raise ConfigError("sweep values must be sorted")
        object.__setattr__(self, "values", vals)

    def point(self, value: float) -> ScenarioConfig:
        cfg = replace(self.base, **{SWEEP_PARAMS[self.param]: value}, min_fidelity=None, max_fidelity=None)
        if self.param in ("gamma", "kappa"):
            cfg = replace(cfg, dissipative=True, fidelity="fixed")
        return cfg


@dataclass(frozen=True)
class SweepRow:
    value: float
    final_fidelity: float
    leakage: float
    status: str


def _sweep_point(cfg: ScenarioConfig) -> tuple[float, float, str]:
    try:
        r = run_scenario(cfg)
        return r.final_fidelity, r.leakage, "ok"
    except AccuracyError as exc:
        return float("nan"), float("nan"), f"accuracy-failure: {exc}"
    except (ConfigError, LeakageError, ValueError) as exc:
        return float("nan"), float("nan"), f"error: {exc}"


def worker_count(n_tasks: int) -> int:
    env = os.environ.get("CDGATE_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    cfgs = [spec.point(v) for v in spec.values]
    for c in cfgs:
        c.validate()
    workers = worker_count(len(cfgs))
    if workers == 1:
        outs = [_sweep_point(c) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_sweep_point, cfgs))
    return [SweepRow(v, f, l, s) for v, (f, l, s) in zip(spec.values, outs)]


def write_sweep_csv(rows: Sequence[SweepRow], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["value", "final_fidelity", "leakage", "status"])
        for r in rows:
            w.writerow([repr(r.value), repr(r.final_fidelity), repr(r.leakage), r.status])
    return path


# --------------------------------------------------------------------------
# full vs effective two-qubit model
# --------------------------------------------------------------------------


@dataclass
class EffectiveReport:
    times: np.ndarray = field(repr=False)
    overlap: np.ndarray = field(repr=False)
    min_overlap: float
    survival_phi1: float
    survival_phi7: float
    fock_leak: float  # max population of the n = n_max + 1 layer in the enlarged run
    spectrum: np.ndarray
    spectrum_error: float


def subspace_spectrum(g1: float, g2: float) -> tuple[np.ndarray, float]:
    """Eigenvalues of the coupling on ``phi_2 .. phi_6`` and their distance from ``{-G, 0, 0, 0, G}``."""
    sub = QRSubspace(2)
    h = h_qr_coupling(g1, g2, 2)[np.ix_(sub.a1, sub.a1)]
    w = np.linalg.eigvalsh(h)
    G = np.hypot(g1, g2)
    return w, float(np.max(np.abs(w - np.array([-G, 0.0, 0.0, 0.0, G]))))


def validate_effective_model(cfg: ScenarioConfig) -> EffectiveReport:
    cfg.validate()
    if cfg.gate != "two-qubit":
        raise ConfigError("effective-model validation needs a two-qubit scenario")
    schedule = build_schedule(cfg)
    full = make_model(cfg, schedule)
    grid = make_grid(cfg, full)
    a = cfg.resolved_alphas()
    comp = two_qubit_state(*a)
    v_eff = np.array([comp[1], 0.0, comp[2]], dtype=complex)
    v_eff /= np.linalg.norm(v_eff)
    psi_full = embed_effective_matrix(v_eff, cfg.g1, cfg.g2, cfg.n_max)

    eff = qr_effective_model(schedule, cfg.g1, cfg.g2)
    tr_eff = evolve_columns(eff, v_eff[:, None], grid)
    d = full.dim
    i1, i7 = phi_index(1, cfg.n_max), phi_index(7, cfg.n_max)
    y0 = np.zeros((d, 3), dtype=complex)
    y0[:, 0] = psi_full
    y0[i1, 1] = 1.0
    y0[i7, 2] = 1.0
    tr_full = evolve_columns(full, y0, grid)
    embedded = embed_effective_matrix(tr_eff.states[:, :, 0], cfg.g1, cfg.g2, cfg.n_max)
    overlap = np.abs(np.einsum("ti,ti->t", embedded.conj(), tr_full.states[:, :, 0])) ** 2

    # truncation guard: one more Fock layer must stay empty
    big_n = cfg.n_max + 1
    big = make_model(cfg, schedule, n_max=big_n)
    psi_big = embed_effective_matrix(v_eff, cfg.g1, cfg.g2, big_n)
    tr_big = evolve_columns(big, psi_big[:, None], make_grid(cfg, big))
    layer = [k for k in range(big.dim) if k % (big_n + 1) == big_n]
    fock_leak = float(np.max(np.sum(np.abs(tr_big.states[:, layer, 0]) ** 2, axis=1)))

    w, err = subspace_spectrum(cfg.g1, cfg.g2)
    return EffectiveReport(
        times=tr_full.times,
        overlap=overlap,
        min_overlap=float(overlap.min()),
        survival_phi1=float(abs(tr_full.final[i1, 1]) ** 2),
        survival_phi7=float(abs(tr_full.final[i7, 2]) ** 2),
        fock_leak=fock_leak,
        spectrum=w,
        spectrum_error=err,
    )


# --------------------------------------------------------------------------
# presets and config files
# --------------------------------------------------------------------------


def _sc(name, regime, protocol, gate, t_f, **kw) -> ScenarioConfig:
    return ScenarioConfig(name=name, regime=regime, protocol=protocol, gate=gate, t_f=t_f, **kw)


CD, AD = "counterdiabatic", "adiabatic"
TDD, LARGE, RES = "tdd", "large-detuning", "one-photon-resonance"

PRESETS: dict[str, ScenarioConfig] = {
    c.name: c
    for c in (
        # time-dependent detuning, single qubit
        _sc("fig1a", TDD, AD, "sigma-x", 30.0, min_fidelity=0.99),
        _sc("fig1b", TDD, CD, "sigma-x", 3.0, min_fidelity=0.999),
        _sc("fig1d-agqc-short", TDD, AD, "sigma-x", 3.0, max_fidelity=0.95),
        _sc("fig1e", TDD, AD, "sigma-z", 30.0, min_fidelity=0.99),
        _sc("fig1f", TDD, CD, "sigma-z", 3.0, min_fidelity=0.999),
        _sc("fig1h-agqc-short", TDD, AD, "sigma-z", 3.0, max_fidelity=0.95),
        # large detuning, single qubit
        _sc("fig2a", LARGE, AD, "sigma-x", 5000.0, slow=True),
        _sc("fig2b", LARGE, CD, "sigma-x", 30.0, min_fidelity=0.99),
        _sc("fig2d-long", LARGE, CD, "sigma-x", 1000.0),
        _sc("fig2e", LARGE, AD, "sigma-z", 2500.0, slow=True),
        _sc("fig2f", LARGE, CD, "sigma-z", 30.0, min_fidelity=0.99),
        _sc("fig2h-long", LARGE, CD, "sigma-z", 1000.0),
        # one-photon resonance
        _sc("res-x", RES, CD, "sigma-x", 3.0, min_fidelity=0.999),
        _sc("res-z", RES, CD, "sigma-z", 3.0, min_fidelity=0.999),
        # two qubits
        _sc("fig4b", TDD, CD, "two-qubit", 30.0, min_fidelity=0.99),
        _sc("fig4d", LARGE, CD, "two-qubit", 30.0, min_fidelity=0.99),
        _sc("fig4-res", RES, CD, "two-qubit", 30.0, min_fidelity=0.99),
    )
}

GAMMAS = (0.0, 0.0025, 0.005, 0.0075, 0.01)
TF_TDD = (0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 50.0)
TF_LARGE_CD = (3.0, 5.0, 10.0, 20.0, 30.0, 50.0, 100.0, 200.0, 500.0, 1000.0)
TF_LARGE_AD = (100.0, 300.0, 1000.0, 2000.0, 5000.0)
TF_TWO = (1.0, 3.0, 10.0, 30.0)

SWEEP_PRESETS: dict[str, SweepSpec] = {
    "fig1c-agqc": SweepSpec("tf", TF_TDD, replace(PRESETS["fig1a"], name="fig1c-agqc")),
    "fig1c-sagqc": SweepSpec("tf", TF_TDD, replace(PRESETS["fig1b"], name="fig1c-sagqc")),
    "fig1g-agqc": SweepSpec("tf", TF_TDD, replace(PRESETS["fig1e"], name="fig1g-agqc")),
    "fig1g-sagqc": SweepSpec("tf", TF_TDD, replace(PRESETS["fig1f"], name="fig1g-sagqc")),
    "fig2c-sagqc": SweepSpec("tf", TF_LARGE_CD, replace(PRESETS["fig2b"], name="fig2c-sagqc")),
    "fig2c-agqc": SweepSpec("tf", TF_LARGE_AD, replace(PRESETS["fig2a"], name="fig2c-agqc")),
    "fig2g-sagqc": SweepSpec("tf", TF_LARGE_CD, replace(PRESETS["fig2f"], name="fig2g-sagqc")),
    "fig2g-agqc": SweepSpec("tf", TF_LARGE_AD, replace(PRESETS["fig2e"], name="fig2g-agqc")),
    "fig4a": SweepSpec("tf", TF_TWO, replace(PRESETS["fig4b"], name="fig4a")),
    "fig4c": SweepSpec("tf", TF_TWO, replace(PRESETS["fig4d"], name="fig4c")),
    "fig5a-agqc": SweepSpec("gamma", GAMMAS, replace(PRESETS["fig1a"], name="fig5a-agqc")),
    "fig5a-sagqc": SweepSpec("gamma", GAMMAS, replace(PRESETS["fig1b"], name="fig5a-sagqc")),
    "fig5b-agqc": SweepSpec("gamma", GAMMAS, replace(PRESETS["fig1e"], name="fig5b-agqc")),
    "fig5b-sagqc": SweepSpec("gamma", GAMMAS, replace(PRESETS["fig1f"], name="fig5b-sagqc")),
    "fig5c-agqc": SweepSpec("gamma", GAMMAS, replace(PRESETS["fig2a"], name="fig5c-agqc")),
    "fig5c-sagqc": SweepSpec("gamma", GAMMAS, replace(PRESETS["fig2b"], name="fig5c-sagqc")),
    "fig5d-agqc": SweepSpec("gamma", GAMMAS, replace(PRESETS["fig2e"], name="fig5d-agqc")),
    "fig5d-sagqc": SweepSpec("gamma", GAMMAS, replace(PRESETS["fig2f"], name="fig5d-sagqc")),
    "fig6a": SweepSpec("kappa", GAMMAS, replace(PRESETS["fig4b"], name="fig6a")),
    "fig6b": SweepSpec("kappa", GAMMAS, replace(PRESETS["fig4d"], name="fig6b")),
}
SWEEP_PRESETS["fig5"] = SWEEP_PRESETS["fig5a-sagqc"]


def _parse_value(key: str, raw: str):
    kinds = {f.name: f.type for f in fields(ScenarioConfig)}
    if key not in kinds:
        raise ConfigError(f"unknown config key {key!r}")
    raw = raw.strip()
    t = str(kinds[key])
    try:
        if key == "alphas":
            return tuple(float(eval_angle(x)) for x in raw.split(",") if x.strip())
        if t.startswith("bool"):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if t.startswith("int"):
            return int(raw)
        if "float" in t:
            return None if raw.lower() in ("", "none") else float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def eval_angle(text: str) -> float:
    """Float or a simple multiple of pi such as ``3pi/8`` or ``pi/4``."""
    s = text.strip().replace(" ", "").lower()
    if "pi" not in s:
        return float(s)
    num, _, den = s.partition("/")
    coef = num.replace("*", "").replace("pi", "")
    c = float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0)
    return c * np.pi / (float(den) if den else 1.0)


def load_config(path) -> ScenarioConfig:
    """Read a flat ``key = value`` file (an optional ``[scenario]`` header is allowed).

    A ``preset = <name>`` line starts from that built-in and overrides fields.
    """
    text = Path(path).read_text()
    if not text.lstrip().startswith("["):
        text = "[scenario]\n" + text
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    items = dict(parser.items(parser.sections()[0])) if parser.sections() else {}
    if not items:
        raise ConfigError(f"{path} has no settings")
    base = ScenarioConfig(name=Path(path).stem)
    if "preset" in items:
        name = items.pop("preset")
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        base = replace(PRESETS[name], name=Path(path).stem)
    kw = {k: _parse_value(k, v) for k, v in items.items()}
    return replace(base, **kw).validate()


def resolve_scenario(name_or_path: str) -> ScenarioConfig:
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    p = Path(name_or_path)
    if p.is_file():
        return load_config(p)
    raise ConfigError(f"{name_or_path!r} is neither a preset nor a config file")
