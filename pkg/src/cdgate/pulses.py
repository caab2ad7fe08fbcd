"""Control schedules for the three coupling regimes.

Every schedule is a piecewise-smooth function on ``[0, T]`` with ``T = 2 t_f``.
Discontinuities (mixing-angle resets and phase switches) sit exactly on the
declared breakpoints, and each piece is evaluated with its own formula, so a
value requested *at* a breakpoint from the left segment is the left limit.

Conventions (hbar = 1, rotating frame)::

    <0|H|e> = Omega_p / 2,   <1|H|e> = Omega_s / 2,   <e|H|e> = -Delta
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

PI = np.pi

ROUNDTRIP_TOL = 1e-9

MIXING_KINDS = ("cubic-tdd", "quintic-large-x", "cubic-large-z")
REGIMES = ("tdd", "large-detuning", "one-photon-resonance")
PROTOCOLS = ("adiabatic", "counterdiabatic")
GATES = ("sigma-x", "sigma-z", "two-qubit")

# mixing parameter eta per gate
ETA = {"sigma-x": PI / 4, "sigma-z": PI / 2}


class ScheduleError(ValueError):
    """Unknown or inconsistent regime/protocol/gate request."""


class SingularityError(ZeroDivisionError):
    """Counterdiabatic amplitude requested where the mixing amplitude vanishes."""


class RegimeError(ValueError):
    """Inverse engineering produced no admissible (real, non-negative) solution."""


# --------------------------------------------------------------------------
# mixing angles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MixingAngleSchedule:
    """Two identical polynomial sweeps, one on ``[0, t_f)`` and one on ``[t_f, 2 t_f]``."""

    kind: str
    t_f: float
    coefficients: tuple[float, ...] = field(init=False)

    def __post_init__(self) -> None:
        if self.kind not in MIXING_KINDS:
            raise ScheduleError(f"unknown mixing-angle kind {self.kind!r}")
        if not self.t_f > 0:
            raise ScheduleError("t_f must be positive")
        tf = float(self.t_f)
        if self.kind == "quintic-large-x":
            coeffs = (
                PI / 2,
                0.0,
                -15 * PI / tf**2,
                50 * PI / tf**3,
                -60 * PI / tf**4,
                24 * PI / tf**5,
            )
        else:
            coeffs = (0.0, 0.0, 3 * PI / tf**2, -2 * PI / tf**3)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def t_total(self) -> float:
        return 2.0 * self.t_f

    def segments(self) -> list[tuple[float, float]]:
        """Smooth pieces as (start, end) pairs, end inclusive for its own formula."""
        return [(0.0, self.t_f), (self.t_f, 2.0 * self.t_f)]


def eval_mixing_angle(s: MixingAngleSchedule, t, half: int | None = None):
    """Angle and its exact time derivative.

    ``half`` selects which polynomial piece to use; by default the piece is
    chosen right-continuously, so ``t = t_f`` gives the start of the second
    sweep. Pass ``half=0`` to get the left limit there.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > 2.0 * s.t_f * (1 + 1e-12)):
        raise ValueError(f"t outside [0, {2.0 * s.t_f}]")
    if half is None:
        halves = (t_arr >= s.t_f).astype(int)
    else:
        if half not in (0, 1):
            raise ValueError("half must be 0 or 1")
        halves = np.full(t_arr.shape, half)
    tau = t_arr - halves * s.t_f
    c = s.coefficients
    angle = np.zeros_like(tau)
    rate = np.zeros_like(tau)
    # Horner for value and derivative together
    for k in range(len(c) - 1, -1, -1):
        rate = rate * tau + angle
        angle = angle * tau + c[k]
    if np.ndim(t) == 0:
        return float(angle), float(rate)
    return angle, rate


@dataclass(frozen=True)
class PhaseSchedule:
    """Piecewise-constant drive phase."""

    values: tuple[float, ...]
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.values) != len(self.breakpoints) + 1:
            raise ScheduleError("need exactly one more phase value than breakpoints")
        if list(self.breakpoints) != sorted(self.breakpoints):
            raise ScheduleError("phase breakpoints must be sorted")

    def __call__(self, t, segment: int | None = None):
        if segment is not None:
            return np.full(np.shape(t), self.values[segment]) if np.ndim(t) else self.values[segment]
        idx = np.searchsorted(self.breakpoints, t, side="right")
        return np.asarray(self.values)[idx]


# --------------------------------------------------------------------------
# pointwise pulse algebra
# --------------------------------------------------------------------------


def cd_amplitude(omega_eta, d_omega_eta, delta, d_delta, omega_theta):
    """Counterdiabatic amplitude ``(dOmega_eta * Delta - Omega_eta * dDelta) / Omega_theta**2``."""
    ot = np.asarray(omega_theta, dtype=float)
    if np.any(ot == 0.0):
        raise SingularityError("mixing amplitude Omega_theta vanishes")
    out = (np.asarray(d_omega_eta) * delta - np.asarray(omega_eta) * d_delta) / ot**2
    return float(out) if np.ndim(out) == 0 else out


def eta_weights(eta) -> tuple[float, float]:
    """``(sin eta, cos eta)`` with round-off below 1e-15 snapped to zero, so
    ``eta = pi/2`` switches the Stokes field off exactly."""
    s, c = float(np.sin(eta)), float(np.cos(eta))
    return (0.0 if abs(s) < 1e-15 else s), (0.0 if abs(c) < 1e-15 else c)


def modified_rabi_tdd(eta, phi, omega_eta, omega_cd):
    """Pump and Stokes amplitudes with the counterdiabatic part folded in."""
    common = (np.asarray(omega_eta) - 1j * np.asarray(omega_cd)) * np.exp(-1j * np.asarray(phi))
    ws, wc = eta_weights(eta)
    p = common * ws
    s = common * wc
    if np.ndim(p) == 0:
        return complex(p), complex(s)
    return p, s


def effective_params(omega_p, omega_s, delta):
    """Effective detuning and Rabi frequency after eliminating ``|e>``."""
    d = np.asarray(delta, dtype=float)
    if np.any(d == 0.0):
        raise ZeroDivisionError("effective parameters need a non-zero detuning")
    p = np.asarray(omega_p)
    s = np.asarray(omega_s)
    d_eff = (p * p - s * s) / (4.0 * d)
    o_eff = p * s / (2.0 * d)
    if np.ndim(d_eff) == 0:
        return float(np.real(d_eff)), float(np.real(o_eff))
    return d_eff, o_eff


def _two_roots(delta_eff, coupling, delta):
    d = np.asarray(delta, dtype=float)
    if np.any(d <= 0.0):
        raise RegimeError("inverse engineering needs Delta > 0")
    de = np.asarray(delta_eff, dtype=float)
    c = np.asarray(coupling, dtype=float)
    r = np.hypot(de, c)
    # r -/+ de = c^2 / (r +/- de) avoids cancellation when one amplitude is tiny
    with np.errstate(divide="ignore", invalid="ignore"):
        big = r + np.abs(de)
        small = np.where(big > 0, c * c / np.where(big > 0, big, 1.0), 0.0)
    plus = 2.0 * d * np.where(de >= 0, big, small)
    minus = 2.0 * d * np.where(de >= 0, small, big)
    scale = 2.0 * d * np.maximum(r, 1e-300)
    for rad in (plus, minus):
        if np.any(rad < -1e-12 * scale):
            raise RegimeError("negative radicand in inverse Rabi formula")
    return np.sqrt(np.clip(plus, 0.0, None)), np.sqrt(np.clip(minus, 0.0, None))


def _check_roundtrip(p, s, delta, delta_eff, coupling, what: str) -> None:
    de2, c2 = effective_params(p, s, delta)
    err = max(np.max(np.abs(np.asarray(de2) - delta_eff)), np.max(np.abs(np.asarray(c2) - coupling)))
    if err > ROUNDTRIP_TOL:
        raise RegimeError(f"{what}: principal roots do not reproduce the effective controls (err {err:.2e})")


def inverse_rabi(delta_eff, omega_eff, delta):
    """Real, non-negative pump/Stokes amplitudes realising the given effective controls.

    The principal roots are substituted back; a mismatch above 1e-9 (which
    happens for negative ``omega_eff``) raises :class:`RegimeError`.
    """
    p, s = _two_roots(delta_eff, omega_eff, delta)
    _check_roundtrip(p, s, delta, np.asarray(delta_eff), np.asarray(omega_eff), "inverse_rabi")
    if np.ndim(p) == 0:
        return float(p), float(s)
    return p, s


class CdRabi(NamedTuple):
    omega_p: np.ndarray
    omega_s: np.ndarray
    r1: float  # max |Omega^cd_{p,s}| / Delta, must stay << 1
    r2: float  # mean |Omega_eff^cd| / max |Delta_eff|, must stay >> 1


def cd_rabi_large(delta_eff, omega_eff_cd, delta) -> CdRabi:
    """Counterdiabatic pump/Stokes magnitudes at large detuning.

    The magnitudes satisfy ``Omega_p Omega_s / 2 Delta = |omega_eff_cd|`` and
    ``(Omega_p^2 - Omega_s^2) / 4 Delta = delta_eff``; the sign of the
    counterdiabatic coupling has to be carried by the drive phase.
    """
    mag = np.abs(np.asarray(omega_eff_cd, dtype=float))
    p, s = _two_roots(delta_eff, mag, delta)
    _check_roundtrip(p, s, delta, np.asarray(delta_eff), mag, "cd_rabi_large")
    d = float(np.max(np.asarray(delta)))
    r1 = float(max(np.max(p), np.max(s)) / d)
    de_max = float(np.max(np.abs(delta_eff)))
    r2 = float(np.mean(mag) / de_max) if de_max > 0 else float("inf")
    if np.ndim(p) == 0:
        return CdRabi(float(p), float(s), r1, r2)
    return CdRabi(p, s, r1, r2)


# --------------------------------------------------------------------------
# schedules
# --------------------------------------------------------------------------


class EffectiveControls(NamedTuple):
    """Effective two-level controls on ``{|0>, |1>}``.

    ``omega_eff`` is complex and already carries ``exp(-i phi)``.
    """

    delta_eff: np.ndarray
    omega_eff: np.ndarray
    omega_eff_cd: np.ndarray
    phi: np.ndarray


FieldFn = Callable[[np.ndarray, int], tuple[np.ndarray, np.ndarray, np.ndarray]]
EffectiveFn = Callable[[np.ndarray, int], EffectiveControls]


@dataclass(frozen=True)
class PulseSchedule:
    """Time-dependent pump, Stokes and detuning on ``[0, t_total]``.

    ``fields(t, segment)`` evaluates one smooth piece on an array of times;
    segment ``k`` spans ``[edges[k], edges[k+1]]``.
    """

    t_total: float
    breakpoints: tuple[float, ...]
    fields: FieldFn = field(repr=False)
    regime: str = ""
    protocol: str = ""
    gate: str = ""
    t_f: float = 0.0
    eta: float | None = None
    delta_scale: float = 0.0
    effective: EffectiveFn | None = field(default=None, repr=False)

    @property
    def edges(self) -> np.ndarray:
        return np.array([0.0, *self.breakpoints, self.t_total])

    def segments(self) -> list[tuple[float, float]]:
        e = self.edges
        return [(float(e[k]), float(e[k + 1])) for k in range(len(e) - 1)]

    def segment_of(self, t) -> np.ndarray:
        idx = np.searchsorted(np.asarray(self.breakpoints), t, side="right")
        return np.minimum(idx, len(self.breakpoints))

    def _check_range(self, t: np.ndarray) -> None:
        if np.any(t < 0.0) or np.any(t > self.t_total * (1 + 1e-12)):
            raise ValueError(f"t outside [0, {self.t_total}]")

    def evaluate(self, t, segment: int | None = None):
        """``(Omega_p, Omega_s, Delta)`` at ``t`` (scalar or array)."""
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        self._check_range(ts)
        p = np.empty(ts.shape, dtype=complex)
        s = np.empty(ts.shape, dtype=complex)
        d = np.empty(ts.shape, dtype=float)
        segs = np.full(ts.shape, segment) if segment is not None else self.segment_of(ts)
        for k in np.unique(segs):
            m = segs == k
            pk, sk, dk = self.fields(ts[m], int(k))
            p[m], s[m], d[m] = pk, sk, dk
        if scalar:
            return complex(p[0]), complex(s[0]), float(d[0])
        return p, s, d

    def effective_controls(self, t, segment: int | None = None) -> EffectiveControls:
        if self.effective is None:
            raise ScheduleError(f"{self.regime} schedule has no effective two-level controls")
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        self._check_range(ts)
        segs = np.full(ts.shape, segment) if segment is not None else self.segment_of(ts)
        out = [np.empty(ts.shape), np.empty(ts.shape, dtype=complex), np.empty(ts.shape), np.empty(ts.shape)]
        for k in np.unique(segs):
            m = segs == k
            for arr, val in zip(out, self.effective(ts[m], int(k))):
                arr[m] = val
        return EffectiveControls(*out)

    def max_frequency(self) -> float:
        """Largest static frequency scale, used for the default step size."""
        return float(self.delta_scale)


def tdd_schedule(
    t_f: float,
    eta: float,
    protocol: str = "counterdiabatic",
    omega_theta: float = 1.0,
    phases: Sequence[float] = (0.0, 0.0),
    gate: str = "",
) -> PulseSchedule:
    """Time-dependent detuning: ``Omega_eta = Omega_theta sin(theta)``, ``Delta = Omega_theta cos(theta)``."""
    if protocol not in PROTOCOLS:
        raise ScheduleError(f"unknown protocol {protocol!r}")
    theta = MixingAngleSchedule("cubic-tdd", t_f)
    ot = float(omega_theta)
    phi1, phi2 = (float(x) for x in phases)
    cd = protocol == "counterdiabatic"

    def fields(t, seg):
        th, dth = eval_mixing_angle(theta, t, half=seg)
        om_eta = ot * np.sin(th)
        delta = ot * np.cos(th)
        if cd:
            ocd = cd_amplitude(om_eta, ot * np.cos(th) * dth, delta, -ot * np.sin(th) * dth, ot)
        else:
            ocd = np.zeros_like(th)
        p, s = modified_rabi_tdd(eta, phi1 if seg == 0 else phi2, om_eta, ocd)
        return np.asarray(p), np.asarray(s), delta

    return PulseSchedule(
        t_total=2.0 * t_f,
        breakpoints=(float(t_f),),
        fields=fields,
        regime="tdd",
        protocol=protocol,
        gate=gate,
        t_f=float(t_f),
        eta=float(eta),
        delta_scale=abs(ot),
    )


def resonance_schedule(
    t_f: float,
    eta: float,
    omega_theta: float = 1.0,
    phases: Sequence[float] = (0.0, 0.0),
    gate: str = "",
) -> PulseSchedule:
    """One-photon resonance: only the counterdiabatic drive, ``Delta = 0``."""
    theta = MixingAngleSchedule("cubic-tdd", t_f)
    ot = float(omega_theta)
    phi1, phi2 = (float(x) for x in phases)

    def fields(t, seg):
        th, dth = eval_mixing_angle(theta, t, half=seg)
        ocd = cd_amplitude(ot * np.sin(th), ot * np.cos(th) * dth, ot * np.cos(th), -ot * np.sin(th) * dth, ot)
        ph = np.exp(-1j * (phi1 if seg == 0 else phi2))
        ws, wc = eta_weights(eta)
        return ocd * ws * ph, ocd * wc * ph, np.zeros_like(th)

    return PulseSchedule(
        t_total=2.0 * t_f,
        breakpoints=(float(t_f),),
        fields=fields,
        regime="one-photon-resonance",
        protocol="counterdiabatic",
        gate=gate,
        t_f=float(t_f),
        eta=float(eta),
        delta_scale=abs(ot),
    )


def _large_x_quarter(theta: MixingAngleSchedule, omega_big: float, t, q: int):
    """Effective detuning, coupling and effective-angle rate in quarter ``q``."""
    th, dth = eval_mixing_angle(theta, t, half=q // 2)
    if q % 2 == 0:
        de = omega_big * np.cos(PI + th)
        oe = omega_big * np.sin(th)
    else:
        de = omega_big * np.cos(th)
        oe = omega_big * np.sin(-th)
    # both patterns trace an effective angle whose rate is -dtheta
    return de, oe, -dth


def large_detuning_schedule(
    t_f: float,
    gate: str,
    protocol: str = "counterdiabatic",
    omega_big: float = 0.01,
    delta: float = 50.0,
    literal_cd_phase: bool = False,
) -> PulseSchedule:
    """Large detuning: effective controls first, pump/Stokes by inversion.

    With ``protocol="counterdiabatic"`` the effective coupling is replaced by
    the transitionless term ``-i dTheta/dt exp(-i phi)``. Its magnitude fixes
    the pump/Stokes amplitudes and the ``-i`` becomes an extra ``pi/2`` on the
    Stokes phase. ``literal_cd_phase=True`` drops that factor and uses the
    tabulated phase unchanged (kept for comparison; for sigma-x it realises a
    sigma-y rotation instead).
    """
    if protocol not in PROTOCOLS:
        raise ScheduleError(f"unknown protocol {protocol!r}")
    if gate == "sigma-x":
        theta = MixingAngleSchedule("quintic-large-x", t_f)
        breaks = (0.5 * t_f, float(t_f), 1.5 * t_f)
        phase = PhaseSchedule((0.0, PI / 2, PI / 2, 0.0), breaks)

        def eff(t, seg):
            return _large_x_quarter(theta, omega_big, t, seg)

    elif gate == "sigma-z":
        theta = MixingAngleSchedule("cubic-large-z", t_f)
        breaks = (float(t_f),)
        phase = PhaseSchedule((0.0, PI / 2), breaks)

        def eff(t, seg):
            th, dth = eval_mixing_angle(theta, t, half=seg)
            return omega_big * np.cos(th), omega_big * np.sin(th), dth

    else:
        raise ScheduleError(f"large-detuning schedule for gate {gate!r} is not defined")

    cd = protocol == "counterdiabatic"

    def fields(t, seg):
        de, oe, rate = eff(t, seg)
        phi = phase.values[seg]
        if cd:
            p, s = cd_rabi_large(de, rate, delta)[:2]
            offset = 0.0 if literal_cd_phase else np.where(rate < 0.0, -PI / 2, PI / 2)
            s = s * np.exp(1j * (phi + offset))
        else:
            p, s = inverse_rabi(de, oe, delta)
            s = s * np.exp(1j * phi)
        return np.asarray(p, dtype=complex), np.asarray(s, dtype=complex), np.full(np.shape(t), float(delta))

    def effective(t, seg):
        de, oe, rate = eff(t, seg)
        phi = np.full(np.shape(t), phase.values[seg])
        return EffectiveControls(de, oe * np.exp(-1j * phi), rate, phi)

    return PulseSchedule(
        t_total=2.0 * t_f,
        breakpoints=breaks,
        fields=fields,
        regime="large-detuning",
        protocol=protocol,
        gate=gate,
        t_f=float(t_f),
        delta_scale=abs(float(delta)),
        effective=effective,
    )


def build_schedule(scenario) -> PulseSchedule:
    """Schedule for a scenario (anything with regime/protocol/gate/t_f attributes).

    For ``gate="two-qubit"`` this is the *effective* three-level schedule;
    the qubit-resonator model maps it onto the two classical fields.
    """
    regime, protocol, gate = scenario.regime, scenario.protocol, scenario.gate
    if regime not in REGIMES:
        raise ScheduleError(f"unknown regime {regime!r}")
    if protocol not in PROTOCOLS:
        raise ScheduleError(f"unknown protocol {protocol!r}")
    if gate not in GATES:
        raise ScheduleError(f"unknown gate {gate!r}")
    t_f = float(scenario.t_f)
    omega_theta = float(getattr(scenario, "omega_theta", 1.0))
    if regime == "tdd":
        eta = ETA["sigma-z" if gate == "two-qubit" else gate]
        return tdd_schedule(t_f, eta, protocol, omega_theta, gate=gate)
    if regime == "one-photon-resonance":
        if protocol != "counterdiabatic":
            raise ScheduleError("one-photon resonance has no separate adiabatic protocol")
        eta = ETA["sigma-z" if gate == "two-qubit" else gate]
        return resonance_schedule(t_f, eta, omega_theta, gate=gate)
    base = "sigma-x" if gate == "two-qubit" else gate
    sched = large_detuning_schedule(
        t_f,
        base,
        protocol,
        omega_big=float(getattr(scenario, "omega_big", 0.01)),
        delta=float(getattr(scenario, "delta", 50.0)),
    )
    if gate == "two-qubit":
        sched = replace(sched, gate=gate)
    return sched


def export_waveform_csv(schedule: PulseSchedule, times, path) -> Path:
    """Write sampled controls; columns ``t, Re/Im Omega_p, Re/Im Omega_s, Delta``."""
    times = np.asarray(times, dtype=float)
    p, s, d = schedule.evaluate(times)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re_omega_p", "im_omega_p", "re_omega_s", "im_omega_s", "delta"])
        for row in zip(times, p.real, p.imag, s.real, s.imag, d):
            w.writerow([repr(float(x)) for x in row])
    return path
