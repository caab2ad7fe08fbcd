"""Hamiltonians of the single-qubit and qubit-resonator models.

A :class:`HamiltonianModel` is a sum ``H(t) = sum_k c_k(t) B_k`` of fixed
Hermitian operators ``B_k`` with real coefficients. The coefficients of one
smooth segment are evaluated on a whole time array at once, which is what the
propagators consume.

Qubit-resonator composite ordering: qubit 1 (x) qubit 2 (x) Fock, each qubit in
``(0, e, 1)`` order. The coupling is the Jaynes-Cummings form
``g1 (|e><0|_1 a + h.c.) + g2 (|e><1|_2 a + h.c.)``; it is the only ordering
that keeps the ``phi_2 .. phi_6`` and ``phi_7 .. phi_15`` manifolds closed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    THREE_LEVEL_LABELS,
    DimensionError,
    Operator,
    StateVector,
    annihilation,
    as_vector,
    outer,
)
from .pulses import (
    MixingAngleSchedule,
    PulseSchedule,
    cd_amplitude,
    eval_mixing_angle,
)

KINDS = {
    "three-level-full": 3,
    "two-level-phi-e": 2,
    "two-level-eff": 2,
    "two-level-eff-mod": 2,
    "three-level-resonant-cd": 3,
    "qubit-resonator-full": None,
    "qubit-resonator-eff": 3,
}

LEVEL_INDEX = {"0": 0, "e": 1, "1": 2}

CoeffFn = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class HamiltonianModel:
    """Time-evaluable Hamiltonian ``sum_k coeffs(t)[k] * operators[k]``."""

    kind: str
    labels: tuple[str, ...]
    operators: tuple[np.ndarray, ...] = field(repr=False)
    coeffs: CoeffFn = field(repr=False)
    t_total: float
    breakpoints: tuple[float, ...] = ()
    max_frequency: float = 1.0
    schedule: PulseSchedule | None = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        d = len(self.labels)
        expected = KINDS[self.kind]
        if expected is not None and d != expected:
            raise DimensionError(f"{self.kind} must be {expected}-dimensional, got {d}")
        for b in self.operators:
            if b.shape != (d, d) or not np.allclose(b, b.conj().T, atol=1e-14):
                raise ValueError("model operators must be Hermitian and match the basis")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def segments(self) -> list[tuple[float, float]]:
        e = [0.0, *self.breakpoints, self.t_total]
        return [(e[k], e[k + 1]) for k in range(len(e) - 1)]

    def segment_of(self, t: float) -> int:
        return int(min(np.searchsorted(self.breakpoints, t, side="right"), len(self.breakpoints)))

    def stacked(self) -> np.ndarray:
        return np.array(self.operators)

    def matrices(self, t: np.ndarray, segment: int) -> np.ndarray:
        """Dense ``H(t)`` for an array of times inside one segment, shape ``(n, d, d)``."""
        c = np.asarray(self.coeffs(np.asarray(t, dtype=float), segment), dtype=float)
        return np.einsum("kn,kij->nij", c, self.stacked())

    def __call__(self, t: float, segment: int | None = None) -> Operator:
        if not (0.0 <= t <= self.t_total * (1 + 1e-12)):
            raise ValueError(f"t = {t} outside [0, {self.t_total}]")
        seg = self.segment_of(t) if segment is None else segment
        m = self.matrices(np.array([t]), seg)[0]
        return Operator(0.5 * (m + m.conj().T), self.labels, hermitian=True)


# --------------------------------------------------------------------------
# three-level system
# --------------------------------------------------------------------------


def _three_level_ops() -> tuple[np.ndarray, ...]:
    x0 = outer(0, 1, 3)
    x1 = outer(2, 1, 3)
    return (
        0.5 * (x0 + x0.conj().T),
        0.5 * (1j * x0 - 1j * x0.conj().T),
        0.5 * (x1 + x1.conj().T),
        0.5 * (1j * x1 - 1j * x1.conj().T),
        -outer(1, 1, 3),
    )


def three_level_matrix(omega_p: complex, omega_s: complex, delta: float) -> np.ndarray:
    return 0.5 * np.array(
        [
            [0.0, omega_p, 0.0],
            [np.conj(omega_p), -2.0 * delta, np.conj(omega_s)],
            [0.0, omega_s, 0.0],
        ],
        dtype=complex,
    )


def h_three_level(p: PulseSchedule, t: float, segment: int | None = None) -> Operator:
    """Lambda-system Hamiltonian in the basis ``(0, e, 1)``."""
    op, os_, d = p.evaluate(t, segment)
    return Operator(three_level_matrix(op, os_, d), THREE_LEVEL_LABELS, hermitian=True)


def three_level_model(p: PulseSchedule) -> HamiltonianModel:
    def coeffs(t, seg):
        op, os_, d = p.evaluate(t, seg)
        return np.array([op.real, op.imag, os_.real, os_.imag, d])

    kind = "three-level-resonant-cd" if p.regime == "one-photon-resonance" else "three-level-full"
    return HamiltonianModel(
        kind=kind,
        labels=THREE_LEVEL_LABELS,
        operators=_three_level_ops(),
        coeffs=coeffs,
        t_total=p.t_total,
        breakpoints=p.breakpoints,
        max_frequency=p.max_frequency(),
        schedule=p,
        params={"regime": p.regime, "protocol": p.protocol, "gate": p.gate},
    )


def bright_dark_basis(eta: float) -> np.ndarray:
    """Columns ``|Phi>, |e>, |d>`` expressed in ``(0, e, 1)``."""
    s, c = np.sin(eta), np.cos(eta)
    return np.array([[s, 0.0, c], [0.0, 1.0, 0.0], [c, 0.0, -s]], dtype=complex)


# --------------------------------------------------------------------------
# two-level forms
# --------------------------------------------------------------------------


def h_phi_e(omega_eta: float, delta: float, phi: float) -> Operator:
    """Bright-state/excited-state two-level Hamiltonian, basis ``(Phi, e)``."""
    m = 0.5 * np.array(
        [[delta, omega_eta * np.exp(-1j * phi)], [omega_eta * np.exp(1j * phi), -delta]],
        dtype=complex,
    )
    return Operator(m, ("Phi", "e"), hermitian=True)


def h_counterdiabatic_2lv(omega_cd: float, phi: float) -> Operator:
    m = 0.5 * np.array(
        [[0.0, -1j * omega_cd * np.exp(-1j * phi)], [1j * omega_cd * np.exp(1j * phi), 0.0]],
        dtype=complex,
    )
    return Operator(m, ("Phi", "e"), hermitian=True)


def phi_e_eigenstates(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous eigenvectors ``|lambda_+>, |lambda_->`` in the ``(Phi, e)`` basis."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    plus = np.array([c * np.exp(-1j * phi), s], dtype=complex)
    minus = np.array([-s, c * np.exp(1j * phi)], dtype=complex)
    return plus, minus


def transitionless_hamiltonian(
    eigenstates: Callable[[float], Sequence[np.ndarray]], t: float, h: float = 1e-5
) -> np.ndarray:
    """``i sum_n |d_t n><n|`` built from a family of eigenvectors by central differences."""
    vs = eigenstates(t)
    fwd = eigenstates(t + h)
    bwd = eigenstates(t - h)
    out = np.zeros((len(vs[0]), len(vs[0])), dtype=complex)
    for v, vf, vb in zip(vs, fwd, bwd):
        out += 1j * np.outer((vf - vb) / (2 * h), v.conj())
    return out


def phi_e_model(
    t_f: float,
    omega_theta: float = 1.0,
    phases: Sequence[float] = (0.0, 0.0),
    counterdiabatic: bool = True,
) -> HamiltonianModel:
    """Two-level ``(Phi, e)`` model for the time-dependent-detuning parameterization."""
    theta = MixingAngleSchedule("cubic-tdd", t_f)
    ot = float(omega_theta)
    sz = np.array([[0.5, 0], [0, -0.5]], dtype=complex)
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    sy = np.array([[0, -0.5j], [0.5j, 0]], dtype=complex)

    def coeffs(t, seg):
        th, dth = eval_mixing_angle(theta, t, half=seg)
        phi = phases[seg]
        om_eta, delta = ot * np.sin(th), ot * np.cos(th)
        ocd = (
            cd_amplitude(om_eta, ot * np.cos(th) * dth, delta, -ot * np.sin(th) * dth, ot)
            if counterdiabatic
            else np.zeros_like(th)
        )
        # Omega_eta e^{-i phi} - i Omega_cd e^{-i phi} as an (x, y) pair
        x = om_eta * np.cos(phi) - ocd * np.sin(phi)
        y = om_eta * np.sin(phi) + ocd * np.cos(phi)
        return np.array([delta, x, y])

    return HamiltonianModel(
        kind="two-level-phi-e",
        labels=("Phi", "e"),
        operators=(2 * sz, 2 * sx, 2 * sy),
        coeffs=lambda t, seg: 0.5 * coeffs(t, seg),
        t_total=2.0 * t_f,
        breakpoints=(float(t_f),),
        max_frequency=abs(ot),
        params={"phases": tuple(phases), "counterdiabatic": counterdiabatic},
    )


def effective_two_level_model(p: PulseSchedule, include_detuning: bool = True) -> HamiltonianModel:
    """Adiabatic-elimination Hamiltonian on ``(0, 1)`` of the *realised* drive.

    ``H = 1/2 [[D, X], [X*, -D]]`` with ``D = (|Op|^2 - |Os|^2) / 4 Delta`` and
    ``X = Op Os* / 2 Delta``. With ``include_detuning=False`` the diagonal is
    dropped, which is the modified (counterdiabatic-only) form.
    """
    if p.regime != "large-detuning":
        raise ValueError("effective two-level model needs a large-detuning schedule")

    def coeffs(t, seg):
        op, os_, d = p.evaluate(t, seg)
        x = op * np.conj(os_) / (2.0 * d)
        de = (np.abs(op) ** 2 - np.abs(os_) ** 2) / (4.0 * d)
        if not include_detuning:
            de = np.zeros_like(de)
        return np.array([de, x.real, -x.imag])

    sz = np.diag([1.0, -1.0]).astype(complex) / 2
    sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
    return HamiltonianModel(
        kind="two-level-eff" if include_detuning else "two-level-eff-mod",
        labels=("0", "1"),
        operators=(sz, sx, sy),
        coeffs=coeffs,
        t_total=p.t_total,
        breakpoints=p.breakpoints,
        max_frequency=1.0 / max(p.t_f, 1e-12),
        schedule=p,
    )


# --------------------------------------------------------------------------
# qubit-resonator system
# --------------------------------------------------------------------------


def qr_labels(n_max: int) -> tuple[str, ...]:
    return tuple(f"{a},{b},{n}" for a in THREE_LEVEL_LABELS for b in THREE_LEVEL_LABELS for n in range(n_max + 1))


def qr_index(q1: str, q2: str, n: int, n_max: int) -> int:
    if not 0 <= n <= n_max:
        raise IndexError(f"photon number {n} outside 0..{n_max}")
    return (LEVEL_INDEX[q1] * 3 + LEVEL_INDEX[q2]) * (n_max + 1) + n


# kets of the computational and auxiliary manifolds, (qubit1, qubit2, photons)
PHI_KETS = {
    1: ("0", "1", 0),
    2: ("0", "0", 0),
    3: ("0", "e", 0),
    4: ("0", "1", 1),
    5: ("e", "1", 0),
    6: ("1", "1", 0),
    7: ("1", "0", 0),
    8: ("e", "0", 0),
    9: ("1", "e", 0),
    10: ("0", "0", 1),
    11: ("e", "e", 0),
    12: ("1", "1", 1),
    13: ("0", "e", 1),
    14: ("e", "1", 1),
    15: ("0", "1", 2),
}

COMPUTATIONAL_PHI = (1, 2, 6, 7)  # ordering 01, 00, 11, 10


@dataclass(frozen=True)
class QRSubspace:
    """Index maps of the two invariant manifolds into the composite space."""

    n_max: int
    a1: tuple[int, ...] = field(init=False)
    a4: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        if self.n_max < 2:
            raise ValueError("the phi_7 manifold reaches |2>_r; need n_max >= 2")
        object.__setattr__(self, "a1", tuple(phi_index(k, self.n_max) for k in range(2, 7)))
        object.__setattr__(self, "a4", tuple(phi_index(k, self.n_max) for k in range(7, 16)))
        every = self.a1 + self.a4
        if len(set(every)) != len(every):
            raise AssertionError("subspace indices collide")

    @property
    def computational(self) -> tuple[int, ...]:
        return tuple(phi_index(k, self.n_max) for k in COMPUTATIONAL_PHI)


def phi_index(k: int, n_max: int) -> int:
    return qr_index(*PHI_KETS[k], n_max)


def _qr_static_ops(n_max: int):
    i3 = np.eye(3)
    ir = np.eye(n_max + 1)
    a = annihilation(n_max)

    def q1(op):
        return np.kron(np.kron(op, i3), ir)

    def q2(op):
        return np.kron(np.kron(i3, op), ir)

    a_full = np.kron(np.kron(i3, i3), a)
    s1 = q1(outer(1, 0, 3))  # |e><0| on qubit 1
    s2 = q2(outer(1, 2, 3))  # |e><1| on qubit 2
    drive1 = q1(outer(2, 1, 3))  # |1><e| on qubit 1
    drive2 = q2(outer(0, 1, 3))  # |0><e| on qubit 2
    ee = q1(outer(1, 1, 3)) + q2(outer(1, 1, 3))
    return s1 @ a_full, s2 @ a_full, drive1, drive2, ee, a_full


def _herm(x):
    return x + x.conj().T


def h_qr_coupling(g1: float, g2: float, n_max: int = 2) -> np.ndarray:
    c1, c2, *_ = _qr_static_ops(n_max)
    return g1 * _herm(c1) + g2 * _herm(c2)


def h_qubit_resonator(g1, g2, omega_1, omega_2, delta, n_max: int = 2) -> Operator:
    """Full interaction Hamiltonian at one instant; ``omega_1``/``omega_2`` may be complex."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    c1, c2, d1, d2, ee, _ = _qr_static_ops(n_max)
    m = g1 * _herm(c1) + g2 * _herm(c2)
    m = m + 0.5 * (omega_1 * d1 + np.conj(omega_1) * d1.conj().T)
    m = m + 0.5 * (omega_2 * d2 + np.conj(omega_2) * d2.conj().T)
    m = m - delta * ee
    return Operator(m, qr_labels(n_max), hermitian=True)


def effective_to_classical(omega_p, omega_s, g1: float, g2: float):
    """Classical fields ``(Omega_1, Omega_2)`` that realise effective pump/Stokes.

    Inverse of ``Omega_p = g1 Omega_2 / G``, ``Omega_s = -g2 Omega_1 / G``.
    """
    G = np.hypot(g1, g2)
    return -G * np.asarray(omega_s) / g2, G * np.asarray(omega_p) / g1


def classical_to_effective(omega_1, omega_2, g1: float, g2: float):
    G = np.hypot(g1, g2)
    return g1 * np.asarray(omega_2) / G, -g2 * np.asarray(omega_1) / G


def h_qr_effective(g1, g2, omega_1, omega_2, delta) -> Operator:
    """Effective three-level Hamiltonian on ``(phi_2, Psi_0, phi_6)``."""
    op, os_ = classical_to_effective(omega_1, omega_2, g1, g2)
    return Operator(three_level_matrix(complex(op), complex(os_), float(delta)), ("phi2", "Psi0", "phi6"), hermitian=True)


def qr_static_radius(g1: float, g2: float, delta: float) -> float:
    """Largest eigenfrequency of the coupling plus a static detuning on ``phi_2 .. phi_6``.

    ``phi_3`` and ``phi_5`` sit at ``-delta`` and mix with the photon state at
    rate ``G``, so the extreme level is ``delta/2 + sqrt(delta^2/4 + G^2)``.
    """
    G = float(np.hypot(g1, g2))
    d = abs(float(delta))
    return 0.5 * d + float(np.sqrt(0.25 * d * d + G * G))


def qubit_resonator_model(effective: PulseSchedule, g1: float, g2: float, n_max: int = 2) -> HamiltonianModel:
    """Full two-qubit model driven so that its effective three-level form follows ``effective``."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    c1, c2, d1, d2, ee, _ = _qr_static_ops(n_max)
    ops = (
        g1 * _herm(c1) + g2 * _herm(c2),
        0.5 * _herm(d1),
        0.5 * (1j * d1 - 1j * d1.conj().T),
        0.5 * _herm(d2),
        0.5 * (1j * d2 - 1j * d2.conj().T),
        -ee,
    )

    def coeffs(t, seg):
        op, os_, d = effective.evaluate(t, seg)
        w1, w2 = effective_to_classical(op, os_, g1, g2)
        return np.array([np.ones_like(d), w1.real, w1.imag, w2.real, w2.imag, d])

    return HamiltonianModel(
        kind="qubit-resonator-full",
        labels=qr_labels(n_max),
        operators=ops,
        coeffs=coeffs,
        t_total=effective.t_total,
        breakpoints=effective.breakpoints,
        max_frequency=qr_static_radius(g1, g2, effective.max_frequency()),
        schedule=effective,
        params={"g1": g1, "g2": g2, "n_max": n_max},
    )


def qr_effective_model(effective: PulseSchedule, g1: float, g2: float) -> HamiltonianModel:
    base = three_level_model(effective)
    return HamiltonianModel(
        kind="qubit-resonator-eff",
        labels=("phi2", "Psi0", "phi6"),
        operators=base.operators,
        coeffs=base.coeffs,
        t_total=base.t_total,
        breakpoints=base.breakpoints,
        max_frequency=base.max_frequency,
        schedule=effective,
        params={"g1": g1, "g2": g2},
    )


def psi0_vector(g1: float, g2: float, n_max: int = 2) -> np.ndarray:
    G = np.hypot(g1, g2)
    v = np.zeros(9 * (n_max + 1), dtype=complex)
    v[phi_index(3, n_max)] = g1 / G
    v[phi_index(5, n_max)] = -g2 / G
    return v


def embed_effective_state(v, g1: float, g2: float, n_max: int = 2) -> StateVector:
    """Map amplitudes on ``(phi_2, Psi_0, phi_6)`` into the composite space."""
    a = as_vector(v)
    if a.size != 3:
        raise DimensionError(f"effective state must be 3-dimensional, got {a.size}")
    out = a[1] * psi0_vector(g1, g2, n_max)
    out[phi_index(2, n_max)] += a[0]
    out[phi_index(6, n_max)] += a[2]
    return StateVector(out, qr_labels(n_max))


def embed_effective_matrix(v: np.ndarray, g1: float, g2: float, n_max: int = 2) -> np.ndarray:
    """Vectorised embedding for arrays shaped ``(..., 3)``."""
    v = np.asarray(v, dtype=complex)
    psi0 = psi0_vector(g1, g2, n_max)
    out = v[..., 1, None] * psi0
    out[..., phi_index(2, n_max)] += v[..., 0]
    out[..., phi_index(6, n_max)] += v[..., 2]
    return out


def table4_eigensystem(g1: float, g2: float) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenvalues and eigenvectors of the coupling on ``phi_2 .. phi_6``.

    Columns ordered ``phi_2, phi_6, Psi_0, Psi_+, Psi_-``.
    """
    G = np.hypot(g1, g2)
    vecs = np.zeros((5, 5), dtype=complex)
    vecs[0, 0] = 1.0
    vecs[4, 1] = 1.0
    vecs[[1, 3], 2] = g1 / G, -g2 / G
    for col, sgn in ((3, 1.0), (4, -1.0)):
        vecs[:, col] = np.array([0.0, g2, sgn * G, g1, 0.0]) / (np.sqrt(2) * G)
    return np.array([0.0, 0.0, 0.0, G, -G]), vecs
