"""Time propagation: Schrodinger, propagator columns and Lindblad.

All integrators are classical fixed-step RK4 applied segment by segment, so
every schedule breakpoint is a grid node and a phase jump is never stepped
across. Near each segment end the step is graded geometrically down from
``dt``: pulses obtained by inverting vanishing effective controls start like
``sqrt(t)``, and uniform RK4 converges only as ``dt**1.5`` there. Norm (or trace) is never renormalized; its drift is measured and a run
whose drift exceeds the tolerance raises :class:`AccuracyError`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .core import DensityMatrix, StateVector, as_matrix, as_vector, outer
from .hamiltonians import HamiltonianModel, qr_index

NORM_TOL = 1e-8
TRACE_TOL = 1e-7
HERM_TOL = 1e-10
NEG_TOL = 1e-6
DEFAULT_SAMPLES = 1000
CHUNK = 4096  # max steps per kernel call; bounds coefficient memory
GRADE_LEVELS = 8  # halvings of dt towards each segment end
GRADE_STEPS = 4  # steps per graded layer


class AccuracyError(RuntimeError):
    """Norm/trace drift or positivity beyond tolerance."""

    def __init__(self, message: str, suggested_dt: float | None = None, trajectory=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt
        self.trajectory = trajectory


class PhaseDecompositionError(ValueError):
    """The trajectory leaves the eigenpath, so the phase split is meaningless."""


LONG_RUN_PHASE = 2.5e4


def default_dt(t_f: float, omega_max: float) -> float:
    """``min(t_f / 4000, 0.02 / omega_max)``, shrunk for very long runs.

    RK4 norm loss accumulates like ``omega T (omega dt)^5``, so once the total
    phase ``omega T`` (with ``T = 2 t_f``) passes ``LONG_RUN_PHASE`` the step is
    scaled by ``(LONG_RUN_PHASE / omega T)^(1/5)`` to keep the final drift flat.
    """
    dt = t_f / 4000.0
    if omega_max > 0:
        dt = min(dt, 0.02 / omega_max)
        phase = 2.0 * t_f * omega_max
        if phase > LONG_RUN_PHASE:
            dt *= (LONG_RUN_PHASE / phase) ** 0.2
    return dt


@dataclass(frozen=True)
class TimeGrid:
    """RK4 steps per segment; every breakpoint is a node.

    Inside a segment the step is ``dt`` except for ``grade`` layers at each end
    whose steps halve towards the end (``GRADE_STEPS`` steps per layer).
    ``grade=0`` gives a uniform grid.
    """

    t_start: float
    t_end: float
    dt: float
    breakpoints: tuple[float, ...] = ()
    n_samples: int = DEFAULT_SAMPLES
    grade: int = GRADE_LEVELS

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > self.t_start:
            raise ValueError("empty time interval")
        if self.grade < 0:
            raise ValueError("grade must be >= 0")
        bps = tuple(sorted(float(b) for b in self.breakpoints if self.t_start < b < self.t_end))
        object.__setattr__(self, "breakpoints", bps)

    @classmethod
    def for_model(cls, model: HamiltonianModel, dt: float | None = None, n_samples: int = DEFAULT_SAMPLES):
        if dt is None:
            t_f = model.schedule.t_f if model.schedule is not None else model.t_total / 2
            dt = default_dt(t_f, model.max_frequency)
        return cls(0.0, model.t_total, dt, model.breakpoints, n_samples)

    @property
    def edges(self) -> list[float]:
        return [self.t_start, *self.breakpoints, self.t_end]

    def pieces(self) -> list[tuple[int, float, float, int, float]]:
        """Uniform runs ``(segment, start, end, n_steps, h)`` in time order."""
        e = self.edges
        layers = [self.dt * 2.0 ** -(self.grade - j) for j in range(self.grade)]
        width = GRADE_STEPS * sum(layers)
        out = []
        for seg, (a, b) in enumerate(zip(e[:-1], e[1:])):
            if self.grade and b - a >= 2 * width + self.dt:
                lo, hi = a + width, b - width
                t = a
                for h in layers:
                    out.append((seg, t, t + GRADE_STEPS * h, GRADE_STEPS, h))
                    t += GRADE_STEPS * h
                n = max(1, math.ceil((hi - lo) / self.dt - 1e-9))
                out.append((seg, lo, hi, n, (hi - lo) / n))
                t = hi
                for h in reversed(layers):
                    end = b if h == layers[0] else t + GRADE_STEPS * h
                    out.append((seg, t, end, GRADE_STEPS, (end - t) / GRADE_STEPS))
                    t = end
            else:
                n = max(1, math.ceil((b - a) / self.dt - 1e-9))
                out.append((seg, a, b, n, (b - a) / n))
        return out

    def steps(self) -> list[tuple[float, float, int, float]]:
        """``(start, end, n_steps, h)`` for every uniform run."""
        return [p[1:] for p in self.pieces()]

    @property
    def n_steps(self) -> int:
        return sum(p[3] for p in self.pieces())

    def stride(self) -> int:
        return max(1, round(self.n_steps / max(self.n_samples, 1)))

    def nodes(self) -> np.ndarray:
        parts = [a + h * np.arange(n) for _, a, _, n, h in self.pieces()]
        return np.concatenate([*parts, [self.t_end]])


@dataclass(frozen=True)
class LindbladSet:
    """Jump operators ``L_l = sqrt(rate_l) * op_l``."""

    operators: tuple[np.ndarray, ...]
    rates: tuple[float, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.operators) != len(self.rates):
            raise ValueError("one rate per jump operator")
        if any(r < 0 for r in self.rates):
            raise ValueError("decay rates must be non-negative")
        dims = {np.shape(o) for o in self.operators}
        if len(dims) > 1:
            raise ValueError("jump operators have mixed dimensions")
        ops = tuple(np.asarray(as_matrix(o), dtype=complex) for o in self.operators)
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))

    @property
    def dim(self) -> int | None:
        return self.operators[0].shape[0] if self.operators else None

    def jumps(self) -> list[np.ndarray]:
        return [math.sqrt(r) * o for o, r in zip(self.operators, self.rates) if r > 0]

    @classmethod
    def empty(cls) -> "LindbladSet":
        return cls((), ())

    @classmethod
    def three_level(cls, gamma: float, gamma_0: float | None = None, gamma_1: float | None = None):
        """Decay of ``|e>`` to ``|0>`` and ``|1>``; each branch gets ``gamma / 2`` by default."""
        g0 = gamma / 2 if gamma_0 is None else gamma_0
        g1 = gamma / 2 if gamma_1 is None else gamma_1
        return cls((outer(0, 1, 3), outer(2, 1, 3)), (g0, g1), ("e->0", "e->1"))

    @classmethod
    def qubit_resonator(cls, gamma: float, kappa: float, n_max: int = 2):
        """Four qubit branches at ``gamma / 2`` each plus resonator loss ``sqrt(kappa) a``."""
        d = 9 * (n_max + 1)
        ops, names = [], []
        for qubit in (1, 2):
            for target in ("0", "1"):
                m = np.zeros((d, d), dtype=complex)
                for other in ("0", "e", "1"):
                    for n in range(n_max + 1):
                        if qubit == 1:
                            m[qr_index(target, other, n, n_max), qr_index("e", other, n, n_max)] = 1.0
                        else:
                            m[qr_index(other, target, n, n_max), qr_index(other, "e", n, n_max)] = 1.0
                ops.append(m)
                names.append(f"q{qubit}:e->{target}")
        a = np.kron(np.eye(9), np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1))
        ops.append(a.astype(complex))
        names.append("resonator")
        return cls(tuple(ops), (gamma / 2,) * 4 + (kappa,), tuple(names))


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution.

    ``states`` is ``(n, d)`` for a single pure state, ``(n, d, m)`` for a batch
    of columns (propagator runs) and ``(n, d, d)`` for density matrices. A
    sample is stored on both sides of each breakpoint; ``segments`` tells which.
    """

    times: np.ndarray
    segments: np.ndarray
    states: np.ndarray = field(repr=False)
    kind: str
    labels: tuple[str, ...]
    drift: np.ndarray = field(repr=False)
    max_step_drift: float
    dt: float
    model: HamiltonianModel | None = field(default=None, repr=False, compare=False)
    min_eigenvalue: float | None = None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def populations(self) -> np.ndarray:
        if self.kind == "density":
            return np.real(np.diagonal(self.states, axis1=1, axis2=2))
        if self.kind == "pure":
            return np.abs(self.states) ** 2
        raise ValueError("populations are defined for pure or density trajectories")

    def state_at(self, k: int):
        if self.kind == "pure":
            return StateVector(self.states[k], self.labels, normalize=True)
        if self.kind == "density":
            return DensityMatrix(self.states[k], self.labels)
        return self.states[k]


def _pattern(model: HamiltonianModel, extra: Sequence[np.ndarray] = ()):
    ops = [np.asarray(b, dtype=complex) for b in model.operators] + [np.asarray(x, dtype=complex) for x in extra]
    mask = np.zeros((model.dim, model.dim), dtype=bool)
    for b in ops:
        mask |= np.abs(b) > 0
    rows, cols = np.nonzero(mask)
    vals = np.array([b[rows, cols] for b in ops], dtype=complex)
    return rows.astype(np.int64), cols.astype(np.int64), vals


def _walk(model: HamiltonianModel, grid: TimeGrid, n_extra: int, advance, snapshot):
    """Drive ``advance(coef, h, nsteps)`` over the grid, sampling with ``snapshot``.

    A sample is taken every ``stride`` steps and on both sides of every
    segment boundary.
    """
    times, segs, samples = [], [], []
    worst = 0.0
    stride = grid.stride()
    pieces = grid.pieces()
    count = 0
    for k, (seg, a, b, n, h) in enumerate(pieces):
        seg_end = k + 1 == len(pieces) or pieces[k + 1][0] != seg
        if k == 0 or pieces[k - 1][0] != seg:
            times.append(a)
            segs.append(seg)
            samples.append(snapshot())
            count = 0
        done = 0
        while done < n:
            ns = min(stride - count % stride, n - done, CHUNK)
            ts = a + 0.5 * h * (2 * done + np.arange(2 * ns + 1))
            if done + ns == n:
                ts[-1] = b
            coef = np.asarray(model.coeffs(np.minimum(ts, b), seg), dtype=float)
            if n_extra:
                coef = np.vstack([coef, np.ones((n_extra, ts.size))])
            worst = max(worst, advance(np.ascontiguousarray(coef), h, ns))
            done += ns
            count += ns
            if count % stride == 0 or (seg_end and done == n):
                times.append(ts[-1])
                segs.append(seg)
                samples.append(snapshot())
    return np.array(times), np.array(segs), samples, worst


def _suggest_dt(dt: float, drift: float, tol: float) -> float:
    if drift <= 0:
        return dt / 2
    return dt * min(0.5, 0.8 * (tol / drift) ** 0.2)


def evolve_columns(
    model: HamiltonianModel,
    y0: np.ndarray,
    grid: TimeGrid | None = None,
    norm_tol: float = NORM_TOL,
) -> Trajectory:
    """Propagate the columns of ``y0`` (shape ``(d, m)``) together."""
    grid = grid or TimeGrid.for_model(model)
    y = np.array(y0, dtype=complex, order="C")
    if y.ndim != 2 or y.shape[0] != model.dim:
        raise ValueError(f"initial columns must have shape ({model.dim}, m)")
    n0 = np.sum(np.abs(y) ** 2, axis=0)
    rows, cols, vals = _pattern(model)

    def advance(coef, h, ns):
        return _kernels.rk4_pure(y, rows, cols, vals, coef, h, ns)

    times, segs, samples, worst = _walk(model, grid, 0, advance, lambda: y.copy())
    states = np.array(samples)
    drift = np.max(np.abs(np.sum(np.abs(states) ** 2, axis=1) - n0), axis=1)
    traj = Trajectory(times, segs, states, "propagator", model.labels, drift, worst, grid.dt, model)
    if drift[-1] > norm_tol or not np.all(np.isfinite(states[-1])):
        raise AccuracyError(
            f"norm drift {drift[-1]:.3e} exceeds {norm_tol:.1e} at dt={grid.dt:.3e}",
            _suggest_dt(grid.dt, drift[-1], norm_tol),
            traj,
        )
    return traj


def evolve_schrodinger(
    model: HamiltonianModel,
    psi0,
    grid: TimeGrid | None = None,
    norm_tol: float = NORM_TOL,
) -> Trajectory:
    """Integrate ``i dpsi/dt = H psi`` with RK4 on each smooth segment."""
    v = as_vector(psi0)
    if abs(np.vdot(v, v).real - 1.0) > 1e-9:
        raise ValueError("initial state is not normalized")
    tr = evolve_columns(model, v[:, None], grid, norm_tol)
    return Trajectory(
        tr.times, tr.segments, tr.states[:, :, 0], "pure", tr.labels, tr.drift, tr.max_step_drift, tr.dt, model
    )


def evolve_propagator(model: HamiltonianModel, grid: TimeGrid | None = None, columns=None, norm_tol=NORM_TOL):
    """Propagator samples ``U(t)[:, columns]`` (all columns by default)."""
    eye = np.eye(model.dim, dtype=complex)
    y0 = eye if columns is None else eye[:, list(columns)]
    return evolve_columns(model, y0, grid, norm_tol)


def _jump_coo(jumps: Sequence[np.ndarray]):
    ptr, rows, cols, vals = [0], [], [], []
    for L in jumps:
        r, c = np.nonzero(np.abs(L) > 0)
        rows.extend(r)
        cols.extend(c)
        vals.extend(L[r, c])
        ptr.append(len(rows))
    return (
        np.array(ptr, dtype=np.int64),
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(vals, dtype=complex),
    )


def evolve_lindblad(
    model: HamiltonianModel,
    rho0,
    lindblad: LindbladSet | None = None,
    grid: TimeGrid | None = None,
    trace_tol: float = TRACE_TOL,
    neg_tol: float = NEG_TOL,
) -> Trajectory:
    """Integrate the Markovian master equation."""
    grid = grid or TimeGrid.for_model(model)
    lindblad = lindblad or LindbladSet.empty()
    rho0 = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0)
    if rho0.dim != model.dim or (lindblad.dim is not None and lindblad.dim != model.dim):
        raise ValueError("density matrix, jump operators and model must share a dimension")
    jumps = lindblad.jumps()
    anti = -0.5j * sum((L.conj().T @ L for L in jumps), np.zeros((model.dim, model.dim), dtype=complex))
    rows, cols, vals = _pattern(model, [anti])
    jptr, jr, jc, jv = _jump_coo(jumps)
    rho = np.array(rho0.matrix, dtype=complex, order="C")
    state = {"resid": 0.0}

    def advance(coef, h, ns):
        w, r = _kernels.rk4_lindblad(rho, rows, cols, vals, coef, jptr, jr, jc, jv, h, ns, HERM_TOL)
        state["resid"] = max(state["resid"], r)
        if r > HERM_TOL:
            raise AccuracyError(f"antisymmetric residual {r:.3e} exceeds {HERM_TOL:.0e}", grid.dt / 2)
        return w

    times, segs, samples, worst = _walk(model, grid, 1, advance, lambda: rho.copy())
    states = np.array(samples)
    drift = np.abs(np.real(np.trace(states, axis1=1, axis2=2)) - 1.0)
    min_eig = float(min(np.linalg.eigvalsh(s)[0] for s in states))
    traj = Trajectory(times, segs, states, "density", model.labels, drift, worst, grid.dt, model, min_eig)
    if np.max(drift) > trace_tol:
        raise AccuracyError(f"trace drift {np.max(drift):.3e} exceeds {trace_tol:.0e}", grid.dt / 2, traj)
    if min_eig < -neg_tol:
        raise AccuracyError(f"density matrix eigenvalue {min_eig:.3e} below -{neg_tol:.0e}", grid.dt / 2, traj)
    return traj


# --------------------------------------------------------------------------
# phases
# --------------------------------------------------------------------------


class PhaseReport(NamedTuple):
    dynamical: float
    geometric: float
    total: float


def _gauge(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * np.exp(-1j * np.angle(v[k]))


def phase_decomposition(
    traj: Trajectory,
    eigenpath: Callable[[float, int], tuple[float, np.ndarray]],
    min_overlap: float = 0.99,
) -> PhaseReport:
    """Split the phase of a cyclic pure-state run into dynamical and geometric parts.

    ``eigenpath(t, segment)`` returns the instantaneous eigenvalue and
    eigenvector followed by the run; the segment argument selects left or
    right limits at breakpoints (where the followed branch may switch).
    The geometric part is the discrete Berry phase ``-sum arg<l_k|l_k+1>`` closed
    by ``arg<l_0|l_N>``, which is invariant under the eigenvector gauge.
    """
    if traj.kind != "pure":
        raise ValueError("phase decomposition needs a pure-state trajectory")
    t, segs = traj.times, traj.segments
    lam = np.empty(t.size)
    vecs = []
    for k in range(t.size):
        e, v = eigenpath(float(t[k]), int(segs[k]))
        v = _gauge(as_vector(v))
        ov = abs(np.vdot(v, traj.states[k])) ** 2 / max(np.vdot(v, v).real, 1e-300)
        if ov < min_overlap:
            raise PhaseDecompositionError(f"overlap {ov:.4f} with eigenpath at t={t[k]:.4g} below {min_overlap}")
        lam[k] = e
        vecs.append(v)
    # trapezoid per segment; duplicate breakpoint samples give zero-width panels
    dyn = -float(np.sum(0.5 * (lam[1:] + lam[:-1]) * np.diff(t)))
    links = np.array([np.vdot(vecs[k], vecs[k + 1]) for k in range(t.size - 1)])
    berry = -float(np.sum(np.angle(links)))
    geo = float(np.angle(np.exp(1j * (berry + np.angle(np.vdot(vecs[0], vecs[-1]))))))
    total = float(np.angle(np.vdot(traj.states[0], traj.states[-1])))
    return PhaseReport(dyn, geo, total)


def export_trajectory_csv(
    traj: Trajectory,
    path,
    fidelity: np.ndarray | None = None,
    amplitudes: bool = False,
) -> Path:
    """CSV with ``t, fidelity, pop_<label>..., norm_drift`` (+ Re/Im amplitudes if asked)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pops = traj.populations()
    header = ["t"]
    if fidelity is not None:
        header.append("fidelity")
    header += [f"pop_{lab}" for lab in traj.labels]
    header.append("norm_drift")
    if amplitudes and traj.kind == "pure":
        header += [f"{p}_{lab}" for lab in traj.labels for p in ("re", "im")]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k, t in enumerate(traj.times):
            row = [t]
            if fidelity is not None:
                row.append(fidelity[k])
            row += list(pops[k])
            row.append(traj.drift[k])
            if amplitudes and traj.kind == "pure":
                for a in traj.states[k]:
                    row += [a.real, a.imag]
            w.writerow([repr(float(x)) for x in row])
    return path
