import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdgate.core import DensityMatrix, StateVector
from cdgate.dynamics import evolve_columns
from cdgate.gates import (
    FIXED_SINGLE,
    FIXED_TWO,
    LARGE_TWO_QUBIT_GAMMA,
    FidelityError,
    GateSpec,
    LeakageError,
    average_fidelity,
    gate_distance,
    gate_matrix,
    infer_effective_gate,
    single_qubit_state,
    state_fidelity,
    strip_global_phase,
    target_gate,
    two_qubit_state,
    u01,
    u01_tilde,
)
from cdgate.scenarios import PRESETS, computational_indices, make_grid, make_model

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def process(cfg):
    """Computational block of the realised propagator for a preset."""
    model = make_model(cfg)
    idx = computational_indices(cfg)
    tr = evolve_columns(model, np.eye(model.dim, dtype=complex)[:, idx], make_grid(cfg, model))
    block = tr.final[idx, :]
    return lambda cols: block @ cols


def test_u01_sigma_x_up_to_phase():
    u = gate_matrix(GateSpec("u01", np.pi / 4, np.pi)).matrix
    assert gate_distance(u, SX) < 1e-15
    assert np.allclose(u, -SX)  # the closed form carries a global -1


@given(st.floats(0, 2 * np.pi))
def test_u01_trivial_phase(eta):
    assert np.allclose(u01(eta, 0.0), np.eye(2))


def test_u01_tilde_x(pinned):
    ref = np.array([[complex(*x) for x in row] for row in pinned["u01_tilde_x"]])
    assert np.allclose(gate_matrix(GateSpec("u01-tilde", np.pi / 2, np.pi / 2)).matrix, ref)
    assert np.allclose(ref, 1j * SX)


def test_u2_diag(pinned):
    u = gate_matrix(GateSpec("u2", np.pi / 2, np.pi)).matrix
    assert np.allclose(u, np.diag(pinned["u2_diag"]))


@given(st.sampled_from(["u01", "u01-tilde", "u2", "u2-prime"]), st.floats(-7, 7), st.floats(-7, 7))
def test_gates_unitary(family, a, g):
    u = gate_matrix(GateSpec(family, a, g)).matrix
    assert np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < 1e-12


@given(st.floats(0, np.pi), st.floats(-np.pi, np.pi))
def test_u01_eigenvectors(eta, gamma):
    u = u01(eta, gamma)
    bright = np.array([np.sin(eta), np.cos(eta)])
    dark = np.array([np.cos(eta), -np.sin(eta)])
    assert np.allclose(u @ bright, np.exp(1j * gamma) * bright, atol=1e-12)
    assert np.allclose(u @ dark, dark, atol=1e-12)


@given(st.floats(-np.pi, np.pi))
def test_u01_tilde_structure(g):
    z = u01_tilde(0.0, g)
    assert np.allclose(z, np.diag([np.exp(1j * g), np.exp(-1j * g)]))
    x = u01_tilde(np.pi / 2, g)
    assert np.allclose(x, np.cos(g) * np.eye(2) + 1j * np.sin(g) * SX)


@given(st.sampled_from(["u2", "u2-prime"]), st.floats(-7, 7), st.floats(-7, 7))
def test_two_qubit_identity_on_01_10(family, a, g):
    u = gate_matrix(GateSpec(family, a, g)).matrix
    for k in (0, 3):
        e = np.zeros(4)
        e[k] = 1
        assert np.array_equal(u @ e, e)


def test_gate_spec_validation():
    with pytest.raises(ValueError):
        GateSpec("cnot", 0.0, 0.0)


def test_target_gates():
    assert target_gate("tdd", "sigma-x") == GateSpec("u01", np.pi / 4, np.pi)
    assert target_gate("one-photon-resonance", "sigma-z") == GateSpec("u01", np.pi / 2, np.pi)
    assert target_gate("large-detuning", "sigma-x") == GateSpec("u01-tilde", np.pi / 2, np.pi / 2)
    assert target_gate("large-detuning", "sigma-z") == GateSpec("u01-tilde", 0.0, np.pi / 2)
    assert target_gate("large-detuning", "two-qubit").gamma == LARGE_TWO_QUBIT_GAMMA


# --------------------------------------------------------------------------
# states and fidelities
# --------------------------------------------------------------------------


@given(st.lists(st.floats(-7, 7), min_size=6, max_size=6))
def test_initial_states_normalized(a):
    assert np.linalg.norm(single_qubit_state(a[0], a[1])) == pytest.approx(1)
    assert np.linalg.norm(two_qubit_state(*a)) == pytest.approx(1)


def test_fixed_angles():
    assert FIXED_SINGLE == (np.pi / 8, 3 * np.pi / 8)
    assert len(FIXED_TWO) == 6


def test_state_fidelity_examples():
    a = StateVector([1, 0])
    assert state_fidelity(a, a) == 1.0
    assert state_fidelity(a, StateVector([0, 1])) == 0.0
    assert state_fidelity(StateVector([0.6, 0.8j]), DensityMatrix.maximally_mixed(2)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        state_fidelity(a, StateVector([1, 0, 0]))
    with pytest.raises(ValueError):
        state_fidelity(a, np.eye(3) / 3)


@pytest.mark.parametrize("gate", [GateSpec("u01", np.pi / 4, np.pi), GateSpec("u01-tilde", 0.3, 1.2), GateSpec("u01", 0.7, 2.1)])
def test_perfect_runner(gate):
    u = gate_matrix(gate).matrix
    assert average_fidelity(lambda c: u @ c, gate).final == pytest.approx(1.0, abs=1e-14)


def test_identity_runner_constants(pinned):
    f = average_fidelity(lambda c: c, SX).final
    assert f == pytest.approx(pinned["identity_vs_sigma_x"], abs=1e-12)
    f = average_fidelity(lambda c: c, SZ).final
    assert f == pytest.approx(pinned["identity_vs_sigma_z"], abs=1e-12)


def test_grid_16_matches_64():
    rng = np.random.default_rng(2)
    for _ in range(5):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        v, _ = np.linalg.qr(a)
        g = u01(*rng.uniform(0, np.pi, 2))
        f16 = average_fidelity(lambda c: v @ c, g, 16).final
        f64 = average_fidelity(lambda c: v @ c, g, 64).final
        assert abs(f16 - f64) < 1e-6


def test_average_fidelity_trace_shape():
    steps = np.stack([np.eye(2), SX])
    out = average_fidelity(lambda c: steps @ c, SX)
    assert out.trace.shape == (2,)
    assert out.final == pytest.approx(1.0)


def test_node_failure_is_named():
    def runner(c):
        if abs(c[0, 0]) > 0.99:
            raise RuntimeError("boom")
        return c

    with pytest.raises(FidelityError, match="node"):
        average_fidelity(runner, SX, batched=False)
    with pytest.raises(FidelityError, match="batched"):
        average_fidelity(lambda c: 1 / 0, SX)
    with pytest.raises(ValueError):
        average_fidelity(lambda c: c, np.eye(4))


def test_strip_global_phase():
    m = np.exp(0.7j) * SX
    assert np.allclose(strip_global_phase(m), SX)


# --------------------------------------------------------------------------
# inferred gates
# --------------------------------------------------------------------------


def test_exact_runner_inferred():
    g = infer_effective_gate(lambda c: SX @ c, 2)
    assert np.allclose(g.matrix.matrix, SX) and g.leakage == 0


def test_leakage_bound():
    with pytest.raises(LeakageError):
        infer_effective_gate(lambda c: 0.9 * c, 2)


def test_tdd_sigma_z_inferred(pinned):
    g = infer_effective_gate(process(PRESETS["fig1f"]), 2).matrix
    assert gate_distance(g, np.diag([-1.0, 1.0])) < 1e-2
    assert np.allclose(strip_global_phase(g).real, pinned["tdd_sigma_z_gate"], atol=1e-6)


def test_two_qubit_tdd_inferred(pinned):
    g = infer_effective_gate(process(PRESETS["fig4b"]), 4)
    assert gate_distance(g.matrix, np.diag([1.0, -1.0, 1.0, 1.0])) < 5e-2
    assert np.allclose(g.matrix.matrix.real, pinned["two_qubit_tdd_gate"], atol=1e-4)


@pytest.mark.parametrize("name,theta", [("fig2b", np.pi / 2), ("fig2f", 0.0)])
def test_large_detuning_single_qubit_gamma(name, theta):
    # on one qubit the sign of Gamma~ is only a global phase
    g = infer_effective_gate(process(PRESETS[name]), 2).matrix
    assert gate_distance(g, u01_tilde(theta, np.pi / 2)) < 0.1


def test_large_detuning_two_qubit_gamma():
    # two qubits: the common Stark phase of the Lambda block is no longer global,
    # and the realised gate has Gamma~ = -pi/2 rather than +pi/2
    g = infer_effective_gate(process(PRESETS["fig4d"]), 4).matrix
    want = gate_matrix(GateSpec("u2-prime", np.pi / 2, -np.pi / 2))
    other = gate_matrix(GateSpec("u2-prime", np.pi / 2, np.pi / 2))
    assert gate_distance(g, want) < 0.1
    assert gate_distance(g, other) > 0.5
