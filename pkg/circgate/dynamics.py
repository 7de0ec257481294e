"""Two-atom master-equation dynamics for the pi - 2pi - pi blockade sequence.

Per-atom basis is (|0>, |g>, |1>, |r>) with indices 0..3; pair states are
ordered control (x) target, so |rr> is index 15.  Superoperators act on
row-major vectorized density matrices, vec(A rho B) = (A (x) B^T) vec(rho).

The Rydberg level decays to the 16 hyperfine ground sublevels with equal
branching: 1/16 each into |0> and |1>, the remaining 7/8 collected in |g>.
The pair dissipator is the sum of the single-atom dissipators acting on
their own tensor factor, so inter-atom coherences damp at the sum of the
single-atom rates.
"""
import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field

from circgate.exceptions import ContractViolationError, DomainError, NumericalFailureError
from circgate.numerics import kron, matrix_exp, rk4_integrate

logger = logging.getLogger(__name__)

STATE_0, STATE_G, STATE_1, STATE_R = range(4)
ATOM_DIM = 4
PAIR_DIM = ATOM_DIM * ATOM_DIM
RR_INDEX = PAIR_DIM - 1
BRANCHING = {STATE_0: 1 / 16, STATE_G: 7 / 8, STATE_1: 1 / 16}

_I4 = np.eye(ATOM_DIM, dtype=complex)


class PulseSegment(BaseModel):
    target_atom: Literal["control", "target"]
    pulse_area: float = Field(..., gt=0.0, description="Pulse area (rad)")
    omega: float = Field(..., ge=0.0, description="Rabi frequency of the driven atom (rad/s)")

    @property
    def duration(self):
        if self.omega == 0:
            raise DomainError("A segment with omega = 0 has no intrinsic duration")
        return self.pulse_area / self.omega


def single_atom_hamiltonian(omega, omega_10):
    """H/hbar in rad/s, rotating frame of a laser resonant with |1> <-> |r>."""
    H = np.zeros((ATOM_DIM, ATOM_DIM), dtype=complex)
    H[STATE_0, STATE_0] = -omega_10
    H[STATE_0, STATE_R] = H[STATE_1, STATE_R] = np.conj(omega) / 2
    H[STATE_R, STATE_0] = H[STATE_R, STATE_1] = omega / 2
    return H


def jump_operators(gamma_r):
    if gamma_r < 0:
        raise DomainError(f"Decay rate must be >= 0, got {gamma_r}")
    operators = []
    for final, weight in BRANCHING.items():
        L = np.zeros((ATOM_DIM, ATOM_DIM), dtype=complex)
        L[final, STATE_R] = math.sqrt(weight * gamma_r)
        operators.append(L)
    return operators


def commutator_superoperator(H):
    identity = np.eye(H.shape[0])
    return -1j * (np.kron(H, identity) - np.kron(identity, H.T))


def dissipator_superoperator(jumps, dim):
    identity = np.eye(dim)
    D = np.zeros((dim * dim, dim * dim), dtype=complex)
    for L in jumps:
        LdL = L.conj().T @ L
        D += np.kron(L, L.conj()) - 0.5 * (np.kron(LdL, identity) + np.kron(identity, LdL.T))
    return D


def single_atom_liouvillian(gamma_r):
    """Decay superoperator on vectorized 4x4 density matrices."""
    return dissipator_superoperator(jump_operators(gamma_r), ATOM_DIM)


def pair_hamiltonian(omega_c, omega_t, omega_10, blockade_B):
    H = kron(single_atom_hamiltonian(omega_c, omega_10), _I4) + kron(_I4, single_atom_hamiltonian(omega_t, omega_10))
    H[RR_INDEX, RR_INDEX] += blockade_B
    return H


def pair_jump_operators(gamma_r):
    single = jump_operators(gamma_r)
    return [kron(L, _I4) for L in single] + [kron(_I4, L) for L in single]


def two_atom_generator(params, segment):
    """Full Liouvillian for one pulse segment: only ``segment.target_atom`` is driven."""
    omega_c = segment.omega if segment.target_atom == "control" else 0.0
    omega_t = segment.omega if segment.target_atom == "target" else 0.0
    H = pair_hamiltonian(omega_c, omega_t, params.omega_10, params.blockade_B)
    G = commutator_superoperator(H)
    if params.gamma_r > 0:
        G = G + dissipator_superoperator(pair_jump_operators(params.gamma_r), PAIR_DIM)
    return G


def _finite(matrix, what):
    if not np.all(np.isfinite(matrix)):
        raise NumericalFailureError(f"{what} contains non-finite entries")
    return matrix


def segment_propagator(params, segment, duration=None):
    t = segment.duration if duration is None else duration
    if t < 0:
        raise DomainError(f"duration must be >= 0, got {t}")
    logger.debug(f"Segment on {segment.target_atom}: area {segment.pulse_area:.4f} rad, duration {t:.4e} s")
    return _finite(matrix_exp(two_atom_generator(params, segment) * t), "segment propagator")


def apply_superoperator(S, rho):
    dim = rho.shape[0]
    return (S @ rho.reshape(-1)).reshape(dim, dim)


def propagate(rho0, params, segment, duration=None):
    rho0 = np.asarray(rho0, dtype=complex)
    return apply_superoperator(segment_propagator(params, segment, duration), rho0)


def propagate_rk4(rho0, params, segment, steps, duration=None):
    t = segment.duration if duration is None else duration
    rho0 = np.asarray(rho0, dtype=complex)
    y = rk4_integrate(two_atom_generator(params, segment), rho0.reshape(-1), (0.0, t), steps)
    return _finite(y, "RK4 solution").reshape(rho0.shape)


def cz_pulse_sequence(params):
    return [
        PulseSegment(target_atom="control", pulse_area=math.pi, omega=params.omega),
        PulseSegment(target_atom="target", pulse_area=2 * math.pi, omega=params.omega),
        PulseSegment(target_atom="control", pulse_area=math.pi, omega=params.omega),
    ]


def qubit_frame_unitary(params):
    """exp(+i H0 T) for the bare splitting H0 over the full sequence duration T."""
    if not math.isfinite(params.omega_10):
        raise DomainError("omega_10 must be finite for time evolution")
    phase = np.exp(-1j * params.omega_10 * params.gate_duration)
    single = np.diag([phase, 1.0, 1.0, 1.0])
    return kron(single, single)


def qubit_frame_superoperator(params):
    U = qubit_frame_unitary(params)
    return np.kron(U, U.conj())


def sequence_propagator(params, qubit_frame=True):
    """Composite map of the three pulses (and the frame correction) on vectorized 16x16 states."""
    S = np.eye(PAIR_DIM * PAIR_DIM, dtype=complex)
    for segment in cz_pulse_sequence(params):
        S = segment_propagator(params, segment) @ S
    if qubit_frame:
        S = qubit_frame_superoperator(params) @ S
    return S


def run_cz_sequence(rho0, params, qubit_frame=True):
    """Evolve a pair state through pi_c, (2pi)_t, pi_c.

    With ``qubit_frame`` the free precession of |0> at omega_10 accumulated over
    4 pi / Omega is removed, which is the frame the target diag(1,-1,-1,-1) is
    written in.
    """
    rho = check_density_matrix(rho0, PAIR_DIM)
    for segment in cz_pulse_sequence(params):
        rho = propagate(rho, params, segment)
        logger.debug(f"After {segment.target_atom} pulse: trace {np.trace(rho).real:.12f}")
    if qubit_frame:
        U = qubit_frame_unitary(params)
        rho = U @ rho @ U.conj().T
    return rho


def check_density_matrix(rho, dim=None, hermitian_rtol=1e-10, trace_tol=1e-10, eig_tol=1e-9):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ContractViolationError(f"Density matrix must be square, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise ContractViolationError(f"Expected a {dim}x{dim} density matrix, got {rho.shape[0]}x{rho.shape[1]}")
    scale = max(np.max(np.abs(rho)), 1e-300)
    if np.max(np.abs(rho - rho.conj().T)) > hermitian_rtol * scale:
        raise ContractViolationError("Density matrix is not Hermitian")
    trace = np.trace(rho).real
    if trace < -trace_tol or trace > 1 + trace_tol:
        raise ContractViolationError(f"Density matrix trace {trace} outside [0, 1]")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -eig_tol:
        raise ContractViolationError(f"Density matrix has eigenvalue {lowest:.3e} below -{eig_tol}")
    return rho


def basis_state(label):
    """Pure pair state from a two-character label over {0, g, 1, r}, e.g. '1r'."""
    index = {"0": STATE_0, "g": STATE_G, "1": STATE_1, "r": STATE_R}
    if len(label) != 2 or any(ch not in index for ch in label):
        raise DomainError(f"Unknown pair-state label '{label}'")
    psi = np.zeros(PAIR_DIM, dtype=complex)
    psi[index[label[0]] * ATOM_DIM + index[label[1]]] = 1.0
    return np.outer(psi, psi.conj())
