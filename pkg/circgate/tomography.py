"""Simulated two-qubit state and process tomography of the blockade gate.

Conventions, fixed here and nowhere else:

* Two-qubit operator basis: unnormalized Paulis P_k = sigma_c (x) sigma_t with
  k = 4 c + t over (I, X, Y, Z).
* Choi matrix J[(a, i), (b, j)] = Lambda(|i><j|)[a, b], output index first.
  Trace preservation reads Tr_out J = I.
* chi is defined by Lambda(rho) = sum_mn chi_mn P_m rho P_n^dagger, so
  J = B chi B^dagger with B the columns vec(P_m), and Tr chi = 1 for a
  trace-preserving map.
* Measurements: the nine Pauli-pair settings, four outcomes each, eigenvector
  order (+, -) per qubit.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Annotated, List, Optional

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, WithJsonSchema
from scipy.optimize import minimize

from circgate.config import max_workers as configured_workers
from circgate.dynamics import PAIR_DIM, STATE_0, STATE_1, apply_superoperator, sequence_propagator
from circgate.error_model import intrinsic_error_E1, min_error
from circgate.exceptions import ContractViolationError, NotPositiveSemidefiniteError, SingularInputBasisError
from circgate.numerics import kron, project_psd, psd_sqrt

logger = logging.getLogger(__name__)

QUBIT_DIM = 4
COMPUTATIONAL_INDICES = [a * 4 + b for a in (STATE_0, STATE_1) for b in (STATE_0, STATE_1)]

_SQRT_HALF = 1 / np.sqrt(2)
PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PAULI_LABELS = [a + b for a in "IXYZ" for b in "IXYZ"]

EIGENVECTORS = {
    "Z": (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
    "X": (np.array([1, 1], dtype=complex) * _SQRT_HALF, np.array([1, -1], dtype=complex) * _SQRT_HALF),
    "Y": (np.array([1, 1j], dtype=complex) * _SQRT_HALF, np.array([1, -1j], dtype=complex) * _SQRT_HALF),
}
SETTINGS = ["".join(s) for s in itertools.product("XYZ", repeat=2)]

INPUT_STATES = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) * _SQRT_HALF,
    "+i": np.array([1, 1j], dtype=complex) * _SQRT_HALF,
}
INPUT_LABELS = [f"{c},{t}" for c in INPUT_STATES for t in INPUT_STATES]

MLE_GRADIENT_TOLERANCE = 1e-10
# 16 real parameters, so a max-norm of tolerance / 4 bounds the 2-norm by tolerance
MLE_OPTIONS = {"gtol": MLE_GRADIENT_TOLERANCE / 4, "ftol": 1e-300, "maxiter": 10_000, "maxfun": 100_000}
MLE_POLISH_OPTIONS = {"gtol": MLE_GRADIENT_TOLERANCE / 4, "maxiter": 10_000}
CPTP_TOLERANCE = 1e-8
CPTP_MAX_ITERATIONS = 20_000


def complex_pairs(matrix):
    matrix = np.asarray(matrix)
    return np.stack([matrix.real, matrix.imag], axis=-1).tolist()


def from_complex_pairs(pairs):
    array = np.asarray(pairs, dtype=float)
    return array[..., 0] + 1j * array[..., 1]


def _complex_array(value):
    if isinstance(value, np.ndarray):
        return value.astype(complex, copy=False)
    return from_complex_pairs(value)


ComplexArray = Annotated[
    np.ndarray,
    BeforeValidator(_complex_array),
    PlainSerializer(complex_pairs, return_type=list),
    WithJsonSchema({"type": "array", "description": "Complex entries as [real, imag] pairs"}),
]
RealArray = Annotated[
    np.ndarray,
    BeforeValidator(lambda value: np.asarray(value, dtype=float)),
    PlainSerializer(lambda array: array.tolist(), return_type=list),
    WithJsonSchema({"type": "array"}),
]


def pauli_basis():
    return [kron(PAULIS[label[0]], PAULIS[label[1]]) for label in PAULI_LABELS]


def _pauli_vec_matrix():
    return np.column_stack([P.reshape(-1) for P in pauli_basis()])


def _projectors():
    """(9, 4, 4, 4) array of outcome projectors per setting."""
    table = np.empty((len(SETTINGS), 4, QUBIT_DIM, QUBIT_DIM), dtype=complex)
    for s, setting in enumerate(SETTINGS):
        for k, (a, b) in enumerate(itertools.product(EIGENVECTORS[setting[0]], EIGENVECTORS[setting[1]])):
            v = np.kron(a, b)
            table[s, k] = np.outer(v, v.conj())
    return table


PROJECTORS = _projectors()


def qubit_input_states():
    """The 16 product inputs as 4x4 two-qubit density matrices, index 4 c + t."""
    states = []
    for c, t in itertools.product(INPUT_STATES.values(), repeat=2):
        v = np.kron(c, t)
        states.append(np.outer(v, v.conj()))
    return states


def embed_qubit_state(rho4):
    rho = np.zeros((PAIR_DIM, PAIR_DIM), dtype=complex)
    rho[np.ix_(COMPUTATIONAL_INDICES, COMPUTATIONAL_INDICES)] = rho4
    return rho


def qpt_input_states():
    """The 16 product inputs embedded in the 16-level pair space."""
    return [embed_qubit_state(rho4) for rho4 in qubit_input_states()]


def project_to_computational(rho16):
    rho16 = np.asarray(rho16)
    rho4 = rho16[np.ix_(COMPUTATIONAL_INDICES, COMPUTATIONAL_INDICES)].copy()
    loss = float(np.clip(1.0 - np.trace(rho4).real, 0.0, 1.0))
    return rho4, loss


def measurement_probabilities(rho4, shots=None, rng=None):
    """Born probabilities, shape (9 settings, 4 outcomes).

    With ``shots`` each setting is sampled multinomially; the population missing
    from a subnormalized state is an extra undetected outcome.
    """
    rho4 = np.asarray(rho4)
    probabilities = np.einsum("skij,ji->sk", PROJECTORS, rho4).real
    probabilities = np.clip(probabilities, 0.0, None)
    if shots is None:
        return probabilities
    rng = rng if rng is not None else np.random.default_rng()
    sampled = np.empty_like(probabilities)
    for s, row in enumerate(probabilities):
        lost = max(0.0, 1.0 - row.sum())
        pvals = np.append(row, lost)
        counts = rng.multinomial(shots, pvals / pvals.sum())
        sampled[s] = counts[:4] / shots
    return sampled


class StateEstimate(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    rho: ComplexArray
    converged: bool
    iterations: int
    gradient_norm: float
    message: str
    relative_entropy: float = Field(..., description="Likelihood objective at the optimum, zero for an exact fit")
    detected_fraction: float = Field(default=1.0, description="Mean detected probability per setting")

    @property
    def subnormalized(self):
        """The unit-trace estimate scaled to the detected population."""
        return self.rho * self.detected_fraction


def _unpack_lower_triangular(x):
    T = np.zeros((QUBIT_DIM, QUBIT_DIM), dtype=complex)
    T[np.diag_indices(QUBIT_DIM)] = x[:QUBIT_DIM]
    rows, cols = np.tril_indices(QUBIT_DIM, -1)
    T[rows, cols] = x[QUBIT_DIM::2] + 1j * x[QUBIT_DIM + 1::2]
    return T


def _pack_lower_triangular(M):
    rows, cols = np.tril_indices(QUBIT_DIM, -1)
    off = M[rows, cols]
    packed = np.empty(QUBIT_DIM + 2 * off.size)
    packed[:QUBIT_DIM] = np.diag(M).real
    packed[QUBIT_DIM::2] = off.real
    packed[QUBIT_DIM + 1::2] = off.imag
    return packed


def _linear_inversion_state(prob_table):
    A = np.conj(PROJECTORS.reshape(-1, QUBIT_DIM * QUBIT_DIM))
    x, *_ = np.linalg.lstsq(A, np.asarray(prob_table, dtype=complex).reshape(-1), rcond=None)
    rho = x.reshape(QUBIT_DIM, QUBIT_DIM)
    rho = 0.5 * (rho + rho.conj().T)
    trace = np.trace(rho).real
    rho = rho / trace if trace > 0 else np.eye(QUBIT_DIM) / QUBIT_DIM
    eigenvalues, eigenvectors = np.linalg.eigh(rho)
    eigenvalues = np.clip(eigenvalues, 1e-12, None)
    rho = (eigenvectors * eigenvalues) @ eigenvectors.conj().T
    return rho / np.trace(rho).real


def _cholesky_seed(rho):
    """Lower-triangular T with T^dagger T = rho."""
    flip = np.eye(QUBIT_DIM)[::-1]
    try:
        lower = np.linalg.cholesky(flip @ rho @ flip)
    except np.linalg.LinAlgError:
        lower = np.linalg.cholesky(flip @ (rho + 1e-10 * np.eye(QUBIT_DIM)) @ flip)
    upper = flip @ lower @ flip
    return upper.conj().T


def _relative_entropy(x, prob_table, mask, detected):
    """Multinomial negative log-likelihood shifted by a data-only constant.

    Per setting: relative entropy between the detected frequencies p and the
    model probabilities q scaled by the detected fraction c, summed termwise as
    p (u - log1p(u)) >= 0 with u = c q / p - 1; zero-frequency outcomes add c q.
    Same optimum and gradient as -sum p log q, and zero at an exact fit.
    """
    T = _unpack_lower_triangular(x)
    A = T.conj().T @ T
    trace = np.trace(A).real
    rho = A / trace
    q = np.einsum("skij,ji->sk", PROJECTORS, rho).real
    q = np.clip(q, 1e-300, None)
    p = prob_table
    scaled = detected[:, None] * q
    u = np.where(mask, scaled / np.where(mask, p, 1.0), 1.0) - 1.0
    value = float(np.sum(np.where(mask, p * (u - np.log1p(u)), scaled)))
    weights = np.where(mask, p / q, 0.0)
    G = -np.einsum("sk,skij->ij", weights, PROJECTORS)
    G_prime = (G - np.trace(G @ rho) * np.eye(QUBIT_DIM)) / trace
    M = T @ G_prime
    gradient = _pack_lower_triangular(2 * M)
    return value, gradient


def mle_state(prob_table):
    """Unit-trace maximum-likelihood state for a (9, 4) probability table.

    Rows may sum to less than one; the missing probability is the undetected
    population and is reported as ``detected_fraction``.  L-BFGS-B runs first;
    when it stops above the gradient tolerance, BFGS continues from its point.
    """
    prob_table = np.asarray(prob_table, dtype=float)
    mask = prob_table > 0
    detected = prob_table.sum(axis=1)
    args = (prob_table, mask, detected)
    x0 = _pack_lower_triangular(_cholesky_seed(_linear_inversion_state(prob_table)))
    result = minimize(_relative_entropy, x0, args=args, jac=True, method="L-BFGS-B", options=MLE_OPTIONS)
    iterations = int(result.nit)
    gradient_norm = float(np.linalg.norm(result.jac))
    if gradient_norm >= MLE_GRADIENT_TOLERANCE:
        logger.debug(f"L-BFGS-B stopped at gradient norm {gradient_norm:.3e} ({result.message}), polishing with BFGS")
        polished = minimize(_relative_entropy, result.x, args=args, jac=True, method="BFGS",
                            options=MLE_POLISH_OPTIONS)
        iterations += int(polished.nit)
        polished_norm = float(np.linalg.norm(polished.jac))
        if polished_norm < gradient_norm:
            result, gradient_norm = polished, polished_norm
    T = _unpack_lower_triangular(result.x)
    A = T.conj().T @ T
    rho = A / np.trace(A).real
    estimate = StateEstimate(
        rho=0.5 * (rho + rho.conj().T),
        converged=gradient_norm < MLE_GRADIENT_TOLERANCE,
        iterations=iterations,
        gradient_norm=gradient_norm,
        message=str(result.message),
        relative_entropy=float(result.fun),
        detected_fraction=float(np.mean(detected)),
    )
    if not estimate.converged:
        logger.warning(
            f"State MLE did not converge after {estimate.iterations} iterations "
            f"(gradient norm {estimate.gradient_norm:.3e}): {estimate.message}"
        )
    return estimate


def choi_to_chi(J):
    B = _pauli_vec_matrix()
    chi = B.conj().T @ J @ B / 16
    return 0.5 * (chi + chi.conj().T)


def chi_to_choi(chi):
    B = _pauli_vec_matrix()
    return B @ chi @ B.conj().T


def apply_choi(J, rho):
    J4 = np.asarray(J).reshape(QUBIT_DIM, QUBIT_DIM, QUBIT_DIM, QUBIT_DIM)
    return np.einsum("aibj,ij->ab", J4, rho)


def apply_chi(chi, rho):
    return apply_choi(chi_to_choi(chi), rho)


def chi_from_unitary(U):
    B = _pauli_vec_matrix()
    c = B.conj().T @ np.asarray(U, dtype=complex).reshape(-1) / 4
    return np.outer(c, c.conj())


def ideal_chi_cz():
    """chi of diag(1, -1, -1, -1), the phase pattern the pi - 2pi - pi sequence imprints."""
    return chi_from_unitary(np.diag([1.0, -1.0, -1.0, -1.0]))


def partial_trace_output(J):
    J4 = np.asarray(J).reshape(QUBIT_DIM, QUBIT_DIM, QUBIT_DIM, QUBIT_DIM)
    return np.einsum("aiaj->ij", J4)


def _project_trace_preserving(J):
    Y = partial_trace_output(J)
    return J - np.kron(np.eye(QUBIT_DIM), Y - np.eye(QUBIT_DIM)) / QUBIT_DIM


def _tp_residual(J):
    return float(np.linalg.norm(partial_trace_output(J) - np.eye(QUBIT_DIM)))


def nearest_cptp_choi(J, tolerance=CPTP_TOLERANCE, max_iterations=CPTP_MAX_ITERATIONS):
    """Frobenius-nearest CPTP Choi matrix by Dykstra's alternating projections.

    Returns (choi, iterations, tp_residual).  The returned matrix is exactly
    PSD and trace preserving to ``tolerance``.
    """
    x = 0.5 * (J + J.conj().T)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    residual = _tp_residual(x)
    y = x
    for iteration in range(1, max_iterations + 1):
        y = project_psd(x + p)
        p = x + p - y
        residual = _tp_residual(y)
        if residual <= tolerance:
            return y, iteration, residual
        x_next = _project_trace_preserving(y + q)
        q = y + q - x_next
        x = x_next
    logger.warning(f"CPTP projection stopped after {max_iterations} iterations, TP residual {residual:.3e}")
    return y, max_iterations, residual


class ChiEstimate(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    raw: ComplexArray
    physical: ComplexArray
    raw_choi: ComplexArray
    physical_choi: ComplexArray
    projection_iterations: int
    tp_residual: float


def choi_from_map(process):
    """Linear-inversion Choi matrix from (input, output) pairs of 4x4 states."""
    if len(process) != QUBIT_DIM * QUBIT_DIM:
        raise SingularInputBasisError(f"Process tomography needs 16 input/output pairs, got {len(process)}")
    V = np.column_stack([np.asarray(rho_in, dtype=complex).reshape(-1) for rho_in, _ in process])
    if np.linalg.matrix_rank(V, tol=1e-10) < V.shape[0]:
        raise SingularInputBasisError("Input states do not span the two-qubit operator space")
    coefficients = np.linalg.solve(V, np.eye(V.shape[0]))
    outputs = np.stack([np.asarray(rho_out, dtype=complex) for _, rho_out in process])
    unit_images = np.einsum("nk,nab->kab", coefficients, outputs)
    J = unit_images.reshape(QUBIT_DIM, QUBIT_DIM, QUBIT_DIM, QUBIT_DIM).transpose(2, 0, 3, 1)
    J = J.reshape(QUBIT_DIM * QUBIT_DIM, QUBIT_DIM * QUBIT_DIM)
    return 0.5 * (J + J.conj().T)


def chi_from_map(process):
    raw_choi = choi_from_map(process)
    physical_choi, iterations, residual = nearest_cptp_choi(raw_choi)
    logger.debug(f"chi projection: {iterations} iterations, TP residual {residual:.3e}")
    return ChiEstimate(
        raw=choi_to_chi(raw_choi),
        physical=choi_to_chi(physical_choi),
        raw_choi=raw_choi,
        physical_choi=physical_choi,
        projection_iterations=iterations,
        tp_residual=residual,
    )


def _normalized_psd(chi, name, tolerance=1e-9):
    chi = np.asarray(chi, dtype=complex)
    scale = max(np.max(np.abs(chi)), 1e-300)
    if np.max(np.abs(chi - chi.conj().T)) > 1e-10 * scale:
        raise ContractViolationError(f"{name} is not Hermitian")
    chi = 0.5 * (chi + chi.conj().T)
    trace = np.trace(chi).real
    if trace <= 0:
        raise ContractViolationError(f"{name} has non-positive trace {trace}")
    chi = chi / trace
    eigenvalues, eigenvectors = np.linalg.eigh(chi)
    if eigenvalues[0] < -tolerance:
        raise NotPositiveSemidefiniteError(float(eigenvalues[0]), tolerance)
    return (eigenvectors * np.clip(eigenvalues, 0.0, None)) @ eigenvectors.conj().T


def process_error(chi_sim, chi_id):
    """1 - F with F the squared Uhlmann fidelity of the unit-trace chi matrices."""
    a = _normalized_psd(chi_sim, "chi_sim")
    b = _normalized_psd(chi_id, "chi_id")
    root = psd_sqrt(a)
    inner = root @ b @ root
    fidelity = np.trace(psd_sqrt(0.5 * (inner + inner.conj().T))).real ** 2
    return float(np.clip(1.0 - fidelity, 0.0, 1.0))


def average_gate_fidelity(e_o, dim=QUBIT_DIM):
    return (dim * (1.0 - e_o) + 1.0) / (dim + 1.0)


class TomographyRecord(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    label: str
    final_state: ComplexArray
    projected_state: ComplexArray
    trace_loss: float
    probabilities: RealArray
    reconstruction: Optional[StateEstimate] = None


class QptResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    e_o: float
    mean_trace_loss: float
    e_cb: float
    e1: float
    chi: ChiEstimate
    mle_converged: bool
    records: List[TomographyRecord] = Field(default_factory=list)

    @property
    def average_fidelity(self):
        return average_gate_fidelity(self.e_o)


def run_full_qpt(params, shots=None, seed=None, workers=None):
    """Gate dynamics for the 16 inputs, then QST per output, chi fit and process error.

    chi is fitted to the reconstructions scaled by their detected fraction, so
    population lost from the computational subspace lowers the process fidelity.
    """
    propagator = sequence_propagator(params)
    rngs = [None] * QUBIT_DIM ** 2
    if shots is not None:
        rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(QUBIT_DIM ** 2)]

    records = []
    for label, rho_in, rng in zip(INPUT_LABELS, qpt_input_states(), rngs):
        final = apply_superoperator(propagator, rho_in)
        deviation = abs(np.trace(final).real - 1.0)
        if deviation > 1e-9:
            logger.warning(f"Input {label}: trace drifted by {deviation:.3e}")
        rho4, loss = project_to_computational(final)
        probabilities = measurement_probabilities(rho4, shots=shots, rng=rng)
        records.append(TomographyRecord(label=label, final_state=final, projected_state=rho4, trace_loss=loss,
                                        probabilities=probabilities))

    with ThreadPoolExecutor(max_workers=workers or configured_workers()) as executor:
        estimates = list(executor.map(mle_state, [record.probabilities for record in records]))
    for record, estimate in zip(records, estimates):
        record.reconstruction = estimate
    unconverged = [record.label for record, estimate in zip(records, estimates) if not estimate.converged]
    if unconverged:
        logger.warning(f"State MLE unconverged for inputs {unconverged}")

    chi = chi_from_map(list(zip(qubit_input_states(), [estimate.subnormalized for estimate in estimates])))
    e_o = process_error(chi.physical, ideal_chi_cz())
    mean_loss = float(np.mean([record.trace_loss for record in records]))
    e_cb = min_error(params.blockade_B, params.tau)
    logger.info(f"QPT finished: E_O={e_o:.4e}, mean trace loss={mean_loss:.4e}, E_cb={e_cb:.4e}")
    return QptResult(e_o=e_o, mean_trace_loss=mean_loss, e_cb=e_cb, e1=intrinsic_error_E1(params), chi=chi,
                     mle_converged=not unconverged, records=records)
