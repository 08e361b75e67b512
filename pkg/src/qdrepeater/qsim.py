"""Small exact quantum oracle for the protocol's quantum steps.

Two layers:

* state-vector dynamics of the electron to nuclear-ensemble flip-flop
  transfer, both in the collective excitation-number basis and in the full
  2**(N+1) product space (brute-force cross-check), and
* a dense density-matrix register (up to 8 qubits) used to simulate the
  swap circuit and short chains with scalar-fidelity noise channels.

Conventions: qubit |0> is spin-down, |1> is spin-up; qubit 0 is the most
significant bit of the register index.  The controlled-Z gate flips the sign
of |11> (both spins up) only.  Scalar fidelities are realized as depolarizing
channels: a pair fidelity F maps to a Werner state of parameter
(4F-1)/3, a gate fidelity to a two-qubit depolarizing channel of matching
average gate fidelity.  Readout errors flip the classical record with
probability 1 - F_readout; no extra quantum back-action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

_NORM_TOL = 1e-9
_TRACE_TOL = 1e-10

MAX_FULL_SPACE_NUCLEI = 10

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
CZ_GATE = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)

_BELL_LABELS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


# ---------------------------------------------------------------------------
# transfer dynamics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransferParams:
    """Flip-flop transfer configuration.

    ``coupling`` is the rescaled per-nucleus hyperfine rate (rad/s); from the
    polarized ensemble the collective Rabi rate is sqrt(n_nuclei)*coupling.
    ``delta_m`` tags which spin-wave mode the pulse sequence addresses; the
    two-level reduction of the dynamics is mode independent.
    """

    n_nuclei: int
    coupling: float
    delta_m: int = 1

    def __post_init__(self):
        if self.n_nuclei < 1:
            raise ValueError("need at least one nucleus")
        if self.delta_m not in (1, 2):
            raise ValueError("delta_m must be 1 or 2")

    @property
    def rabi_rate(self) -> float:
        return math.sqrt(self.n_nuclei) * self.coupling


@dataclass(frozen=True)
class PureState:
    """State vector over a labeled register.

    ``space`` is ``"collective"`` (electron times excitation number,
    dimension 2*(N+1)) or ``"full"`` (electron times N spin-1/2 nuclei,
    dimension 2**(N+1)).
    """

    amps: np.ndarray
    n_nuclei: int
    space: str = "collective"

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        object.__setattr__(self, "amps", amps)
        expected = (2 * (self.n_nuclei + 1) if self.space == "collective"
                    else 2 ** (self.n_nuclei + 1))
        if amps.shape != (expected,):
            raise ValueError(f"state dimension {amps.shape} does not match "
                             f"{self.space} register of {self.n_nuclei} nuclei")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state is not normalized (|norm-1| = {abs(norm-1):.2e})")

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amps, other.amps))


def collective_index(electron_up: int, excitations: int, n_nuclei: int) -> int:
    """Index of |electron, k excitations> in the collective register."""
    return electron_up * (n_nuclei + 1) + excitations


def collective_state(alpha: complex, beta: complex, n_nuclei: int) -> PureState:
    """(alpha |up> + beta |down>) electron over the polarized ensemble."""
    amps = np.zeros(2 * (n_nuclei + 1), dtype=complex)
    amps[collective_index(1, 0, n_nuclei)] = alpha
    amps[collective_index(0, 0, n_nuclei)] = beta
    norm = np.linalg.norm(amps)
    return PureState(amps / norm, n_nuclei, "collective")


def build_flipflop_hamiltonian(p: TransferParams) -> np.ndarray:
    """Flip-flop Hamiltonian on the electron x collective-excitation basis.

    Couples |up, k> to |down, k+1> with the spin-1/2 collective ladder
    element coupling*sqrt((k+1)(N-k)); |down, 0> is exactly stationary.
    """
    n = p.n_nuclei
    dim = 2 * (n + 1)
    H = np.zeros((dim, dim), dtype=complex)
    for k in range(n):
        elem = p.coupling * math.sqrt((k + 1) * (n - k))
        i_up = collective_index(1, k, n)
        i_dn = collective_index(0, k + 1, n)
        H[i_up, i_dn] = elem
        H[i_dn, i_up] = elem
    return H


def _propagator(H: np.ndarray, t: float) -> np.ndarray:
    energies, modes = np.linalg.eigh(H)
    return (modes * np.exp(-1j * energies * t)) @ modes.conj().T


def transfer_propagator(p: TransferParams, t: float) -> np.ndarray:
    """Exact unitary exp(-i H t) on the collective register."""
    return _propagator(build_flipflop_hamiltonian(p), t)


def evolve_transfer(state: PureState, p: TransferParams, t: float) -> PureState:
    """Evolve a collective-register state for time t under the flip-flop."""
    if state.space != "collective":
        raise ValueError("evolve_transfer expects a collective-basis state")
    if state.n_nuclei != p.n_nuclei:
        raise ValueError("state and parameters disagree on the nucleus count")
    amps = transfer_propagator(p, t) @ state.amps
    return PureState(amps, p.n_nuclei, "collective")


def _embed(op: np.ndarray, targets: list[int], n_qubits: int) -> np.ndarray:
    """Place a 2**k operator on the given qubits of an n-qubit register."""
    k = len(targets)
    if len(set(targets)) != k:
        raise ValueError("target qubits must be distinct")
    dim = 2**n_qubits
    rest = [q for q in range(n_qubits) if q not in targets]
    out = np.zeros((dim, dim), dtype=complex)
    t_shift = [n_qubits - 1 - q for q in targets]
    r_shift = [n_qubits - 1 - q for q in rest]

    def spread(bits: int, shifts: list[int]) -> int:
        idx = 0
        for pos, shift in enumerate(shifts):
            idx |= ((bits >> (len(shifts) - 1 - pos)) & 1) << shift
        return idx

    rest_indices = [spread(r, r_shift) for r in range(2 ** len(rest))]
    for a in range(2**k):
        ia = spread(a, t_shift)
        for b in range(2**k):
            v = op[a, b]
            if v == 0:
                continue
            ib = spread(b, t_shift)
            for ir in rest_indices:
                out[ia | ir, ib | ir] = v
    return out


def build_full_space_hamiltonian(p: TransferParams) -> np.ndarray:
    """Per-nucleus flip-flop Hamiltonian on the 2**(N+1) product register.

    coupling * sum_i (sigma+_i S-_e + sigma-_i S+_e); only the delta_m = 1
    single-magnon mode has a product-space representation here.
    """
    if p.delta_m != 1:
        raise ValueError("full product-space dynamics is defined for delta_m = 1")
    if p.n_nuclei > MAX_FULL_SPACE_NUCLEI:
        raise ValueError(f"full space limited to {MAX_FULL_SPACE_NUCLEI} nuclei")
    n_qubits = p.n_nuclei + 1
    s_minus = np.array([[0, 1], [0, 0]], dtype=complex)   # |0><1| on electron
    sig_plus = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0| on a nucleus
    pair = np.kron(s_minus, sig_plus) + np.kron(s_minus, sig_plus).conj().T
    H = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    for i in range(1, n_qubits):
        H += _embed(pair, [0, i], n_qubits)
    return p.coupling * H


def full_space_oracle(p: TransferParams, state: PureState, t: float) -> PureState:
    """Brute-force evolution in the full product space."""
    if state.space != "full":
        raise ValueError("full_space_oracle expects a full product-space state")
    if state.n_nuclei != p.n_nuclei:
        raise ValueError("state and parameters disagree on the nucleus count")
    amps = _propagator(build_full_space_hamiltonian(p), t) @ state.amps
    return PureState(amps, p.n_nuclei, "full")


def embed_collective(state: PureState) -> PureState:
    """Lift a collective-basis state to the full product space.

    The k-excitation basis state maps to the symmetric Dicke state of k
    raised nuclei.
    """
    if state.space != "collective":
        raise ValueError("expected a collective-basis state")
    n = state.n_nuclei
    full = np.zeros(2 ** (n + 1), dtype=complex)
    for e in (0, 1):
        for k in range(n + 1):
            amp = state.amps[collective_index(e, k, n)]
            if amp == 0:
                continue
            weight = amp / math.sqrt(math.comb(n, k))
            for raised in combinations(range(n), k):
                idx = e << n
                for pos in raised:
                    idx |= 1 << (n - 1 - pos)
                full[idx] += weight
    return PureState(full, n, "full")


# ---------------------------------------------------------------------------
# density-matrix register
# ---------------------------------------------------------------------------

class DensityMatrix:
    """Dense density matrix over a small qubit register."""

    def __init__(self, mat: np.ndarray, n_qubits: int, check: bool = True):
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (2**n_qubits, 2**n_qubits):
            raise ValueError("matrix shape does not match the qubit count")
        if check:
            if abs(np.trace(mat).real - 1.0) > _TRACE_TOL:
                raise ValueError("density matrix trace differs from 1")
            if not np.allclose(mat, mat.conj().T, atol=1e-9):
                raise ValueError("density matrix is not Hermitian")
        self.mat = mat
        self.n_qubits = n_qubits

    @classmethod
    def from_pure(cls, amps: np.ndarray) -> "DensityMatrix":
        amps = np.asarray(amps, dtype=complex)
        n = int(round(math.log2(amps.size)))
        amps = amps / np.linalg.norm(amps)
        return cls(np.outer(amps, amps.conj()), n)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.mat.copy(), self.n_qubits, check=False)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.mat, other.mat),
                             self.n_qubits + other.n_qubits, check=False)

    def apply_unitary(self, op: np.ndarray, qubits: list[int]) -> "DensityMatrix":
        U = _embed(op, qubits, self.n_qubits)
        return DensityMatrix(U @ self.mat @ U.conj().T, self.n_qubits,
                             check=False)

    def apply_kraus(self, ops: list[np.ndarray],
                    qubits: list[int]) -> "DensityMatrix":
        out = np.zeros_like(self.mat)
        for op in ops:
            K = _embed(op, qubits, self.n_qubits)
            out += K @ self.mat @ K.conj().T
        return DensityMatrix(out, self.n_qubits, check=False)

    def partial_trace(self, keep: list[int]) -> "DensityMatrix":
        n = self.n_qubits
        t = self.mat.reshape((2,) * (2 * n))
        remaining = list(range(n))
        for q in sorted(set(range(n)) - set(keep), reverse=True):
            pos = remaining.index(q)
            m = len(remaining)
            t = np.trace(t, axis1=pos, axis2=pos + m)
            remaining.pop(pos)
        d = 2 ** len(remaining)
        return DensityMatrix(t.reshape(d, d), len(remaining), check=False)

    def measure_z_branches(self, qubit: int):
        """Projective Z-measurement branches [(prob, outcome, collapsed)]."""
        idx = np.arange(2**self.n_qubits)
        bit = (idx >> (self.n_qubits - 1 - qubit)) & 1
        branches = []
        for outcome in (0, 1):
            mask = (bit == outcome).astype(float)
            proj = mask[:, None] * mask[None, :]
            sub = self.mat * proj
            prob = float(np.trace(sub).real)
            if prob <= 1e-15:
                continue
            branches.append((prob, outcome,
                             DensityMatrix(sub / prob, self.n_qubits,
                                           check=False)))
        return branches

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.mat).min())


def bell_state(label: str) -> np.ndarray:
    """Two-qubit Bell state vector; |psi_plus> = (|01>+|10>)/sqrt(2)."""
    if label not in _BELL_LABELS:
        raise ValueError(f"unknown Bell label {label!r}")
    amps = np.zeros(4, dtype=complex)
    s = math.sqrt(0.5)
    if label.startswith("phi"):
        amps[0b00], amps[0b11] = s, (s if label == "phi_plus" else -s)
    else:
        amps[0b01], amps[0b10] = s, (s if label == "psi_plus" else -s)
    return amps


def bell_fidelity(rho: DensityMatrix, target: str = "psi_plus") -> float:
    """Overlap <B|rho|B> with the chosen Bell state."""
    if rho.n_qubits != 2:
        raise ValueError("bell_fidelity expects a two-qubit state")
    b = bell_state(target)
    return float(np.real(b.conj() @ rho.mat @ b))


def werner_pair(fidelity: float, label: str = "psi_plus") -> DensityMatrix:
    """Depolarized Bell pair with the requested Bell fidelity.

    Werner parameter w = (4F-1)/3, so that bell_fidelity returns F exactly.
    """
    w = (4.0 * fidelity - 1.0) / 3.0
    b = bell_state(label)
    mat = w * np.outer(b, b.conj()) + (1.0 - w) * np.eye(4) / 4.0
    return DensityMatrix(mat, 2)


def _two_qubit_depolarizing_kraus(p_dep: float) -> list[np.ndarray]:
    paulis = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
    ops = []
    for a, pa in enumerate(paulis):
        for b, pb in enumerate(paulis):
            weight = 1.0 - 15.0 * p_dep / 16.0 if a == b == 0 else p_dep / 16.0
            ops.append(math.sqrt(weight) * np.kron(pa, pb))
    return ops


def apply_cz(rho: DensityMatrix, q1: int, q2: int,
             F_gate: float = 1.0) -> DensityMatrix:
    """Controlled-Z on (q1, q2) followed by depolarizing gate noise.

    The two-qubit depolarizing strength is calibrated so the channel's
    average gate fidelity equals ``F_gate`` (p = 4*(1-F)/3).
    """
    if q1 == q2:
        raise ValueError("controlled-Z needs two distinct qubits")
    out = rho.apply_unitary(CZ_GATE, [q1, q2])
    if F_gate >= 1.0:
        return out
    p_dep = 4.0 * (1.0 - F_gate) / 3.0
    return out.apply_kraus(_two_qubit_depolarizing_kraus(p_dep), [q1, q2])


def _correction(record_z: int, record_x: int) -> np.ndarray:
    """Pauli fixing the swapped pair to |psi_plus> for a given record."""
    op = np.eye(2, dtype=complex)
    if record_z == 0:
        op = PAULI_X @ op
    if record_x == 1:
        op = PAULI_Z @ op
    return op


def swap_branches(rho: DensityMatrix, F_gate: float, F_readout: float):
    """All measurement branches of one entanglement swap.

    ``rho`` holds the four communication qubits [D1, D2, D3, D4].  The swap is
    H(D2) CZ(D2,D3) H(D2), then H(D3); D2 and D3 are read out in Z with the
    record flipped with probability 1 - F_readout.  Returns a deterministic
    ordered list of ``(probability, (record_D2, record_D3), pair_dm)`` with
    the record-conditioned Pauli correction already applied to D4 and the
    measured qubits traced out.
    """
    if rho.n_qubits != 4:
        raise ValueError("swap expects a four-qubit register")
    eps = 1.0 - F_readout
    state = rho.apply_unitary(HADAMARD, [1])
    state = apply_cz(state, 1, 2, F_gate)
    state = state.apply_unitary(HADAMARD, [1])
    state = state.apply_unitary(HADAMARD, [2])

    branches = []
    for p2, m2, after2 in state.measure_z_branches(1):
        for p3, m3, after3 in after2.measure_z_branches(2):
            for f2 in (0, 1):
                for f3 in (0, 1):
                    p_flip = (eps if f2 else 1.0 - eps) * (eps if f3 else 1.0 - eps)
                    if p_flip == 0.0:
                        continue
                    r2, r3 = m2 ^ f2, m3 ^ f3
                    corrected = after3.apply_unitary(_correction(r2, r3), [3])
                    pair = corrected.partial_trace([0, 3])
                    branches.append((p2 * p3 * p_flip, (r2, r3), pair))
    return branches


def swap_entanglement(rho: DensityMatrix, F_gate: float, F_readout: float,
                      rng: np.random.Generator | None = None):
    """Sample one swap outcome; returns (corrected pair on D1/D4, record bits)."""
    if rng is None:
        rng = np.random.default_rng()
    branches = swap_branches(rho, F_gate, F_readout)
    u = rng.random()
    acc = 0.0
    for prob, record, pair in branches:
        acc += prob
        if u <= acc:
            return pair, record
    return branches[-1][2], branches[-1][1]


def averaged_swap(pair_a: DensityMatrix, pair_b: DensityMatrix,
                  F_gate: float, F_readout: float) -> DensityMatrix:
    """Outcome-averaged swap of two pairs (exact, no sampling)."""
    joint = pair_a.tensor(pair_b)
    out = np.zeros((4, 4), dtype=complex)
    for prob, _, pair in swap_branches(joint, F_gate, F_readout):
        out += prob * pair.mat
    return DensityMatrix(out, 2)


def chain_fidelity_oracle(l: int, F_ent: float, F_transfer: float,
                          F_gate: float, F_readout: float,
                          F_e_init: float) -> float:
    """End-to-end Bell fidelity of an l-link chain, exactly branch-averaged.

    Each link starts as a depolarized pair of fidelity
    F_e_init**2 * F_ent * F_transfer**2 (two initialized dots, one heralded
    generation, two write-read cycles); the l-1 noisy swaps are applied
    hierarchically.
    """
    if l not in (1, 2, 4):
        raise ValueError("chain oracle supports l in {1, 2, 4}")
    pair_fidelity = F_e_init**2 * F_ent * F_transfer**2
    level = [werner_pair(pair_fidelity) for _ in range(l)]
    while len(level) > 1:
        level = [averaged_swap(level[i], level[i + 1], F_gate, F_readout)
                 for i in range(0, len(level), 2)]
    return bell_fidelity(level[0])
