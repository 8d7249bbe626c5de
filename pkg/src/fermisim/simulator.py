"""Dense state simulation, input preparation, occupations and error budgets.

Two backends: unit vectors for noiseless runs and density operators for
noisy ones.  The noise model is a depolarizing channel applied after
every gate on the gate's support, calibrated so that the channel's
average gate error equals the configured per-gate error (the same
definition randomized benchmarking extracts):

    eps = p (d - 1) / d   =>   p = eps d / (d - 1)

Idles and detunes carry the single-qubit error; virtual-Z and RZ frame
rotations are error-free.  Noisy evolution is exact channel algebra, no
trajectory sampling, so every run is deterministic.

States live in the dense qubit frame of :mod:`fermisim.fermions`; all
occupation I/O converts through that module's mode/qubit mapping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .circuits import (
    Circuit,
    Gate,
    apply_circuit_vector,
    apply_gate_to_tensor,
    gate_unitary,
)
from .fermions import index_occupations, mode_qubit, occupation_basis_index
from .pauli import WeightedPauliSum

NORM_TOL = 1e-10
PSD_TOL = 1e-8
PROBABILITY_SUM_TOL = 1e-6

TYPICAL_EPS_2Q = 7.4e-3
TYPICAL_EPS_1Q = 8e-4


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing per-gate noise with RB-convention average errors."""

    eps_2q: float = TYPICAL_EPS_2Q
    eps_1q: float = TYPICAL_EPS_1Q
    channel_kind: str = "depolarizing"

    def __post_init__(self):
        for eps in (self.eps_2q, self.eps_1q):
            if not 0.0 <= eps <= 1.0:
                raise ValueError(f"gate error {eps} outside [0, 1]")
        if self.channel_kind != "depolarizing":
            raise ValueError("only depolarizing noise is modelled")

    def scaled(self, factor: float) -> NoiseModel:
        return replace(self, eps_2q=self.eps_2q * factor,
                       eps_1q=self.eps_1q * factor)

    def channel_probability(self, n_targets: int) -> float:
        """Depolarizing probability whose average gate error equals eps."""
        d = 2 ** n_targets
        eps = self.eps_2q if n_targets == 2 else self.eps_1q
        return min(1.0, eps * d / (d - 1))


def typical_noise() -> NoiseModel:
    """The default per-gate errors (selected by the CLI value `paper`)."""
    return NoiseModel()


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    qubit_count: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        if amp.shape != (2 ** self.qubit_count,):
            raise ValueError("amplitude vector has wrong length")
        if abs(np.vdot(amp, amp).real - 1.0) > NORM_TOL:
            raise ValueError("state is not normalised")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_density(self) -> DensityState:
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityState(rho, self.qubit_count)


@dataclass(frozen=True)
class DensityState:
    rho: np.ndarray
    qubit_count: int

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        object.__setattr__(self, "rho", rho)
        dim = 2 ** self.qubit_count
        if rho.shape != (dim, dim):
            raise ValueError("density matrix has wrong shape")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > NORM_TOL:
            raise ValueError("density matrix trace is not 1")
        if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
            raise ValueError("density matrix is not positive semidefinite")

    def probabilities(self) -> np.ndarray:
        return np.clip(np.diag(self.rho).real, 0.0, None)


def basis_state(qubit_count: int, index: int = 0) -> PureState:
    amp = np.zeros(2 ** qubit_count, dtype=complex)
    amp[index] = 1.0
    return PureState(amp, qubit_count)


def state_from_occupations(weights: dict[tuple[int, ...], complex],
                           qubit_count: int) -> PureState:
    """Pure state from occupation-ket amplitudes (1 = occupied)."""
    amp = np.zeros(2 ** qubit_count, dtype=complex)
    for occ, w in weights.items():
        amp[occupation_basis_index(occ)] += w
    amp = amp / np.linalg.norm(amp)
    return PureState(amp, qubit_count)


_INPUT_TARGETS = {
    # equal superposition of occupation kets, per model size
    "two_mode": (2, [(0, 1), (1, 1)]),
    "three_mode": (3, [(1, 0, 1), (1, 1, 0)]),
    "four_mode": (4, [(0, 1, 0, 1), (0, 1, 1, 0), (1, 0, 0, 1),
                      (1, 0, 1, 0)]),
}


def _cnot(control: int, target: int) -> list[Gate]:
    h = [Gate("RY", (target,), math.pi / 2), Gate("PI_X", (target,))]
    return h + [Gate("CZPHI", (control, target), math.pi)] + h


def _bell_pair(a: int, b: int) -> list[Gate]:
    """(|01> + |10>)/sqrt(2) on qubits (a, b) from |00>."""
    return [Gate("RY", (a,), math.pi / 2)] + _cnot(a, b) \
        + [Gate("PI_X", (b,))]


def input_circuit(kind: str) -> Circuit:
    """State-preparation circuit acting on the all-zeros qubit state."""
    if kind == "two_mode":
        return Circuit(2, (Gate("RY", (1,), math.pi / 2),),
                       {"prep": kind})
    if kind == "three_mode":
        return Circuit(3, tuple(_bell_pair(0, 1)), {"prep": kind})
    if kind == "four_mode":
        return Circuit(4, tuple(_bell_pair(0, 1) + _bell_pair(2, 3)),
                       {"prep": kind})
    raise ValueError(f"unknown input kind {kind!r}")


def prepare_input(kind: str, method: str = "direct") -> PureState:
    if kind not in _INPUT_TARGETS:
        raise ValueError(f"unknown input kind {kind!r}")
    n, kets = _INPUT_TARGETS[kind]
    if method == "direct":
        return state_from_occupations({k: 1.0 for k in kets}, n)
    if method == "circuit":
        return apply_circuit(basis_state(n), input_circuit(kind))
    raise ValueError("method must be 'direct' or 'circuit'")


def _embedded_unitary(g: Gate, n: int) -> np.ndarray:
    dim = 2 ** n
    block = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    block = apply_gate_to_tensor(block, gate_unitary(g), g.targets, n)
    return block.reshape(dim, dim)


def partial_trace(rho: np.ndarray, drop: tuple[int, ...],
                  n: int) -> np.ndarray:
    """Trace out the given qubits of an n-qubit density matrix."""
    keep = [q for q in range(n) if q not in drop]
    t = rho.reshape((2,) * (2 * n))
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
        # axes after q shift down by one in both bra and ket groups
    dim = 2 ** len(keep)
    return t.reshape(dim, dim)


def _depolarize(rho: np.ndarray, targets: tuple[int, ...], p: float,
                n: int) -> np.ndarray:
    """(1 - p) rho + p * (maximally mixed on targets) x (reduced rest)."""
    if p <= 0.0:
        return rho
    k = len(targets)
    reduced = partial_trace(rho, targets, n)
    keep = [q for q in range(n) if q not in targets]
    mixed = np.kron(reduced, np.eye(2 ** k, dtype=complex) / 2 ** k)
    # mixed is ordered (keep..., targets...); permute back
    order = keep + list(targets)
    perm = [order.index(q) for q in range(n)]
    t = mixed.reshape((2,) * (2 * n))
    t = np.transpose(t, perm + [pq + n for pq in perm])
    return (1.0 - p) * rho + p * t.reshape(rho.shape)


def apply_circuit(state, circuit: Circuit, noise: NoiseModel | None = None):
    """Run a circuit; a noisy run promotes pure states to densities."""
    n = circuit.qubit_count
    if getattr(state, "qubit_count", None) != n:
        raise ValueError("state and circuit qubit counts differ")
    if noise is None:
        if isinstance(state, PureState):
            amps = apply_circuit_vector(circuit, state.amplitudes)
            return PureState(amps, n)
        rho = state.rho
        for g in circuit.gates:
            u = _embedded_unitary(g, n)
            rho = u @ rho @ u.conj().T
        return DensityState(rho, n)
    dense = state.to_density() if isinstance(state, PureState) else state
    rho = dense.rho
    for g in circuit.gates:
        u = _embedded_unitary(g, n)
        rho = u @ rho @ u.conj().T
        if g.duration_class == "virtual":
            continue
        p = noise.channel_probability(len(g.targets))
        rho = _depolarize(rho, g.targets, p, n)
    return DensityState(rho, n)


def exact_evolve(hamiltonian: WeightedPauliSum, t: float,
                 state: PureState) -> PureState:
    """exp(-i H t)|psi> via eigendecomposition of the dense Hamiltonian."""
    if not hamiltonian.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    if hamiltonian.qubit_count != state.qubit_count:
        raise ValueError("Hamiltonian and state qubit counts differ")
    h = hamiltonian.to_dense()
    vals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * vals * t)
    amps = vecs @ (phases * (vecs.conj().T @ state.amplitudes))
    amps = amps * np.exp(-1j * hamiltonian.scalar_offset * t)
    return PureState(amps, state.qubit_count)


def mode_occupations(state) -> np.ndarray:
    """P(mode i occupied), i.e. its qubit in the occupied level."""
    n = state.qubit_count
    probs = state.probabilities()
    out = np.zeros(n)
    for mode in range(n):
        q = mode_qubit(mode, n)
        weight = 2 ** (n - 1 - q)
        idx = np.arange(2 ** n)
        occupied = ((idx // weight) % 2) == 0
        out[mode] = probs[occupied].sum()
    return out


def state_overlap(reference: PureState, state) -> float:
    """True fidelity <ref|rho|ref> against a pure reference state.

    The distribution-level metric of :func:`state_fidelity` is the
    measurement-side estimator of this quantity; it agrees to first
    order but is quadratically forgiving of incoherent errors, so
    simulated error-per-step numbers quote this exact overlap.
    """
    v = reference.amplitudes
    if isinstance(state, PureState):
        return float(abs(np.vdot(v, state.amplitudes)) ** 2)
    return float(np.real(v.conj() @ state.rho @ v))


def state_fidelity(p_ideal, p) -> float:
    """Classical (Bhattacharyya) fidelity over computational outcomes."""
    a = np.asarray(p_ideal, dtype=float)
    b = np.asarray(p, dtype=float)
    if a.shape != b.shape:
        raise ValueError("probability vectors differ in length")
    for v in (a, b):
        if v.min() < -PROBABILITY_SUM_TOL:
            raise ValueError(f"negative probability {v.min()}")
        if abs(v.sum() - 1.0) > PROBABILITY_SUM_TOL:
            raise ValueError(f"probabilities sum to {v.sum()}, not 1")
    a = np.clip(a, 0.0, None)
    b = np.clip(b, 0.0, None)
    a = a / a.sum()
    b = b / b.sum()
    return float(np.sqrt(a * b).sum() ** 2)


def error_budget(census: dict[str, int], noise: NoiseModel) -> float:
    """Additive per-step process error from the gate census.

    Counts every single-qubit row of the census (microwave, idle,
    detune, and the software phase gates) at eps_1q, matching the
    published budget arithmetic for the canonical steps.
    """
    n_single = (census["microwave"] + census["idle"] + census["detune"]
                + census["virtual"])
    return census["entangling"] * noise.eps_2q + n_single * noise.eps_1q


def accessible_indices(hoppings, n_modes: int,
                       input_state: PureState,
                       tol: float = 1e-9) -> np.ndarray:
    """Basis indices reachable from the input under number conservation.

    Hopping-connected mode groups conserve their particle number; the
    reachable set is every basis state whose per-group numbers match a
    number tuple present in the input state.
    """
    parent = list(range(n_modes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j, _ in hoppings:
        parent[find(i)] = find(j)
    groups = {}
    for m in range(n_modes):
        groups.setdefault(find(m), []).append(m)
    group_list = list(groups.values())

    def signature(index):
        occ = index_occupations(index, n_modes)
        return tuple(sum(occ[m] for m in g) for g in group_list)

    probs = input_state.probabilities()
    allowed = {signature(i) for i in np.nonzero(probs > tol)[0]}
    idx = np.array([i for i in range(2 ** n_modes)
                    if signature(i) in allowed], dtype=int)
    return idx


def other_state_population(state, accessible: np.ndarray) -> float:
    probs = state.probabilities()
    return float(1.0 - probs[accessible].sum())
