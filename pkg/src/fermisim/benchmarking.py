"""Clifford-group machinery and interleaved randomized benchmarking.

The one- and two-qubit Clifford groups (orders 24 and 11520) are built
by breadth-first closure over generator unitaries, deduplicated with a
global-phase-fixed hash.  Each element stores its generator word, which
doubles as a hardware gate decomposition (H as a half-turn plus pi
pulse, S as a virtual phase, CZ as the pi-phase entangler), and an
inverse is found by hashing the adjoint.

Benchmarking runs sequences of uniformly random Cliffords (optionally
interleaving a fixed circuit after each one), appends the recovery
Clifford inverting the whole sequence, and simulates with the density
backend under the configured per-gate depolarizing noise.  Sequence
fidelity is the ground-state return probability.  Decays are fitted to
A p^m + B and interleaved gate errors extracted with the standard ratio
formula r = (1 - p_int / p_ref)(d - 1)/d.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .circuits import Circuit, Gate, circuit_unitary
from .simulator import NoiseModel, apply_circuit, basis_state

SINGLE_QUBIT_ORDER = 24
TWO_QUBIT_ORDER = 11520


class ClosureError(RuntimeError):
    """Raised when generator closure does not produce the expected group."""


class FitError(RuntimeError):
    """Raised when decay data cannot support a fit."""


def _hadamard_gates(q: int) -> tuple[Gate, ...]:
    return (Gate("RY", (q,), math.pi / 2), Gate("PI_X", (q,)))


def _phase_gates(q: int) -> tuple[Gate, ...]:
    return (Gate("VIRTUAL_Z", (q,), math.pi / 2),)


def _generators(n: int) -> list[Circuit]:
    gens = []
    for q in range(n):
        gens.append(Circuit(n, _hadamard_gates(q), {"gen": f"h{q}"}))
        gens.append(Circuit(n, _phase_gates(q), {"gen": f"s{q}"}))
    if n == 2:
        gens.append(Circuit(2, (Gate("CZPHI", (0, 1), math.pi),),
                            {"gen": "cz"}))
    return gens


def phase_fixed_key(u: np.ndarray, decimals: int = 8) -> bytes:
    """Hashable fingerprint of a unitary modulo global phase.

    The phase reference is the first entry (row-major) whose magnitude
    clears a fixed threshold; Clifford entries are either ~0 or at least
    1/4, so the choice is stable against accumulated rounding.
    """
    flat = u.reshape(-1)
    idx = int(np.argmax(np.abs(flat) > 0.1))
    fixed = u * (abs(flat[idx]) / flat[idx])
    rounded = np.round(fixed, decimals) + 0.0  # normalise -0.0
    return rounded.tobytes()


@dataclass(frozen=True)
class CliffordElement:
    index: int
    word: tuple[int, ...]       # generator indices, applied in order
    unitary: np.ndarray


class CliffordGroup:
    """Closure of the generator set with decomposition and inverse lookup."""

    def __init__(self, qubit_count: int):
        if qubit_count not in (1, 2):
            raise ValueError("only 1- and 2-qubit groups are supported")
        self.qubit_count = qubit_count
        self.generators = _generators(qubit_count)
        gen_unitaries = [circuit_unitary(g) for g in self.generators]
        dim = 2 ** qubit_count
        elements = [CliffordElement(0, (), np.eye(dim, dtype=complex))]
        lookup = {phase_fixed_key(elements[0].unitary): 0}
        frontier = [elements[0]]
        while frontier:
            next_frontier = []
            for el in frontier:
                for gi, gu in enumerate(gen_unitaries):
                    u = gu @ el.unitary
                    key = phase_fixed_key(u)
                    if key in lookup:
                        continue
                    new = CliffordElement(len(elements), el.word + (gi,), u)
                    elements.append(new)
                    lookup[key] = new.index
                    next_frontier.append(new)
            frontier = next_frontier
        expected = SINGLE_QUBIT_ORDER if qubit_count == 1 else TWO_QUBIT_ORDER
        if len(elements) != expected:
            raise ClosureError(
                f"closure produced {len(elements)} elements, "
                f"expected {expected}"
            )
        self.elements = elements
        self._lookup = lookup
        self._inverse = [
            lookup[phase_fixed_key(el.unitary.conj().T)] for el in elements
        ]

    def __len__(self) -> int:
        return len(self.elements)

    def index_of(self, u: np.ndarray) -> int | None:
        return self._lookup.get(phase_fixed_key(u))

    def inverse_index(self, index: int) -> int:
        return self._inverse[index]

    def decomposition(self, index: int) -> Circuit:
        gates: list[Gate] = []
        for gi in self.elements[index].word:
            gates.extend(self.generators[gi].gates)
        return Circuit(self.qubit_count, tuple(gates),
                       {"clifford": index})

    def contains_unitary(self, u: np.ndarray) -> bool:
        return self.index_of(u) is not None


_GROUP_CACHE: dict[int, CliffordGroup] = {}


def clifford_group(two_qubit: bool = True) -> CliffordGroup:
    """The (cached) single- or two-qubit Clifford group."""
    n = 2 if two_qubit else 1
    if n not in _GROUP_CACHE:
        _GROUP_CACHE[n] = CliffordGroup(n)
    return _GROUP_CACHE[n]


def _sequence_return_probability(group, indices, interleaved, noise):
    n = group.qubit_count
    state = basis_state(n)
    total = np.eye(2 ** n, dtype=complex)
    acc_gates: list[Gate] = []
    for idx in indices:
        acc_gates.extend(group.decomposition(idx).gates)
        total = group.elements[idx].unitary @ total
        if interleaved is not None:
            acc_gates.extend(interleaved.gates)
            total = circuit_unitary(interleaved) @ total
    recovery = group.index_of(total.conj().T)
    if recovery is None:
        raise ClosureError("sequence product left the Clifford group")
    acc_gates.extend(group.decomposition(recovery).gates)
    out = apply_circuit(state, Circuit(n, tuple(acc_gates)), noise)
    return float(out.probabilities()[0])


def rb_run(m_values, k_sequences: int, interleaved: Circuit | None,
           noise: NoiseModel, seed: int, group: CliffordGroup | None = None,
           tag: str | None = None) -> dict:
    """Mean sequence fidelity per Clifford count.

    Returns {"m": [...], "mean": [...], "stderr": [...], "tag": str}.
    Each (m, sequence) pair draws from an independent child seed, so
    aggregation order cannot change the result.
    """
    if group is None:
        group = clifford_group(two_qubit=True)
    if interleaved is not None:
        if interleaved.qubit_count != group.qubit_count:
            raise ValueError("interleaved circuit has wrong qubit count")
        u = circuit_unitary(interleaved)
        if not group.contains_unitary(u):
            raise ValueError(
                "interleaved circuit is not a Clifford; unitary:\n"
                f"{np.round(u, 4)}"
            )
    ms = sorted(int(m) for m in m_values)
    if any(m < 1 for m in ms):
        raise ValueError("sequence lengths must be >= 1")
    means, errs = [], []
    order = len(group)
    for mi, m in enumerate(ms):
        vals = []
        for j in range(k_sequences):
            rng = np.random.default_rng(
                np.random.SeedSequence(seed, spawn_key=(mi, j))
            )
            indices = rng.integers(order, size=m)
            vals.append(_sequence_return_probability(
                group, indices, interleaved, noise))
        vals = np.array(vals)
        means.append(float(vals.mean()))
        errs.append(float(vals.std(ddof=1) / math.sqrt(len(vals)))
                    if len(vals) > 1 else 0.0)
    return {
        "m": ms,
        "mean": means,
        "stderr": errs,
        "tag": tag or ("interleaved" if interleaved is not None else "ref"),
    }


@dataclass(frozen=True)
class DecayFit:
    """A p^m + B fit of sequence fidelity versus Clifford count."""

    A: float
    B: float
    p: float
    residual_rms: float
    covariance: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"decay parameter {self.p} outside (0, 1]")


def fit_decay(table: dict) -> DecayFit:
    """Bounded least-squares fit of the RB decay."""
    ms = np.asarray(table["m"], dtype=float)
    ys = np.asarray(table["mean"], dtype=float)
    if len(set(ms.tolist())) < 3:
        raise FitError("need at least 3 distinct sequence lengths")
    if not np.all(np.isfinite(ys)):
        raise FitError("non-finite sequence fidelities")

    def model(m, a, b, p):
        return a * p ** m + b

    spread = ys.max() - ys.min()
    if spread < 1e-12:
        # flat data: no decay, level entirely in the offset
        return DecayFit(0.0, float(ys[0]), 1.0, 0.0, np.zeros((3, 3)))
    p0 = (max(spread, 0.1), float(np.clip(ys.min(), 0.0, 1.0)), 0.98)
    try:
        with warnings.catch_warnings():
            # three points fit three parameters exactly; covariance is
            # meaningless there and only kept as a diagnostic
            warnings.simplefilter("ignore", OptimizeWarning)
            params, cov = curve_fit(
                model, ms, ys, p0=p0,
                bounds=([0.0, 0.0, 1e-6], [1.0, 1.0, 1.0]), maxfev=20000,
            )
    except RuntimeError as exc:
        raise FitError(f"decay fit did not converge: {exc}") from exc
    a, b, p = (float(v) for v in params)
    resid = ys - model(ms, *params)
    return DecayFit(a, b, p, float(np.sqrt(np.mean(resid ** 2))), cov)


def extract_interleaved_error(ref: DecayFit, interleaved: DecayFit,
                              dimension: int = 4) -> float:
    """Average error of the interleaved gate from the decay ratio."""
    if ref.p <= 0.0:
        raise ValueError("reference decay parameter must be positive")
    ratio = interleaved.p / ref.p
    return (1.0 - ratio) * (dimension - 1) / dimension
