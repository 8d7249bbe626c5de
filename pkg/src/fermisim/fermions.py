"""Jordan-Wigner encoding of small fermionic lattice models.

Mode/qubit assignment (the one place this mapping is defined):

* Mode ``m`` of an ``n``-mode model lives on qubit ``n - 1 - m``, i.e.
  mode 0 is the rightmost tensor factor / least significant dense bit.
  The creation operator for mode ``m`` is ``S+`` on its qubit with a
  ``Z`` tail on every qubit to its right (the slots of lower modes).
* In the dense qubit frame an occupied mode corresponds to the
  computational |0> of its qubit: with ``S+ = (X + iY)/2`` as the
  creator, the number operator comes out as ``(I + Z)/2``.  All
  user-facing occupation I/O (input kets, occupation probabilities)
  uses occupation labels, where 1 means occupied; the relabelling
  between the two is handled by :func:`occupation_basis_index` and
  friends, never ad hoc.

Supported models: the two-mode hop/repel pair, the three-mode chain
(hopping and on-site repulsion on both adjacent pairs), and the
four-mode two-site, two-species asymmetric model with per-species
hoppings ``(V1, V2)`` and per-site repulsions ``(Ux, Uy)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .pauli import (
    DimensionError,
    PauliString,
    WeightedPauliSum,
)

MAX_MODES = 4


def mode_qubit(mode: int, n_modes: int) -> int:
    """Qubit (tensor slot) carrying a given mode."""
    if not 0 <= mode < n_modes:
        raise ValueError(f"mode {mode} out of range for {n_modes} modes")
    return n_modes - 1 - mode


def occupation_basis_index(occupations) -> int:
    """Dense basis index of an occupation tuple (mode 0 first).

    Occupied (1) maps to computational 0 on the mode's qubit; qubit 0 is
    the most significant bit of the index.
    """
    occ = tuple(int(o) for o in occupations)
    n = len(occ)
    idx = 0
    for mode, o in enumerate(occ):
        if o not in (0, 1):
            raise ValueError(f"occupation must be 0 or 1, got {o}")
        bit = 1 - o
        idx |= bit << mode  # qubit n-1-mode holds bit of weight 2**mode
    return idx


def index_occupations(index: int, n_modes: int) -> tuple[int, ...]:
    """Inverse of :func:`occupation_basis_index`."""
    return tuple(1 - ((index >> m) & 1) for m in range(n_modes))


def jw_creation(mode: int, n_modes: int) -> PauliString:
    """Jordan-Wigner string for the creation operator of a mode."""
    if n_modes > MAX_MODES:
        raise ValueError(f"at most {MAX_MODES} modes supported")
    q = mode_qubit(mode, n_modes)
    factors = ["I"] * n_modes
    factors[q] = "S+"
    for tail in range(q + 1, n_modes):
        factors[tail] = "Z"
    return PauliString(tuple(factors))


def jw_annihilation(mode: int, n_modes: int) -> PauliString:
    return jw_creation(mode, n_modes).dagger()


def anticommutator(a: PauliString, b: PauliString) -> WeightedPauliSum:
    """ab + ba expanded into {I, X, Y, Z} terms."""
    if a.qubit_count != b.qubit_count:
        raise DimensionError(
            f"qubit counts differ: {a.qubit_count} vs {b.qubit_count}"
        )
    ea, eb = a.expand(), b.expand()
    return ea * eb + eb * ea


@dataclass(frozen=True)
class FermionMode:
    """A single-particle mode with its lattice-site and species labels."""

    index: int
    site: str
    species: int


def ahm_modes() -> tuple[FermionMode, ...]:
    """Canonical (site, species) -> index assignment for the 4-mode model.

    The chain order is (x,1), (y,1), (y,2), (x,2): species-1 modes sit at
    the bottom of the JW string and the site-x species-2 mode carries the
    longest Z tail.
    """
    return (
        FermionMode(0, "x", 1),
        FermionMode(1, "y", 1),
        FermionMode(2, "y", 2),
        FermionMode(3, "x", 2),
    )


@dataclass(frozen=True)
class FermionModel:
    """Hopping/repulsion couplings over 2-4 modes.

    ``hoppings`` entries (i, j, V) contribute -V (b_i^ b_j + b_j^ b_i);
    ``repulsions`` entries (i, j, U) contribute U n_i n_j.
    """

    mode_count: int
    hoppings: tuple[tuple[int, int, float], ...] = ()
    repulsions: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.mode_count not in (2, 3, 4):
            raise ValueError("mode_count must be 2, 3 or 4")
        for i, j, g in list(self.hoppings) + list(self.repulsions):
            if i == j:
                raise ValueError(f"coupling ({i}, {j}) must join two modes")
            if not (0 <= i < self.mode_count and 0 <= j < self.mode_count):
                raise ValueError(f"coupling ({i}, {j}) out of range")
            if not np.isfinite(g):
                raise ValueError(f"coupling strength {g} is not finite")

    def to_json_dict(self) -> dict:
        return {
            "modes": self.mode_count,
            "hopping": [[i, j, v] for i, j, v in self.hoppings],
            "repulsion": [[i, j, u] for i, j, u in self.repulsions],
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> FermionModel:
        return cls(
            payload["modes"],
            tuple((int(i), int(j), float(v))
                  for i, j, v in payload.get("hopping", [])),
            tuple((int(i), int(j), float(u))
                  for i, j, u in payload.get("repulsion", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> FermionModel:
        return cls.from_json_dict(json.loads(text))


def two_mode_model(V: float, U: float) -> FermionModel:
    reps = ((0, 1, U),) if U else ()
    return FermionModel(2, ((0, 1, V),), reps)


def three_mode_model(V: float, U: float) -> FermionModel:
    """Three-mode chain: hopping and repulsion on both adjacent pairs."""
    reps = ((0, 1, U), (1, 2, U)) if U else ()
    return FermionModel(3, ((0, 1, V), (1, 2, V)), reps)


def four_mode_ahm(V1: float, V2: float, Ux: float, Uy: float) -> FermionModel:
    """Two sites x two species; repulsion couples same-site mode pairs."""
    hops = ((0, 1, V1), (2, 3, V2))
    reps = tuple(
        (i, j, u) for i, j, u in ((0, 3, Ux), (1, 2, Uy)) if u
    )
    return FermionModel(4, hops, reps)


def number_operator(mode: int, n_modes: int) -> WeightedPauliSum:
    bd = jw_creation(mode, n_modes).expand()
    return bd * jw_annihilation(mode, n_modes).expand()


def spin_hamiltonian(model: FermionModel) -> WeightedPauliSum:
    """Jordan-Wigner image of the model Hamiltonian.

    The all-identity component (U/4 per repulsion pair) lands in
    ``scalar_offset``; evolution under the returned sum differs from the
    fermionic model only by a global phase.
    """
    n = model.mode_count
    h = WeightedPauliSum.identity(n, 0.0)
    for i, j, v in model.hoppings:
        bi_d = jw_creation(i, n).expand()
        bj_d = jw_creation(j, n).expand()
        bi = jw_annihilation(i, n).expand()
        bj = jw_annihilation(j, n).expand()
        h = h + (-v) * (bi_d * bj + bj_d * bi)
    for i, j, u in model.repulsions:
        h = h + u * (number_operator(i, n) * number_operator(j, n))
    if not h.is_hermitian():
        raise AssertionError("spin Hamiltonian failed Hermiticity check")
    return h
