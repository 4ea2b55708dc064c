"""Ideal projective detection of a single atom in the {|g>, |e>} basis."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ZeroProbabilityBranch
from .fock import E, G, StateVector, normalize, require_normalized

ZERO_BRANCH = 1e-15


class Outcome(enum.Enum):
    G = "g"
    E = "e"

    @property
    def level(self) -> int:
        return E if self is Outcome.E else G


@dataclass(frozen=True)
class MeasurementRecord:
    atom: int
    outcome: Outcome
    probability: float


def _check_atom(state: StateVector, atom: int) -> None:
    n = len(state.space)
    if not 0 <= atom < n:
        raise IndexError(f"subsystem index {atom} out of range for {n} subsystems")
    if not state.space.subsystems[atom].is_atom:
        raise IndexError(f"subsystem {atom} ({state.space.labels[atom]}) is not an atom")


def branch(state: StateVector, atom: int, outcome: Outcome) -> StateVector:
    """Unnormalized branch: amplitudes inconsistent with ``outcome`` zeroed."""
    _check_atom(state, atom)
    t = np.moveaxis(state.tensor(), atom, 0).copy()
    t[1 - outcome.level] = 0.0
    return StateVector(state.space, np.moveaxis(t, 0, atom).reshape(-1))


def outcome_probabilities(state: StateVector, atom: int) -> tuple[float, float]:
    """Born-rule weights ``(p_g, p_e)`` for detecting ``atom``."""
    require_normalized(state)
    _check_atom(state, atom)
    t = np.moveaxis(state.tensor(), atom, 0)
    p_e = float(np.sum(np.abs(t[E]) ** 2))
    p_g = float(np.sum(np.abs(t[G]) ** 2))
    # absorb the O(1e-16) norm defect so the pair sums to one
    total = p_g + p_e
    return p_g / total, p_e / total


def project(state: StateVector, atom: int, outcome: Outcome) -> tuple[StateVector, float]:
    """Collapse on ``outcome``; returns the renormalized state and its prior weight.

    Surviving amplitudes keep their phases.
    """
    p_g, p_e = outcome_probabilities(state, atom)
    p = p_e if outcome is Outcome.E else p_g
    if p < ZERO_BRANCH:
        raise ZeroProbabilityBranch(
            f"outcome {outcome.value} on {state.space.labels[atom]} has probability {p:.3g}",
            p,
        )
    return normalize(branch(state, atom, outcome)), p


def draw(p_e: float, rng: np.random.Generator) -> Outcome:
    """One detection event: ``E`` with probability ``p_e``."""
    return Outcome.E if rng.random() < p_e else Outcome.G


def sample(
    state: StateVector, atom: int, rng: np.random.Generator
) -> tuple[MeasurementRecord, StateVector]:
    p_g, p_e = outcome_probabilities(state, atom)
    outcome = draw(p_e, rng)
    p = p_e if outcome is Outcome.E else p_g
    if p < ZERO_BRANCH:
        raise ZeroProbabilityBranch(f"drew outcome {outcome.value} of probability {p:.3g}", p)
    collapsed = normalize(branch(state, atom, outcome))
    return MeasurementRecord(atom, outcome, p), collapsed
