"""Tensor-product Hilbert spaces of truncated bosonic modes and two-level atoms.

Basis kets are indexed mixed-radix with the first subsystem as the most
significant digit, so ``|n_A n_B n_C n_D, s1 s2>`` reads left to right as
the index. Atom levels are ``G = 0`` and ``E = 1``.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    InvalidSubsystem,
    NotNormalized,
    OutOfRange,
    SpaceMismatch,
    ZeroNorm,
)

G = 0
E = 1

NORM_TOL = 1e-9
ZERO_NORM = 1e-15
DEFAULT_MODE_LEVELS = 4


class Kind(enum.Enum):
    MODE = "mode"
    ATOM = "atom"


@dataclass(frozen=True)
class Subsystem:
    kind: Kind
    levels: int
    label: str

    @classmethod
    def mode(cls, label: str, levels: int = DEFAULT_MODE_LEVELS) -> "Subsystem":
        return cls(Kind.MODE, levels, label)

    @classmethod
    def atom(cls, label: str) -> "Subsystem":
        return cls(Kind.ATOM, 2, label)

    @property
    def is_atom(self) -> bool:
        return self.kind is Kind.ATOM

    @property
    def is_mode(self) -> bool:
        return self.kind is Kind.MODE


@dataclass(frozen=True)
class HilbertSpace:
    subsystems: tuple[Subsystem, ...]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.levels for s in self.subsystems)

    @cached_property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems)

    def index_of(self, label: str) -> int:
        """Position of the subsystem called ``label``."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no subsystem labelled {label!r}") from None

    def __len__(self) -> int:
        return len(self.subsystems)


def make_space(subsystems: Iterable[Subsystem]) -> HilbertSpace:
    subs = tuple(subsystems)
    if not subs:
        raise InvalidSubsystem("a Hilbert space needs at least one subsystem")
    for s in subs:
        if s.kind is Kind.ATOM and s.levels != 2:
            raise InvalidSubsystem(f"atom {s.label!r} must have 2 levels, got {s.levels}")
        if s.kind is Kind.MODE and s.levels < 3:
            raise InvalidSubsystem(f"mode {s.label!r} needs >= 3 levels, got {s.levels}")
    labels = [s.label for s in subs]
    if len(set(labels)) != len(labels):
        raise InvalidSubsystem(f"duplicate subsystem labels in {labels}")
    return HilbertSpace(subs)


def protocol_space(mode_levels: int = DEFAULT_MODE_LEVELS) -> HilbertSpace:
    """Canonical space ``[A, B, C, D, atom1, atom2]``."""
    modes = [Subsystem.mode(x, mode_levels) for x in "ABCD"]
    return make_space(modes + [Subsystem.atom("atom1"), Subsystem.atom("atom2")])


def _check_ket(space: HilbertSpace, ket: Sequence[int]) -> tuple[int, ...]:
    ket = tuple(int(k) for k in ket)
    if len(ket) != len(space):
        raise OutOfRange(f"ket has {len(ket)} entries, space has {len(space)} subsystems")
    for k, s in zip(ket, space.subsystems):
        if not 0 <= k < s.levels:
            raise OutOfRange(f"occupation {k} outside [0, {s.levels}) for {s.label!r}")
    return ket


def basis_index(space: HilbertSpace, ket: Sequence[int]) -> int:
    ket = _check_ket(space, ket)
    return int(np.ravel_multi_index(ket, space.dims))


def basis_ket(space: HilbertSpace, index: int) -> tuple[int, ...]:
    if not 0 <= index < space.dim:
        raise OutOfRange(f"index {index} outside [0, {space.dim})")
    return tuple(int(k) for k in np.unravel_index(index, space.dims))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Dense amplitudes over ``space``; not necessarily normalized."""

    space: HilbertSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape != (self.space.dim,):
            raise SpaceMismatch(
                f"expected {self.space.dim} amplitudes, got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem (read-only view)."""
        return self.amplitudes.reshape(self.space.dims)

    def amplitude(self, ket: Sequence[int]) -> complex:
        return complex(self.amplitudes[basis_index(self.space, ket)])

    def __add__(self, other: "StateVector") -> "StateVector":
        return add_scaled(self, 1.0, other)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return add_scaled(self, -1.0, other)

    def __mul__(self, c: complex) -> "StateVector":
        return StateVector(self.space, c * self.amplitudes)

    __rmul__ = __mul__


def zero_state(space: HilbertSpace) -> StateVector:
    return StateVector(space, np.zeros(space.dim, dtype=np.complex128))


def ket_state(space: HilbertSpace, ket: Sequence[int]) -> StateVector:
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[basis_index(space, ket)] = 1.0
    return StateVector(space, amps)


def from_terms(space: HilbertSpace, terms: Mapping[Sequence[int], complex] | Iterable) -> StateVector:
    """Build an (unnormalized) state from ``ket -> amplitude`` pairs.

    Repeated kets accumulate.
    """
    items = terms.items() if isinstance(terms, Mapping) else terms
    amps = np.zeros(space.dim, dtype=np.complex128)
    for ket, c in items:
        amps[basis_index(space, ket)] += c
    return StateVector(space, amps)


def _same_space(a: StateVector, b: StateVector) -> None:
    if a.space != b.space:
        raise SpaceMismatch(f"{a.space.labels} vs {b.space.labels}")


def add_scaled(a: StateVector, c: complex, b: StateVector) -> StateVector:
    _same_space(a, b)
    return StateVector(a.space, a.amplitudes + c * b.amplitudes)


def inner(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _same_space(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def norm(a: StateVector) -> float:
    return float(np.sqrt(inner(a, a).real))


def normalize(a: StateVector) -> StateVector:
    n = norm(a)
    if n <= ZERO_NORM:
        raise ZeroNorm(f"cannot normalize a state of norm {n:.3g}")
    return StateVector(a.space, a.amplitudes / n)


def require_normalized(a: StateVector, tol: float = NORM_TOL) -> None:
    n = norm(a)
    if abs(n - 1.0) > tol:
        raise NotNormalized(f"state norm is {n!r}, expected 1 within {tol:g}")


def fidelity(a: StateVector, b: StateVector) -> float:
    """Overlap probability ``|<a|b>|^2`` of two normalized states."""
    _same_space(a, b)
    require_normalized(a)
    require_normalized(b)
    return abs(inner(a, b)) ** 2


def combine(a: StateVector, b: StateVector, a_subsystems: Iterable[int]) -> StateVector:
    """Tensor two states living on complementary subsystem sets.

    ``a`` must hold level 0 on every subsystem outside ``a_subsystems`` and
    ``b`` must hold level 0 on every subsystem inside it (subsystems in
    neither role are at level 0 in both). The result carries ``a``'s factor
    on ``a_subsystems`` and ``b``'s factor elsewhere.
    """
    _same_space(a, b)
    space = a.space
    inside = sorted(set(int(i) for i in a_subsystems))
    outside = [i for i in range(len(space)) if i not in inside]
    dims = space.dims

    ta = np.moveaxis(a.tensor(), inside + outside, range(len(space)))
    tb = np.moveaxis(b.tensor(), inside + outside, range(len(space)))
    din = int(np.prod([dims[i] for i in inside]))
    ta = ta.reshape(din, -1)
    tb = tb.reshape(din, -1)

    a_factor = ta[:, 0]
    b_factor = tb[0, :]
    if np.linalg.norm(ta[:, 1:]) > 1e-12 * max(1.0, np.linalg.norm(ta)):
        raise ValueError("first state is not vacuum outside its subsystems")
    if np.linalg.norm(tb[1:, :]) > 1e-12 * max(1.0, np.linalg.norm(tb)):
        raise ValueError("second state is not vacuum on the first state's subsystems")

    out = np.outer(a_factor, b_factor).reshape(
        [dims[i] for i in inside] + [dims[i] for i in outside]
    )
    out = np.moveaxis(out, range(len(space)), inside + outside)
    return StateVector(space, out.reshape(-1))


def set_level(state: StateVector, subsystem: int, level: int, tol: float = 1e-12) -> StateVector:
    """Re-prepare a subsystem that sits in one definite level into ``level``.

    Used to inject a freshly prepared atom whose slot held a placeholder.
    Raises ``ValueError`` if the subsystem is not in a definite level.
    """
    t = state.tensor()
    levels = state.space.subsystems[subsystem].levels
    if not 0 <= level < levels:
        raise OutOfRange(f"level {level} outside [0, {levels})")
    weights = np.sum(np.abs(np.moveaxis(t, subsystem, 0).reshape(levels, -1)) ** 2, axis=1)
    current = int(np.argmax(weights))
    if weights.sum() - weights[current] > tol * max(weights.sum(), 1.0):
        raise ValueError(f"subsystem {subsystem} is not in a definite level")
    moved = np.moveaxis(t, subsystem, 0)
    out = np.zeros_like(moved)
    out[level] = moved[current]
    return StateVector(state.space, np.moveaxis(out, 0, subsystem).reshape(-1))


def fix_global_phase(state: StateVector, tol: float = 1e-12) -> StateVector:
    """Rotate so the lowest-index amplitude above ``tol`` is real positive."""
    amps = state.amplitudes
    nz = np.flatnonzero(np.abs(amps) > tol)
    if nz.size == 0:
        return state
    a0 = amps[nz[0]]
    return StateVector(state.space, amps * (abs(a0) / a0))


def max_abs_diff(a: StateVector, b: StateVector) -> float:
    _same_space(a, b)
    return float(np.max(np.abs(a.amplitudes - b.amplitudes)))


def population(state: StateVector, mask: np.ndarray) -> float:
    """Total squared amplitude on kets selected by a boolean tensor mask."""
    return float(np.sum(np.abs(state.tensor()[mask]) ** 2))
