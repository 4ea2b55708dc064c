"""Teleportation of ``alpha|1,0> + beta|0,1>`` from cavity modes (C, D) to (A, B).

Two atoms, each prepared excited, cross cavity 1 then cavity 2:

1. atom1 pulses mode A by ``theta1``.
2. the channel state on (C, D) is brought alongside.
3. atom1 pulses mode C by ``theta2``.
4. atom1 is detected; keep ``e``.
5. atom2 pulses mode B by ``theta1``.
6. atom2 pulses mode D by ``theta2``.
7. atom2 is detected; keep ``e``.

All work happens in the full ``[A, B, C, D, atom1, atom2]`` space. An atom
that has not entered yet sits in ``|g>`` as a placeholder and is switched to
``|e>`` when it is injected.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .dynamics import DEFAULT_LEAK_TOL, JCPulse, jc_apply
from .errors import NotNormalized, ZeroProbabilityBranch
from .fock import E, G, HilbertSpace, StateVector
from .measurement import Outcome, branch, draw, outcome_probabilities, project

A, B, C, D, ATOM1, ATOM2 = range(6)

STEPS = (
    "after_A",
    "joint_with_C2",
    "after_C",
    "collapse_e1",
    "after_B",
    "after_D",
    "collapse_e2",
)

THETA1_DEFAULT = math.pi / 4
THETA2_DEFAULT = 7 * math.pi / 4


@dataclass(frozen=True)
class ChannelParams:
    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        n2 = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if not math.isfinite(n2) or abs(n2 - 1.0) > 1e-9:
            raise NotNormalized(f"|alpha|^2 + |beta|^2 = {n2!r}, expected 1")

    @classmethod
    def normalized(cls, alpha: complex, beta: complex) -> "ChannelParams":
        n = math.hypot(abs(alpha), abs(beta))
        if n == 0:
            raise NotNormalized("alpha and beta are both zero")
        return cls(alpha / n, beta / n)


@dataclass(frozen=True)
class ProtocolConfig:
    channel: ChannelParams = field(
        default_factory=lambda: ChannelParams(1 / math.sqrt(2), 1 / math.sqrt(2))
    )
    theta1: float = THETA1_DEFAULT
    theta2: float = THETA2_DEFAULT
    mode_levels: int = fock.DEFAULT_MODE_LEVELS
    leak_tol: float = DEFAULT_LEAK_TOL
    seed: int = 0

    def __post_init__(self):
        if self.mode_levels < 3:
            raise ValueError(f"mode_levels must be >= 3, got {self.mode_levels}")
        if not self.leak_tol > 0:
            raise ValueError("leak_tol must be positive")
        if not (math.isfinite(self.theta1) and math.isfinite(self.theta2)):
            raise ValueError("pulse angles must be finite")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def replace(self, **changes) -> "ProtocolConfig":
        return dataclasses.replace(self, **changes)

    @property
    def space(self) -> HilbertSpace:
        return fock.protocol_space(self.mode_levels)


@dataclass(frozen=True)
class ProtocolResult:
    p_e1: float
    p_e2_given_e1: float
    p_joint: float
    final_state: StateVector
    fidelity: float
    snapshots: dict[str, StateVector]


@dataclass(frozen=True)
class Trial:
    """One sampled run. ``result`` is set only when both atoms read ``e``."""

    outcomes: tuple[Outcome, Outcome]
    path_probability: float
    result: ProtocolResult | None

    @property
    def success(self) -> bool:
        return self.result is not None


def _check_canonical(space: HilbertSpace) -> None:
    if space.labels != ("A", "B", "C", "D", "atom1", "atom2"):
        raise ValueError(f"expected the canonical protocol space, got {space.labels}")


def _two_mode_state(params, space, first, second, atoms) -> StateVector:
    _check_canonical(space)
    k10 = [0] * 6
    k01 = [0] * 6
    k10[first] = 1
    k01[second] = 1
    k10[ATOM1] = k01[ATOM1] = atoms[0]
    k10[ATOM2] = k01[ATOM2] = atoms[1]
    return fock.from_terms(space, [(k10, params.alpha), (k01, params.beta)])


def channel_state(
    params: ChannelParams, space: HilbertSpace, atoms: tuple[int, int] = (G, G)
) -> StateVector:
    """``alpha|1>_C|0>_D + beta|0>_C|1>_D`` with A, B empty."""
    return _two_mode_state(params, space, C, D, atoms)


def target_state(
    params: ChannelParams, space: HilbertSpace, atoms: tuple[int, int] = (G, G)
) -> StateVector:
    """``alpha|1>_A|0>_B + beta|0>_A|1>_B`` with C, D empty."""
    return _two_mode_state(params, space, A, B, atoms)


def _first_atom(config: ProtocolConfig) -> dict[str, StateVector]:
    """Steps 1-3: everything before the first detection."""
    space = config.space
    snaps = {}
    s = fock.ket_state(space, (0, 0, 0, 0, E, G))
    s = jc_apply(s, JCPulse(ATOM1, A, config.theta1), config.leak_tol)
    snaps["after_A"] = s
    s = fock.combine(s, channel_state(config.channel, space), (A, B, ATOM1))
    snaps["joint_with_C2"] = s
    snaps["after_C"] = jc_apply(s, JCPulse(ATOM1, C, config.theta2), config.leak_tol)
    return snaps


def _second_atom(collapsed: StateVector, config: ProtocolConfig) -> dict[str, StateVector]:
    """Steps 5-6, starting from the state after atom1 was detected."""
    s = fock.set_level(collapsed, ATOM2, E)
    s = jc_apply(s, JCPulse(ATOM2, B, config.theta1), config.leak_tol)
    after_b = s
    s = jc_apply(s, JCPulse(ATOM2, D, config.theta2), config.leak_tol)
    return {"after_B": after_b, "after_D": s}


def _finish(config, snaps, p1, p2) -> ProtocolResult:
    final = snaps["collapse_e2"]
    target = target_state(config.channel, final.space, atoms=(E, E))
    return ProtocolResult(
        p_e1=p1,
        p_e2_given_e1=p2,
        p_joint=p1 * p2,
        final_state=final,
        fidelity=fock.fidelity(target, final),
        snapshots=snaps,
    )


def run_postselected(config: ProtocolConfig | None = None) -> ProtocolResult:
    """Run the protocol keeping only the ``(e, e)`` detection branch.

    Raises ZeroProbabilityBranch (carrying the joint path probability) when
    that branch is empty, e.g. ``cos(theta2) = 0``.
    """
    config = config or ProtocolConfig()
    snaps = _first_atom(config)
    snaps["collapse_e1"], p1 = project(snaps["after_C"], ATOM1, Outcome.E)
    snaps.update(_second_atom(snaps["collapse_e1"], config))
    try:
        snaps["collapse_e2"], p2 = project(snaps["after_D"], ATOM2, Outcome.E)
    except ZeroProbabilityBranch as exc:
        raise ZeroProbabilityBranch(str(exc), p1 * exc.probability) from None
    return _finish(config, snaps, p1, p2)


def run_sampled(config: ProtocolConfig, rng: np.random.Generator) -> Trial:
    """Run the protocol with both detections drawn from ``rng``.

    Atom2 is sent through regardless of atom1's reading; a failed trial
    reports the outcome pair and the probability of that path.
    """
    snaps = _first_atom(config)
    p_e = outcome_probabilities(snaps["after_C"], ATOM1)[1]
    o1 = draw(p_e, rng)
    collapsed, p1 = project(snaps["after_C"], ATOM1, o1)
    snaps["collapse_e1"] = collapsed
    snaps.update(_second_atom(collapsed, config))
    p_e = outcome_probabilities(snaps["after_D"], ATOM2)[1]
    o2 = draw(p_e, rng)
    snaps["collapse_e2"], p2 = project(snaps["after_D"], ATOM2, o2)
    if o1 is Outcome.E and o2 is Outcome.E:
        return Trial((o1, o2), p1 * p2, _finish(config, snaps, p1, p2))
    return Trial((o1, o2), p1 * p2, None)


@dataclass(frozen=True)
class BranchTree:
    """Detection probabilities of every path: ``p_e1`` and ``p_e2`` given atom1's reading."""

    p_e1: float
    p_e2_given: dict[Outcome, float]


def branch_tree(config: ProtocolConfig) -> BranchTree:
    after_c = _first_atom(config)["after_C"]
    p_g1, p_e1 = outcome_probabilities(after_c, ATOM1)
    p_e2 = {}
    for o, p in ((Outcome.G, p_g1), (Outcome.E, p_e1)):
        if p < 1e-15:
            # unreachable path; draw() will never select it
            p_e2[o] = 0.0
            continue
        collapsed = fock.normalize(branch(after_c, ATOM1, o))
        p_e2[o] = outcome_probabilities(_second_atom(collapsed, config)["after_D"], ATOM2)[1]
    return BranchTree(p_e1, p_e2)


def _require_quarter_pulse(config: ProtocolConfig) -> None:
    if abs(config.theta1 - math.pi / 4) > 1e-12:
        raise ValueError("closed-form states assume theta1 = pi/4")


def closed_form_state(step: str, config: ProtocolConfig | None = None) -> StateVector:
    """Hand-derived state after ``step``, term by term, for ``theta1 = pi/4``.

    ``after_B`` and ``after_D`` omit the pulse factor ``1/sqrt(2)`` and the
    first normalization constant, so they are unnormalized; the two
    ``collapse_*`` states are normalized.
    """
    config = config or ProtocolConfig()
    _require_quarter_pulse(config)
    space = config.space
    al, be = config.channel.alpha, config.channel.beta
    th = config.theta2
    c, s = math.cos(th), math.sin(th)
    c2, s2 = math.cos(math.sqrt(2) * th), math.sin(math.sqrt(2) * th)
    r = 1 / math.sqrt(2)

    # kets are (A, B, C, D, atom1, atom2)
    if step == "after_A":
        terms = [((0, 0, 0, 0, E, G), r), ((1, 0, 0, 0, G, G), -1j * r)]
    elif step == "joint_with_C2":
        terms = [
            ((0, 0, 1, 0, E, G), r * al),
            ((0, 0, 0, 1, E, G), r * be),
            ((1, 0, 1, 0, G, G), -1j * r * al),
            ((1, 0, 0, 1, G, G), -1j * r * be),
        ]
    elif step == "after_C":
        terms = [
            ((0, 0, 1, 0, E, G), al * r * c2),
            ((0, 0, 2, 0, G, G), -1j * al * r * s2),
            ((1, 0, 1, 0, G, G), -1j * al * r * c),
            ((1, 0, 0, 0, E, G), -al * r * s),
            ((0, 0, 0, 1, E, G), be * r * c),
            ((0, 0, 1, 1, G, G), -1j * be * r * s),
            ((1, 0, 0, 1, G, G), -1j * be * r),
        ]
    elif step == "collapse_e1":
        terms = [
            ((0, 0, 1, 0, E, G), al * c2),
            ((1, 0, 0, 0, E, G), -al * s),
            ((0, 0, 0, 1, E, G), be * c),
        ]
    elif step == "after_B":
        terms = [
            ((0, 0, 1, 0, E, E), al * c2),
            ((0, 1, 1, 0, E, G), -1j * al * c2),
            ((1, 0, 0, 0, E, E), -al * s),
            ((1, 1, 0, 0, E, G), 1j * al * s),
            ((0, 0, 0, 1, E, E), be * c),
            ((0, 1, 0, 1, E, G), -1j * be * c),
        ]
    elif step == "after_D":
        terms = [
            ((0, 0, 1, 0, E, E), al * c2 * c),
            ((0, 0, 1, 1, E, G), -1j * al * c2 * s),
            ((0, 1, 1, 0, E, G), -1j * al * c2),
            ((1, 0, 0, 1, E, G), 1j * al * s**2),
            ((1, 1, 0, 0, E, G), 1j * al * s),
            ((1, 0, 0, 0, E, E), -al * s * c),
            ((0, 0, 0, 1, E, E), be * c * c2),
            ((0, 0, 0, 2, E, G), -1j * be * c * s2),
            ((0, 1, 0, 1, E, G), -1j * be * c**2),
            ((0, 1, 0, 0, E, E), -be * c * s),
        ]
    elif step == "collapse_e2":
        terms = [
            ((0, 0, 1, 0, E, E), al * c2 * c),
            ((0, 0, 0, 1, E, E), be * c * c2),
            ((0, 1, 0, 0, E, E), -be * c * s),
            ((1, 0, 0, 0, E, E), -al * s * c),
        ]
    else:
        raise KeyError(f"unknown step {step!r}; expected one of {STEPS}")

    state = fock.from_terms(space, terms)
    if step.startswith("collapse"):
        state = fock.normalize(state)
    return state

