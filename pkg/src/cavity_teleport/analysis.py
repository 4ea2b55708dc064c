"""Sweeps, optimization and statistics over the second pulse angle."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAngle, InvalidRange, NonPositiveCoupling, ZeroProbabilityBranch
from .measurement import Outcome, draw
from .protocol import ChannelParams, ProtocolConfig, branch_tree, run_postselected
from .rng import trial_rng

INV_PHI = (math.sqrt(5) - 1) / 2
DECOHERENCE_BOUND = 1e-2


def fidelity_formula(theta2: float) -> float:
    """``sin^2(t) / (cos^2(sqrt(2) t) + sin^2(t))`` for ``t = theta2``."""
    s = math.sin(theta2)
    c2 = math.cos(math.sqrt(2) * theta2)
    den = c2 * c2 + s * s
    if den <= 1e-15:
        raise DegenerateAngle(f"fidelity denominator {den:.3g} at theta2={theta2!r}")
    return s * s / den


def joint_probability_formula(theta2: float) -> float:
    """Weight of the (e, e) detection branch, independent of the channel coefficients."""
    c = math.cos(theta2)
    s = math.sin(theta2)
    c2 = math.cos(math.sqrt(2) * theta2)
    return 0.25 * c * c * (c2 * c2 + s * s)


@dataclass(frozen=True)
class SweepRow:
    theta2: float
    fidelity_formula: float
    fidelity_sim: float | None  # None where the (e, e) branch is empty
    p_joint: float
    cos_sqrt2_theta2: float


def _config(params: ChannelParams | ProtocolConfig | None) -> ProtocolConfig:
    if params is None:
        return ProtocolConfig()
    if isinstance(params, ProtocolConfig):
        return params
    return ProtocolConfig(channel=params)


def _simulated_fidelity(config: ProtocolConfig, theta2: float) -> float | None:
    try:
        return run_postselected(config.replace(theta2=theta2)).fidelity
    except ZeroProbabilityBranch:
        return None


def sweep(
    theta2_min: float,
    theta2_max: float,
    steps: int,
    params: ChannelParams | ProtocolConfig | None = None,
) -> list[SweepRow]:
    if steps < 2:
        raise InvalidRange(f"need at least 2 steps, got {steps}")
    if not (math.isfinite(theta2_min) and math.isfinite(theta2_max)):
        raise InvalidRange("sweep bounds must be finite")
    config = _config(params)
    rows = []
    for t in np.linspace(theta2_min, theta2_max, steps):
        t = float(t)
        try:
            res = run_postselected(config.replace(theta2=t))
            f_sim, p_joint = res.fidelity, res.p_joint
        except ZeroProbabilityBranch as exc:
            f_sim, p_joint = None, exc.probability
        rows.append(
            SweepRow(
                theta2=t,
                fidelity_formula=fidelity_formula(t),
                fidelity_sim=f_sim,
                p_joint=p_joint,
                cos_sqrt2_theta2=math.cos(math.sqrt(2) * t),
            )
        )
    return rows


def golden_section_max(f, a: float, b: float, tol: float = 1e-9) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[a, b]`` until the bracket is below ``tol``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def optimize_theta2(
    theta2_min: float,
    theta2_max: float,
    params: ChannelParams | ProtocolConfig | None = None,
    grid: int = 1000,
    tol: float = 1e-9,
) -> tuple[float, float]:
    """Angle in the range maximizing the simulated post-selected fidelity.

    A uniform grid picks the best cell, then golden-section search refines
    inside its two neighbouring cells. The refined point is kept only if it
    does not lose to the best grid point.
    """
    if not (math.isfinite(theta2_min) and math.isfinite(theta2_max)) or theta2_max < theta2_min:
        raise InvalidRange(f"invalid range [{theta2_min}, {theta2_max}]")
    config = _config(params)

    def f(t: float) -> float:
        v = _simulated_fidelity(config, t)
        return -math.inf if v is None else v

    if theta2_max == theta2_min:
        return theta2_min, f(theta2_min)

    ts = np.linspace(theta2_min, theta2_max, max(grid, 2))
    vals = [f(float(t)) for t in ts]
    k = int(np.argmax(vals))
    best_t, best_f = float(ts[k]), vals[k]
    if best_f == -math.inf:
        raise ZeroProbabilityBranch("post-selected branch is empty over the whole range", 0.0)

    lo = float(ts[max(k - 1, 0)])
    hi = float(ts[min(k + 1, len(ts) - 1)])
    t_star, f_star = golden_section_max(f, lo, hi, tol)
    if f_star < best_f:
        return best_t, best_f
    return t_star, f_star


@dataclass(frozen=True)
class MonteCarloResult:
    trials: int
    successes: int
    success_rate: float
    stderr: float
    fidelity_of_successes: float | None
    failures_by_outcome: dict[str, int]


def _label(o1: Outcome, o2: Outcome) -> str:
    return o1.value + o2.value


def _run_chunk(tree, base_seed: int, start: int, stop: int) -> Counter:
    counts: Counter = Counter()
    for i in range(start, stop):
        rng = trial_rng(base_seed, i)
        o1 = draw(tree.p_e1, rng)
        o2 = draw(tree.p_e2_given[o1], rng)
        counts[_label(o1, o2)] += 1
    return counts


def sample_outcomes(config: ProtocolConfig, trials: int, base_seed: int) -> list[tuple[Outcome, Outcome]]:
    """Per-trial outcome pairs, in trial order; used for audit and tests."""
    tree = branch_tree(config)
    out = []
    for i in range(trials):
        rng = trial_rng(base_seed, i)
        o1 = draw(tree.p_e1, rng)
        out.append((o1, draw(tree.p_e2_given[o1], rng)))
    return out


def monte_carlo(
    config: ProtocolConfig | None = None,
    trials: int = 100_000,
    base_seed: int | None = None,
    chunk_size: int | None = None,
    workers: int = 1,
) -> MonteCarloResult:
    """Repeat the sampled protocol ``trials`` times.

    Trial ``i`` draws from ``trial_rng(base_seed, i)`` exactly as
    ``run_sampled`` would, but detection probabilities are computed once up
    front, since the state on each path is deterministic. Counts do not
    depend on ``chunk_size`` or ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    config = config or ProtocolConfig()
    seed = config.seed if base_seed is None else base_seed
    tree = branch_tree(config)

    chunk = chunk_size or trials
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _run_chunk(tree, seed, *b), bounds))
    else:
        parts = [_run_chunk(tree, seed, *b) for b in bounds]
    counts: Counter = sum(parts, Counter())

    successes = counts.get("ee", 0)
    rate = successes / trials
    fid = run_postselected(config).fidelity if successes else None
    failures = {k: counts.get(k, 0) for k in ("gg", "ge", "eg")}
    return MonteCarloResult(
        trials=trials,
        successes=successes,
        success_rate=rate,
        stderr=math.sqrt(rate * (1 - rate) / trials),
        fidelity_of_successes=fid,
        failures_by_outcome=failures,
    )


@dataclass(frozen=True)
class TimingBudget:
    g: float
    theta1: float
    theta2: float
    pulse_durations: tuple[float, float]
    transit_time: float
    total_time: float
    decoherence_bound: float
    within_bound: bool


def timing_budget(
    g: float,
    theta1: float = math.pi / 4,
    theta2: float = 7 * math.pi / 4,
    transit_time: float = 0.0,
    bound: float = DECOHERENCE_BOUND,
) -> TimingBudget:
    """Wall-clock length of the protocol for a coupling rate ``g`` in 1/s.

    Each atom gets one ``theta1`` and one ``theta2`` pulse; ``transit_time``
    is added as given.
    """
    if not g > 0:
        raise NonPositiveCoupling(f"coupling g must be positive, got {g}")
    if theta1 < 0 or theta2 < 0 or transit_time < 0 or bound < 0:
        raise ValueError("angles, transit time and bound must be non-negative")
    t1, t2 = theta1 / g, theta2 / g
    total = (2 * theta1 + 2 * theta2) / g + transit_time
    return TimingBudget(
        g=g,
        theta1=theta1,
        theta2=theta2,
        pulse_durations=(t1, t2),
        transit_time=transit_time,
        total_time=total,
        decoherence_bound=bound,
        within_bound=total < bound,
    )
