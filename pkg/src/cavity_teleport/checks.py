"""Self-consistency checks run by ``cavity-teleport check``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .analysis import fidelity_formula
from .dynamics import JCPulse, apply_matrix, jc_apply, jc_hamiltonian, propagator_expm
from .protocol import STEPS, ChannelParams, ProtocolConfig, closed_form_state, run_postselected


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_channel(rng: np.random.Generator) -> ChannelParams:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return ChannelParams.normalized(v[0], v[1])


def random_theta2(rng: np.random.Generator, min_cos2: float = 1e-3) -> float:
    """Uniform angle in [0, 2 pi] away from the empty-branch points ``cos = 0``."""
    while True:
        t = float(rng.uniform(0, 2 * math.pi))
        if math.cos(t) ** 2 > min_cos2:
            return t


def snapshot_errors(config: ProtocolConfig) -> dict[str, float]:
    """Per-step max amplitude gap between simulation and the closed forms.

    Both sides are normalized and phase-fixed before comparison.
    """
    res = run_postselected(config)
    out = {}
    for step in STEPS:
        sim = fock.fix_global_phase(fock.normalize(res.snapshots[step]))
        ref = fock.fix_global_phase(fock.normalize(closed_form_state(step, config)))
        out[step] = fock.max_abs_diff(sim, ref)
    return out


def check_snapshots(draws: int = 50, seed: int = 1, tol: float = 1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        cfg = ProtocolConfig(channel=random_channel(rng), theta2=random_theta2(rng))
        worst = max(worst, max(snapshot_errors(cfg).values()))
    return CheckResult("snapshots_vs_closed_form", worst <= tol, f"max error {worst:.3g} (tol {tol:g})")


def check_fidelity_identity(draws: int = 50, seed: int = 2, tol: float = 1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        t = random_theta2(rng)
        f = run_postselected(ProtocolConfig(channel=random_channel(rng), theta2=t)).fidelity
        worst = max(worst, abs(f - fidelity_formula(t)))
    return CheckResult("fidelity_identity", worst <= tol, f"max error {worst:.3g} (tol {tol:g})")


def check_expm_oracle(draws: int = 20, seed: int = 3, tol: float = 1e-10) -> CheckResult:
    rng = np.random.default_rng(seed)
    space = fock.make_space(
        [fock.Subsystem.mode("A", 4), fock.Subsystem.mode("C", 3), fock.Subsystem.atom("atom1")]
    )
    worst = unitarity = 0.0
    for _ in range(draws):
        mode = int(rng.integers(0, 2))
        theta = float(rng.uniform(0, 4 * math.pi))
        v = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
        psi = fock.normalize(fock.StateVector(space, v))
        pulse = JCPulse(2, mode, theta)
        u = propagator_expm(jc_hamiltonian(space, 2, mode), theta)
        got = jc_apply(psi, pulse, leak_tol=math.inf)
        worst = max(worst, fock.max_abs_diff(got, apply_matrix(u, psi)))
        unitarity = max(unitarity, float(np.max(np.abs(u.conj().T @ u - np.eye(space.dim)))))
    ok = worst <= tol and unitarity <= 1e-12
    return CheckResult(
        "expm_oracle", ok, f"max error {worst:.3g} (tol {tol:g}), unitarity {unitarity:.3g}"
    )


def run_all() -> list[CheckResult]:
    return [check_snapshots(), check_expm_oracle(), check_fidelity_identity()]
