"""Resonant Jaynes-Cummings evolution of one atom with one cavity mode.

Units are hbar = g = 1, so a pulse is fully described by the Rabi angle
``theta = g * t``. Evolution is ``exp(-i theta H)`` with
``H = sigma_minus a_dag + sigma_plus a``; inside each doublet
``{|e, n>, |g, n+1>}`` this is a rotation by ``sqrt(n + 1) * theta``.

``jc_apply`` is the fast closed form used by the protocol.
``jc_hamiltonian`` + ``propagator_expm`` build the same evolution as a dense
matrix exponential and serve as an independent check on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotHermitian, TruncationLeakage
from .fock import E, G, HilbertSpace, StateVector, basis_index, basis_ket

DEFAULT_LEAK_TOL = 1e-12


@dataclass(frozen=True)
class JCPulse:
    atom: int
    mode: int
    theta: float

    def __post_init__(self):
        if self.atom == self.mode:
            raise ValueError("atom and mode must be different subsystems")
        if not math.isfinite(self.theta):
            raise ValueError(f"pulse angle must be finite, got {self.theta}")


def _check_pair(space: HilbertSpace, atom: int, mode: int) -> None:
    n = len(space)
    for idx in (atom, mode):
        if not 0 <= idx < n:
            raise IndexError(f"subsystem index {idx} out of range for {n} subsystems")
    if atom == mode:
        raise IndexError("atom and mode indices coincide")
    if not space.subsystems[atom].is_atom:
        raise IndexError(f"subsystem {atom} ({space.labels[atom]}) is not an atom")
    if not space.subsystems[mode].is_mode:
        raise IndexError(f"subsystem {mode} ({space.labels[mode]}) is not a mode")


def leakage(state: StateVector, atom: int, mode: int) -> float:
    """Population on kets with the atom excited and the mode at its top level."""
    top = state.space.subsystems[mode].levels - 1
    t = np.moveaxis(state.tensor(), (atom, mode), (0, 1))
    return float(np.sum(np.abs(t[E, top]) ** 2))


def jc_apply(
    state: StateVector, pulse: JCPulse, leak_tol: float = DEFAULT_LEAK_TOL
) -> StateVector:
    """Apply one resonant pulse in closed form, doublet by doublet.

    Raises TruncationLeakage when the population on ``|e, top>`` is not
    below ``leak_tol``; the true evolution would leave the truncated space
    from there. Pass ``leak_tol=math.inf`` to evolve under the truncated
    Hamiltonian instead, which leaves ``|e, top>`` untouched.
    """
    space = state.space
    _check_pair(space, pulse.atom, pulse.mode)
    leaked = leakage(state, pulse.atom, pulse.mode)
    if not leaked < leak_tol:
        raise TruncationLeakage(
            f"population {leaked:.3g} on |e, n_max> of "
            f"({space.labels[pulse.atom]}, {space.labels[pulse.mode]}) "
            f"exceeds leak_tol={leak_tol:g}",
            leaked,
        )

    levels = space.subsystems[pulse.mode].levels
    t = np.moveaxis(state.tensor(), (pulse.atom, pulse.mode), (0, 1)).copy()
    for n in range(levels - 1):
        angle = math.sqrt(n + 1) * pulse.theta
        c, s = math.cos(angle), math.sin(angle)
        e_n = t[E, n].copy()
        g_n1 = t[G, n + 1].copy()
        t[E, n] = c * e_n - 1j * s * g_n1
        t[G, n + 1] = c * g_n1 - 1j * s * e_n
    out = np.moveaxis(t, (0, 1), (pulse.atom, pulse.mode))
    return StateVector(space, out.reshape(-1))


def jc_hamiltonian(space: HilbertSpace, atom: int, mode: int) -> np.ndarray:
    """Dense ``sigma_minus a_dag + sigma_plus a`` on ``space`` (hbar = g = 1).

    Built by enumerating basis kets, independently of ``jc_apply``.
    """
    _check_pair(space, atom, mode)
    top = space.subsystems[mode].levels - 1
    h = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for i in range(space.dim):
        ket = basis_ket(space, i)
        if ket[atom] != E or ket[mode] >= top:
            continue
        n = ket[mode]
        partner = list(ket)
        partner[atom] = G
        partner[mode] = n + 1
        j = basis_index(space, partner)
        h[i, j] = h[j, i] = math.sqrt(n + 1)
    return h


def _one_norm(a: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(a), axis=0))) if a.size else 0.0


def propagator_expm(
    h: np.ndarray, theta: float, tol: float = 1e-12, max_terms: int = 200
) -> np.ndarray:
    """``exp(-i theta h)`` by scaled Taylor series and repeated squaring.

    The exponent is scaled by ``2**-s`` until its 1-norm is at most 0.5; the
    series is summed until a term's 1-norm drops below ``tol / 10``.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > 1e-12:
        raise NotHermitian("matrix is not Hermitian within 1e-12")

    a = -1j * theta * h
    anorm = _one_norm(a)
    s = 0 if anorm <= 0.5 else int(math.ceil(math.log2(anorm / 0.5)))
    a = a / 2.0**s

    u = np.eye(h.shape[0], dtype=np.complex128)
    term = u.copy()
    for k in range(1, max_terms + 1):
        term = term @ a / k
        u += term
        if _one_norm(term) < tol / 10:
            break
    else:
        raise NoConvergence(f"Taylor series did not converge in {max_terms} terms")

    for _ in range(s):
        u = u @ u
    return u


def apply_matrix(u: np.ndarray, state: StateVector) -> StateVector:
    return StateVector(state.space, u @ state.amplitudes)
