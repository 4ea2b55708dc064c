import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavity_teleport import fock
from cavity_teleport.dynamics import (
    JCPulse,
    apply_matrix,
    jc_apply,
    jc_hamiltonian,
    propagator_expm,
)
from cavity_teleport.errors import NotHermitian, TruncationLeakage
from cavity_teleport.fock import E, G, Subsystem

R2 = 1 / math.sqrt(2)


@pytest.fixture
def pair():
    """Mode(4) + atom: kets are (n, s)."""
    return fock.make_space([Subsystem.mode("A", 4), Subsystem.atom("q")])


def safe_random_state(space, atom, mode, rng):
    """Random normalized state with nothing on |e, top> of the pulsed pair."""
    v = (rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)).reshape(space.dims)
    top = space.dims[mode] - 1
    idx = [slice(None)] * len(space)
    idx[atom], idx[mode] = E, top
    v[tuple(idx)] = 0
    return fock.normalize(fock.StateVector(space, v.reshape(-1)))


def test_vacuum_quarter_pulse(pair):
    out = jc_apply(fock.ket_state(pair, (0, E)), JCPulse(1, 0, math.pi / 4))
    want = fock.from_terms(pair, {(0, E): R2, (1, G): -1j * R2})
    assert fock.max_abs_diff(out, want) < 1e-15


@pytest.mark.parametrize("theta", [0.1, 1.0, math.pi, -2.5])
def test_ground_vacuum_is_dark(pair, theta):
    s = fock.ket_state(pair, (0, G))
    out = jc_apply(s, JCPulse(1, 0, theta))
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


def test_one_photon_seven_quarter_pulse(pair):
    theta = 7 * math.pi / 4
    out = jc_apply(fock.ket_state(pair, (1, E)), JCPulse(1, 0, theta))
    c = math.cos(math.sqrt(2) * theta)
    assert c == pytest.approx(0.0789, abs=1e-3)
    assert out.amplitude((1, E)) == pytest.approx(c, abs=1e-15)
    assert out.amplitude((2, G)) == pytest.approx(-1j * math.sin(math.sqrt(2) * theta), abs=1e-15)


def test_inverse_pulse(pair):
    rng = np.random.default_rng(0)
    s = safe_random_state(pair, 1, 0, rng)
    back = jc_apply(jc_apply(s, JCPulse(1, 0, 0.77)), JCPulse(1, 0, -0.77))
    assert fock.max_abs_diff(back, s) < 1e-12


def test_leakage_guard(pair):
    s = fock.ket_state(pair, (3, E))
    with pytest.raises(TruncationLeakage) as info:
        jc_apply(s, JCPulse(1, 0, 0.3))
    assert info.value.population == pytest.approx(1)
    # truncated-Hamiltonian semantics when the guard is disabled
    out = jc_apply(s, JCPulse(1, 0, 0.3), leak_tol=math.inf)
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


def test_bad_indices(pair):
    s = fock.ket_state(pair, (0, E))
    with pytest.raises(IndexError):
        jc_apply(s, JCPulse(0, 1, 0.1))  # roles swapped
    with pytest.raises(IndexError):
        jc_apply(s, JCPulse(1, 5, 0.1))
    with pytest.raises(IndexError):
        jc_hamiltonian(pair, 0, 1)


class TestHamiltonian:
    def test_single_doublet(self):
        # the smallest mode allowed has 3 levels; restrict to n <= 1 by hand
        space = fock.make_space([Subsystem.mode("A", 3), Subsystem.atom("q")])
        h = jc_hamiltonian(space, 1, 0)
        i = fock.basis_index(space, (0, E))
        j = fock.basis_index(space, (1, G))
        assert h[i, j] == h[j, i] == 1
        sub = h[np.ix_([0, 1, 2, 3], [0, 1, 2, 3])]
        assert np.count_nonzero(sub) == 2

    def test_hermitian(self):
        space = fock.protocol_space(3)
        h = jc_hamiltonian(space, 4, 2)
        np.testing.assert_array_equal(h, h.conj().T)

    def test_entry_magnitudes(self, pair):
        h = jc_hamiltonian(pair, 1, 0)
        mags = sorted(set(np.round(np.abs(h[h != 0]), 14)))
        assert mags == pytest.approx([1, math.sqrt(2), math.sqrt(3)])
        # one pair per doublet n = 0, 1, 2
        assert np.count_nonzero(h) == 6

    def test_spectators_identity(self):
        space = fock.make_space([Subsystem.mode("A", 3), Subsystem.mode("B", 3), Subsystem.atom("q")])
        h = jc_hamiltonian(space, 2, 1)
        for i, j in zip(*np.nonzero(h)):
            ki, kj = fock.basis_ket(space, i), fock.basis_ket(space, j)
            assert ki[0] == kj[0]


class TestPropagator:
    def test_zero_angle(self, pair):
        u = propagator_expm(jc_hamiltonian(pair, 1, 0), 0.0)
        np.testing.assert_array_equal(u, np.eye(pair.dim))

    @pytest.mark.parametrize("theta", [0.3, 2.0, 11.0])
    def test_unitary(self, theta):
        space = fock.make_space([Subsystem.mode("A", 4), Subsystem.mode("B", 3), Subsystem.atom("q")])
        u = propagator_expm(jc_hamiltonian(space, 2, 0), theta)
        assert np.max(np.abs(u.conj().T @ u - np.eye(space.dim))) <= 1e-12

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            propagator_expm(np.array([[0, 1], [0, 0]]), 1.0)

    def test_matches_closed_form_on_vacuum(self, pair):
        theta = 0.9
        u = propagator_expm(jc_hamiltonian(pair, 1, 0), theta)
        s = fock.ket_state(pair, (0, E))
        assert fock.max_abs_diff(apply_matrix(u, s), jc_apply(s, JCPulse(1, 0, theta))) <= 1e-10

    def test_matches_scipy(self, pair):
        scipy_linalg = pytest.importorskip("scipy.linalg")
        h = jc_hamiltonian(pair, 1, 0)
        np.testing.assert_allclose(
            propagator_expm(h, 3.3), scipy_linalg.expm(-3.3j * h), atol=1e-12
        )


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 4 * math.pi))
def test_oracle_equivalence_random(seed, theta):
    rng = np.random.default_rng(seed)
    space = fock.make_space(
        [Subsystem.mode("A", 4), Subsystem.mode("C", 3), Subsystem.atom("a1"), Subsystem.atom("a2")]
    )
    atom, mode = int(rng.integers(2, 4)), int(rng.integers(0, 2))
    s = safe_random_state(space, atom, mode, rng)
    u = propagator_expm(jc_hamiltonian(space, atom, mode), theta)
    got = jc_apply(s, JCPulse(atom, mode, theta))
    assert fock.max_abs_diff(got, apply_matrix(u, s)) <= 1e-10
    assert fock.norm(got) == pytest.approx(fock.norm(s), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-10, 10), st.floats(-10, 10))
def test_disjoint_pulses_commute(seed, ta, tb):
    space = fock.protocol_space(4)
    rng = np.random.default_rng(seed)
    v = (rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)).reshape(space.dims)
    v[:, :, :, 3, :, E] = 0
    v[3, :, :, :, E, :] = 0
    s = fock.normalize(fock.StateVector(space, v.reshape(-1)))
    p, q = JCPulse(4, 0, ta), JCPulse(5, 3, tb)
    one = jc_apply(jc_apply(s, p), q)
    two = jc_apply(jc_apply(s, q), p)
    assert fock.max_abs_diff(one, two) <= 1e-12


@pytest.mark.parametrize("n", [0, 1, 2])
def test_doublet_period(pair, n):
    s = fock.from_terms(pair, {(n, E): 0.6, (n + 1, G): 0.8j})
    out = jc_apply(s, JCPulse(1, 0, 2 * math.pi / math.sqrt(n + 1)))
    assert fock.max_abs_diff(out, s) <= 1e-12


def test_dark_amplitudes_untouched():
    space = fock.protocol_space(4)
    rng = np.random.default_rng(5)
    s = safe_random_state(space, 4, 2, rng)
    out = jc_apply(s, JCPulse(4, 2, 1.234))
    dark = s.tensor()[:, :, 0, :, G, :]
    np.testing.assert_array_equal(out.tensor()[:, :, 0, :, G, :], dark)
