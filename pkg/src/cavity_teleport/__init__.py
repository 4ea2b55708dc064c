"""State-vector simulation of entangled-state teleportation between bimodal cavities."""

from .analysis import (
    fidelity_formula,
    monte_carlo,
    optimize_theta2,
    sweep,
    timing_budget,
)
from .dynamics import JCPulse, jc_apply, jc_hamiltonian, propagator_expm
from .fock import (
    E,
    G,
    HilbertSpace,
    StateVector,
    Subsystem,
    basis_index,
    basis_ket,
    fidelity,
    ket_state,
    make_space,
)
from .measurement import Outcome, outcome_probabilities, project, sample
from .protocol import (
    ChannelParams,
    ProtocolConfig,
    ProtocolResult,
    channel_state,
    closed_form_state,
    run_postselected,
    run_sampled,
    target_state,
)

__version__ = "0.1.0"
