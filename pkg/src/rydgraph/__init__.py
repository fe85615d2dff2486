"""Parity protocols on globally driven Rydberg tweezer arrays.

The package splits along the experiment's own seams: ``geometry`` holds
layouts and couplings, ``pulses`` the global drive, ``engine`` the
state-vector integrator, ``observables`` parity estimators, ``mbqc``
the measurement-driven wire protocols, ``noise`` and ``mitigation`` the
error channels and their inversion, ``stats`` fits and errors, and
``cli``/``report`` the command line and figure layers.
"""

__version__ = "0.1.0"

from .engine import (DEFAULT_STEP, MAX_ATOMS, StateVector, apply_cp,
                     apply_global_rotation, build_ideal_graph_state, evolve,
                     fidelity, init_ground, measure_all, overlap,
                     prep_error_norm, project, sample_bitstrings)
from .geometry import (C6, AtomLayout, GraphSpec, InteractionMatrix,
                       build_chain, build_cnot_layout, build_rect,
                       build_swap_layout, chain_graph, cz_time,
                       interaction_matrix, pair_interaction)
from .mbqc import (ProtocolSpec, ShotRecord, byproduct_correct,
                   cnot_protocol, cnot_truth_table, post_select, run_protocol,
                   string_parity_estimate, swap_check, swap_protocol,
                   teleport_Q, teleport_exact, teleport_protocol)
from .mitigation import bias_counts, correct_counts
from .noise import (FAULT_TOLERANCE_EPS, NoiseConfig, apply_readout_bias,
                    apply_x_flip, domain_size, jitter_shift, p_even,
                    sample_jittered_layout, trajectory_fidelity)
from .observables import (OrderEstimate, displacement_for_gamma,
                          gamma_from_displacement, keep_fraction, q_ideal,
                          stabilizer_average, stabilizer_expectation,
                          string_order, symmetry_strings)
from .pulses import (PulseSchedule, PulseSegment, bell_schedule,
                     graph_schedule, rotation_angle)
from .stats import FitResult, convergence_curve, fit_epsilon, jackknife_se
