"""Simulation and exact analytics for the three-species ABC model on a ring at low temperature."""
from .ring import (EdgeClass, ModelParams, ParamError, RingConfig, Species, classify_edge,
                   hamiltonian, jump_rate, make_omega, transpose)
from .families import ConfigId, Omega, Xi, Zeta, make_xi, make_zeta, recognize
from .kmc import (EventLog, FirstReturn, HitSet, MaxEvents, MaxTime, SegregatedSet, embedded_mode,
                  run_transitions, simulate)
from .ideal_chain import (absorption_solve, build_ideal_chain, g_closed, limit_rate, limit_rates,
                          meeting_distribution, r1_matrices, theta_beta)
from .velocity import ballistic_velocity, velocity, velocity_oracle

__version__ = "0.1.0"
