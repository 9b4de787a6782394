"""Constrained mean-field control toolkit.

Solves constrained control problems for large homogeneous populations by
optimizing the infinite-population (mean-field) system with a natural
policy gradient primal-dual method, simulates the finite-N counterpart,
and evaluates closed-form bounds on the gap between the two.
"""
from . import backend
from .bounds import BoundInputs, BoundOutputs, compute_bounds, tightened_zeta
from .envmodel import (EnvConstants, EnvironmentSpec, FirmsEnvConfig, firms_env,
                       validate_lipschitz)
from .meanfield import MFTrajectory, c_mf, mf_values, nu_mf, p_mf, r_mf
from .nagent import (JointState, NAgentEstimate, estimate_values,
                     sample_initial_joint_state, step)
from .npgpd import SolverConfig, SolverTrace, dual_step, inner_sgd, npg_step, solve
from .policy import (FixedActionPolicy, SoftmaxPolicy, TabularPolicy, UniformPolicy)
from .sampler import (AdvantageEstimate, MFPathCache, OccupancySample,
                      estimate_advantage, estimate_constraint_value, sample_occupancy)
from .simplex import (ActionDistribution, StateDistribution, empirical_action_dist,
                      empirical_state_dist, l1_distance, sample)

__version__ = "0.1.0"
