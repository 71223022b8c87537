"""urnflow: simulate and analyze the linearly reinforced ball process on graphs.

At every step one ball is added per edge, landing on either endpoint with
probability proportional to its current ball count. The package simulates
this process exactly, analyzes the associated mean-field flow on the
simplex, enumerates and classifies its stationary points, and predicts
the almost-sure limit object per graph class.
"""

from . import corpus, dynamics, equilibria, graphs, jsonio, simulate, verify
from .dynamics import (
    flow,
    jacobian,
    jacobian_bipartite,
    lyapunov,
    lyapunov_grad,
    pair_ratio_sum,
    shadowing_gap,
    uniqueness_lyapunov,
    vector_field,
)
from .equilibria import (
    classify_equilibrium,
    enumerate_faces,
    face_critical_point,
    find_equilibria,
    interior_interval,
    limit_object,
    omega_segment,
    project_to_omega,
    spectrum,
)
from .graphs import Graph, GraphClass, classify_graph, make_graph, parse_graph
from .simulate import (
    init_state,
    monte_carlo,
    noise_term,
    proportions,
    run,
    step,
    step_schedule,
)

__version__ = "0.1.0"
