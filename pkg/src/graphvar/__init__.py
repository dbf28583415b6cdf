"""Discrete variational toolkit on weighted graphs.

Operators and Sobolev-type norms of discrete calculus, embedding constants,
quasilinear energy systems with exact gradients, admissible-interval
constants, a deflated multi-start critical point solver, and verification
diagnostics.
"""

from .calculus import (
    GraphFunction,
    directional_derivative,
    gamma,
    grad_length,
    higher_grad_length,
    integrate,
    laplacian,
    lr_norm,
    p_laplacian,
    weak_poly_pairing,
)
from .energy import (
    EnergyProblem,
    IntervalReport,
    SystemSpec,
    build_problem,
    energy_gradient,
    interval_constants,
    minimizing_vertex,
    spike_mass,
    total_energy,
)
from .exceptions import (
    AdjacencyError,
    BindingError,
    ConstraintError,
    DegenerateDomainError,
    GraphFormatError,
    GraphVarError,
    HypothesisError,
    ParameterError,
    UnknownVertexError,
)
from .graphs import (
    DomainPartition,
    WeightedGraph,
    degree,
    graph_distance,
    load_graph,
    partition_domain,
)
from .models import (
    NonlinearityModel,
    PlateauOscillator,
    PowerModel,
    estimate_A,
    estimate_B,
    make_model,
    model_from_config,
)
from .solver import (
    CriticalPoint,
    SolveReport,
    SolverConfig,
    probe_unbounded_constant,
    probe_unbounded_spike,
    solve,
)
from .spaces import (
    NormSpec,
    closed_form_constant,
    embedding_constant,
    numeric_constant,
    sobolev_norm,
)

__version__ = "0.1.0"
