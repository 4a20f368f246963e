"""CV cluster states on complex networks.

Gaussian covariance construction of cluster states on arbitrary graphs, the
closed-form optimum of their nullifier quality, and a derandomized evolution
strategy that searches local linear optics turning a shared cluster into an
EPR channel.
"""
from ._backend import BACKEND, available_backends
from .errors import (
    ConfigError,
    ContractViolation,
    CVClusterError,
    FormatError,
    NonFiniteFitnessError,
    NumericDomainError,
    ParameterError,
)
from .es import EsConfig, EsResult, EsTrace, default_config, es_minimize, es_minimize_restarts
from .gaussian import (
    VAC,
    NullifierReport,
    PhysicalityReport,
    SqueezingSpectrum,
    check_physical,
    cluster_covariance,
    cluster_unitary,
    nullifier_variances,
    nullifier_variances_closed_form,
    random_orthogonal,
    symplectic_from_unitary,
)
from .graphs import (
    Graph,
    catalog_graph,
    gen_barabasi_albert,
    gen_erdos_renyi,
    gen_watts_strogatz,
    graph_from_spec,
    read_adjacency_list,
    write_adjacency_list,
)
from .optimizer import QualityObjective, concentrate_on_pair, optimize_orthogonal, verify_optimum_numerically
from .routing import (
    FOUND,
    NOT_FOUND,
    ChannelTarget,
    Partition,
    RoutingConfig,
    RoutingProblem,
    RoutingSolution,
    solve_routing,
    verify_appendix,
    verify_solution,
)

__version__ = "0.1.0"
