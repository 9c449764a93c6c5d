"""Local message-passing algorithms for max-cut and min-bisection on
locally treelike regular graphs, with the Parisi PDE machinery that
supplies their nonlinearities and the oracles used to validate them."""

from .graph import (RegularGraph, TreelikeReport, GraphFormatError,
                    GenerationError, generate_random_regular, treelike_report,
                    girth, from_edge_set, load_graph, store_graph)
from .parisi import (GammaStep, ParisiSolution, SdePaths, IdentityReport,
                     solve_pde, parisi_value, optimize_gamma, simulate_sde,
                     check_identities, cole_hopf_reference, save_solution,
                     load_solution)
from .engine import (Schedule, RunResult, run, tree_monte_carlo, prop26_rhs,
                     clt_diagnostics, sample_tree_edge,
                     sample_message_population)
from .wave import (WaveConfig, make_wave_schedule, predicted_edge_correlation,
                   predicted_cut_value, TWO_OVER_PI)
from .iamp import (IampSchedule, AuxiliaryProcess, build_schedule,
                   simulate_auxiliary)
from .rounding import (CutResult, clip, randomized_round, sign_round,
                       balance_repair, evaluate)
from .oracle import ExactCut, brute_force, sanity_bound

__version__ = "0.1.0"
