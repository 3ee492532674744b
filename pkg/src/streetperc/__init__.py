"""Monte Carlo percolation of SINR device-to-device networks on
Poisson-Voronoi street systems."""

from .errors import (BruteForceLimitError, ConstructionError, DirectionError,
                     FitError, NoTransitionError, ParameterError,
                     VisibilityError)
from .geometry import (StreetStatistics, StreetSystem, Window,
                       build_street_system, sample_poisson_points,
                       street_statistics)
from .placement import (Deployment, DerivedParams, NetworkParams, deploy,
                        derive_parameters, gilbert_radius, place_relays,
                        place_users, substream, substream_seed)
from .propagation import (SinrContext, StreetVerdict, path_loss,
                          received_power, street_open, street_open_bruteforce)
from .percolation import (BoundarySets, ConnectionEstimate, OpenGraph,
                          RealizationOutcome, boundary_streets,
                          build_open_graph, detect_crossing,
                          estimate_connection_probability,
                          simulate_realization, wilson_interval)
from .experiments import (LogisticFit, PhaseDiagram, TransitionCurve,
                          extract_double_critical, fit_logistic, hop_bound,
                          phase_diagram, pole_capacity, sweep)

__version__ = "0.1.0"
