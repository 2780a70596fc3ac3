"""Radar-SINR versus information-secrecy tradeoff toolkit.

A unified transmitter feeds both a passive radar receiver and a
communication receiver; these modules construct the scenario operators,
evaluate SINR and secrecy metrics, and solve the threshold-constrained
transmit designs for disjoint and shared resource allocations.
"""

from .scenario import (ScenarioConfig, ChannelRealization, RadarOperators,
                       steering_vector, build_operators, build_c_of_q,
                       sample_channel)
from .radar_rx import (ReceiverWeight, WaveformDesign, optimal_weight,
                       optimal_waveform, sinr_nonoverlap, sinr_overlap)
from .secrecy import (SecrecyConstraintParams, capacity_cr, capacity_rr,
                      secrecy_capacity, block_capacities, block_secrecy_rate)
from .convex_core import (SolverOptions, PsdVariable, solve_min_trace_logdet,
                          solve_overlap_inner, logdet_gradient, psd_project)
from .nonoverlap import (WaterfillSolution, SolveResult, update_y,
                         waterfill_qc, g_lambda, bisect_lambda, algorithm1,
                         algorithm2)
from .overlap import aux_update, ao_overlap, rank_one_extract
from .experiments import SweepSpec, TradeoffPoint, run_sweep, emit_csv, cli_main
from .errors import (RadcomError, NotPositiveDefinite, InfeasibleProblem,
                     NotConverged)

__version__ = "0.1.0"
