"""Distributed convex optimization under communication compression.

Simulation library for compressed first-order methods: an accelerated
shift-compression algorithm with theoretically derived schedules, DIANA /
EF21 / uncompressed accelerated baselines, a suite of unbiased compressors
with exact per-message bit accounting, hard chain instances with closed-form
suboptimality floors, and an experiment harness measuring the total
communication cost to reach target accuracies.
"""

from .core import (ProblemInstance, Trace, as_vector, check_gradients,
                   estimate_smoothness, grad_full, precompute_reference,
                   read_summary_csv, read_traces_csv, suboptimality,
                   summarize_traces, write_summary_csv, write_traces_csv)
from .compressors import (CompressorSpec, CompressorState, aggregate_variance,
                          compress, elias_decode, elias_encode,
                          elias_gamma_length, empirical_moments,
                          min_bits_lower_bound)
from .problems import (HardInstance, LeastSquaresSpec, chain_decay_ratio,
                       format_metadata, gen_constructed_quadratic,
                       gen_least_squares, gen_zero_chain_gc,
                       gen_zero_chain_gc3, gen_zero_chain_sc,
                       least_squares_from_matrices, load_libsvm, parse_libsvm,
                       write_libsvm)
from .algorithms import (PRESETS, AdianaState, CanitaParams, ParamSchedule,
                         adiana_init, adiana_round, adiana_schedule_gc,
                         adiana_schedule_sc, canita_schedule,
                         contraction_rate_bound, lyapunov_lambda, lyapunov_sc,
                         manual_schedule, preset_schedule, run_adiana,
                         run_diana, run_ef21, run_nesterov)
from .lowerbound import (FloorAuditRow, ProgressStats, floor_audit,
                         gc_opt_at_prog, prog, savings_ratio, sc_floor,
                         simulate_progress, theory_rounds)
from .harness import (ConfigError, ExperimentConfig, ExperimentResult,
                      TccResult, build_compressor, build_problem, compute_tcc,
                      load_config, make_runner, run_experiment, tcc_dominates,
                      tune_grid)

__version__ = "0.1.0"
