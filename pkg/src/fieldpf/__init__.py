"""Blocked and enlarged-blocked particle filtering for dynamic random fields.

A dynamic random field is a Markov chain over configurations on a graph whose
per-site transitions depend only on an r-hop neighborhood and whose
observations are per-site.  This package provides:

- graph geometry: distances, neighborhoods, partitions, block enlargement
  (`graphs`),
- local kernel models with verified mixing bounds (`models`),
- an exact small-scale engine for the true filter and the ideal (enlarged)
  blocked filters, the oracles bias is measured against (`exact`),
- bootstrap / blocked / enlarged-blocked particle filters with deterministic
  per-(step, block) RNG streams and partition cycling (`particles`),
- marginal-norm estimators, empirical bias/variance decomposition, and the
  explicit error-bound calculators (`metrics`),
- a deterministic experiment CLI emitting machine-readable CSV (`cli`).
"""

from .graphs import (SpatialGraph, Partition, EnlargedPartition, PartitionStats,
                     build_graph, make_path, make_cycle, make_grid,
                     regular_partition, offset_partition, enlarge_partition,
                     neighborhood, boundary_interior, enlarge_block,
                     set_distance, boundary_distance, partition_stats,
                     schedule_k_inf)
from .models import (LocalModel, verify_mixing, mixture_kernel, binary_channel,
                     noisy_voter_model, autoregressive_model,
                     sample_transition, sample_observation, obs_logweight,
                     simulate_trajectory, product_init, point_init,
                     as_initial_pmfs, sample_initial)
from .exact import (JointPmf, BlockMarginals, CapExceeded, DEFAULT_JOINT_CAP,
                    joint_from_init, product_pmf, marginal_on, exact_predict,
                    exact_correct, exact_filter_run, blocked_marginals,
                    product_of_blocks, marginal_of_blocks,
                    ideal_enlarged_blocked_step, ideal_filter_run)
from .particles import (Ensemble, FilterSpec, stream, resample_indices,
                        predict_sample, bootstrap_update,
                        enlarged_blocked_update, run_filter, empirical_marginal)
from .metrics import (NormEstimate, BoundParams, BalanceStats,
                      HypothesisNotSatisfied, tv_distance, norm_estimate,
                      bias_mixing_threshold, variance_mixing_threshold, bias_decay_rate, bias_bound,
                      variance_bound, corollary_bound, blocked_error_envelope,
                      cycled_error_envelope, balance_stats,
                      bound_params_from_instance, bias_variance_report,
                      write_report_csv)

__version__ = "0.1.0"
