"""Monte-Carlo lab for the two-locus Moran selective sweep and its
approximating random-partition laws."""

from .analytics import (
    expected_jump_counts,
    fixation_prob,
    hitting_prob,
    logistic_frequency,
    msh_frequency,
    one_step_coal_probs,
    one_step_recomb_probs,
    q_J_value,
)
from .approx_p import alpha_and_p, qp_pair_stats, qp_probability, sample_p_partition
from .branching import (
    UrnSpec,
    polya_q,
    simulate_two_type_branching,
    simulate_urn,
    simulate_yule_skeleton,
    simulate_yule_skeleton_partition,
)
from .genealogy import (
    NEVER,
    AncestryTrace,
    OneStepTally,
    PairStats,
    TrajectoryIntegrityError,
    pair_stats_from_traces,
    theta_partition,
    trace_ancestry,
)
from .harness import ConfigError, ExperimentConfig, ReportTable, estimate_tv_distance, run_experiment
from .model import Params, SweepTrajectory, simulate_conditioned_sweep, simulate_sweep
from .paintbox import paintbox_pair_stats_exact, sample_paintbox, sample_paintbox_thinned
from .partitions import MarkedPartition, enumerate_marked_partitions
from .rng import KernelStream

__version__ = "0.1.0"
