"""Conflict-graph downlink training allocation for FDD massive MIMO links."""

from .env import EnvConfig, Environment, PathSet, covariance, derive_paths, generate_environment, path_loss, realize_channel, steering_vector
from .graph import Coloring, ConflictGraph, association_matrix, greedy_color, overhead_reduction, validate_coloring
from .spectrum import DominantSupport, beam_gains, dft_codebook, dominant_support
from .training import TrainingPlan, analytic_mse, build_training_plan, embed_estimate, estimate, mmse_filter, simulate_pilots
from .txsim import PrecoderSet, rate, rzf_precoder, scale_power, sinr

__version__ = "0.1.0"
