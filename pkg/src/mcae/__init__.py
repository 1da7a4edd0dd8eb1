"""Multichannel autoencoder with control-point synthetic data generation."""

from .classify import (GapReport, LabeledFeatures, SoftmaxModel,
                       confusion_matrix, f1_score, gap_report, pearson_corr,
                       train_softmax)
from .congeal import congeal, sample_boundary_points
from .experiment import ExperimentConfig, ResultsTable, run_experiment
from .geometry import (binarize, block_means, boundary_mask,
                       distance_transform, image_distance, render)
from .matching import (match_synthetic, make_toy_roof_corpus,
                       optimize_cp_coordinate_descent)
from .morphing import generate_syn2, interpolate_cp, migrate_control_points
from .nnet import (ChannelTask, DecoderParams, EncoderParams, GradientBundle,
                   Hyper, McaeModel, SaeModel, TrainOptions, TrainingError,
                   decode, encode, finite_diff_gradient, init_mcae,
                   init_params, kl_sparsity, make_ciae_task, mcae_gradients,
                   mcae_loss, sae_loss, sigmoid, train, train_sae)
from .shapes import ControlPoint, ControlPointSet, PrototypeSpec, roof_prototype

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
