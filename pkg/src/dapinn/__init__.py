"""Physics-informed networks with input augmentation.

The solution network sees augmented inputs tau = t(x) (replicas, powers or
Fourier features of the coordinates) and the PDE residual is assembled in
physical coordinates through the chain rule.
"""
from .augmentation import AugmentationScheme, augment, augmented_dim, parse_scheme
from .autodiff import DifferentiableScalar, HyperDual, Recording, parameter_gradient
from .bench import compare_schemes, l2_relative_error, run_sweep
from .config import ExperimentConfig, parse_config
from .network import MLPArchitecture, flop_count, init_glorot, param_count
from .problems import PROBLEM_NAMES, registry_get
from .training import assemble_loss, train

__version__ = "0.1.0"
