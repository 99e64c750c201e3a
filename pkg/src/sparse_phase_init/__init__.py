"""Spectral initialization for sparse and generative-prior phase retrieval."""
from .generative import (
    build_latent_net,
    brute_force_amplitude_min,
    generative_spectral_init,
    make_linear_generator,
    make_relu_generator,
    range_projection,
)
from .harness import ExperimentConfig, TrialRecord, relative_error, run_experiment, summarize
from .initializers import (
    InitResult,
    copram_init,
    pri_spca,
    pri_spca_nt,
    random_init,
    sparta_init,
    thwf_init,
)
from .refinement import RefinementConfig, copram_refine, cosamp
from .signals import (
    MeasurementSet,
    NoiseSpec,
    SensingMatrix,
    SparseSignal,
    gen_sensing_matrix,
    gen_sparse_signal,
    make_instance,
    measure,
    trial_seeds,
)
from .sparse_pca import SpcaConfig, SpcaResult, grqi, power_method, start_vector, tpower
from .spectral import (
    PopulationCoefficients,
    SpectralOperator,
    TruncationBand,
    build_truncated_operator,
    build_untruncated_operator,
    estimate_norm,
    population_coefficients,
)

__version__ = "0.1.0"
