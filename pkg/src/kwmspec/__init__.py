"""Covariance and spectral theory of k-mode weakly stationary quantum
processes: kernel validity over site windows, matrix spectral measures on
the dual group with Fourier transforms both ways, decomposition
diagnostics, photon numbers, classical displacement noise, and sampling.
"""

from .errors import DomainError, NumericError, SpectrumDesignError, ValidationFailure
from .groups import (
    GroupDescriptor,
    character_value,
    cyclic_group,
    haar_weight,
    integer_group,
)
from .kernels import (
    AutocovarianceMap,
    ClassicalCovarianceKernel,
    add_kernels,
    assemble_block_matrix,
    augmented_block_matrix,
    validate_classical_kernel,
    validate_quantum_kernel,
)
from .simulate import (
    DisplacementNoiseModel,
    GaussianStateCovariance,
    PeriodogramEstimate,
    displaced_mixture_covariance,
    gaussian_state_covariance,
    monte_carlo_displacement,
    paths_csv_text,
    periodogram,
    periodogram_csv_text,
    read_paths_csv,
    read_periodogram_csv,
    sample_quadrature_process,
    write_paths_csv,
    write_periodogram_csv,
)
from .spectra import (
    Atom,
    ClassicalSpectralMeasure,
    PhotonNumberReport,
    SpectralMeasure,
    autocov_to_spectrum,
    classical_covariances,
    decompose_and_diagnose,
    design_spectrum,
    marginal_spectra,
    mixing_diagnostics,
    photon_numbers,
    scalar_spectrum,
    spectrum_to_autocov,
    validate_classical_spectrum,
    validate_spectrum,
)
from .symplectic import (
    DEFAULT_TOL,
    ConditionCheck,
    PurityCheck,
    QuantumCovarianceMatrix,
    ValidationReport,
    check_uncertainty,
    hermitian_min_eigenpair,
    purity_determinant_check,
    symplectic_form,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError", "NumericError", "SpectrumDesignError", "ValidationFailure",
    "GroupDescriptor", "integer_group", "cyclic_group", "character_value",
    "haar_weight",
    "symplectic_form", "QuantumCovarianceMatrix", "check_uncertainty",
    "hermitian_min_eigenpair", "purity_determinant_check", "PurityCheck",
    "ConditionCheck", "ValidationReport", "DEFAULT_TOL",
    "AutocovarianceMap", "ClassicalCovarianceKernel", "assemble_block_matrix",
    "augmented_block_matrix", "validate_quantum_kernel",
    "validate_classical_kernel", "add_kernels",
    "Atom", "SpectralMeasure", "ClassicalSpectralMeasure", "PhotonNumberReport",
    "validate_spectrum", "validate_classical_spectrum", "spectrum_to_autocov",
    "autocov_to_spectrum", "classical_covariances", "design_spectrum",
    "decompose_and_diagnose", "photon_numbers", "marginal_spectra",
    "scalar_spectrum", "mixing_diagnostics",
    "GaussianStateCovariance", "DisplacementNoiseModel",
    "gaussian_state_covariance", "displaced_mixture_covariance",
    "monte_carlo_displacement", "sample_quadrature_process", "periodogram",
    "PeriodogramEstimate", "write_paths_csv", "read_paths_csv",
    "write_periodogram_csv", "read_periodogram_csv", "paths_csv_text",
    "periodogram_csv_text",
]
