"""Pauli-Villars regularised free energy of the Dirac vacuum at positive temperature."""

from .errors import (AccuracyError, ConvergenceError, DegenerateSchemeError, DomainError,
                     FieldFormatError, GaugeError, InfeasibleCutoffError, IntegrandError,
                     MalformedPayloadError, OracleAccuracyError, PVFreeError, UnsupportedVersionError,
                     InvalidDataError)
from .pv_scheme import (PauliVillarsScheme, WeightedSpecies, default_scheme, scheme_from_cutoff,
                        scheme_from_masses)
from .quadrature import (QuadratureResult, QuadratureSpec, beta_average, integrate_half_line,
                         integrate_interval)
from .special_functions import (ThermoPoint, bessel_k, fermi_thermo, matsubara_frequency, theta2,
                                x_tanh_x_partial)
from .multipliers import (GammaParts, MultiplierSample, MultiplierTable, build_table, gamma,
                          gamma_beta_averaged, gamma_thermal_part, gamma_zero_part, m_thermal,
                          m_thermal_as_printed, m_zero, uehling)
from .matsubara_oracles import (OracleResult, OracleSpec, bessel_integral_identity_check,
                                beta_averaged_oracle, gamma_matsubara_oracle,
                                matsubara_weight_partial_sum, oracle_partial_sums,
                                scalar_multiplier_oracle, vector_multiplier_oracle)
from .fields import (GridField, SpectralField, coulomb_project, dump_grid_field,
                     field_spectra_and_norms, gaussian_test_field, load_grid_field,
                     spectral_transform)
from .free_energy import (FreeEnergyReport, gaussian_electric_reference, quadratic_free_energy,
                          remainder_factors)
from .cli import CommandOutcome, execute_command

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ConvergenceError",
    "DegenerateSchemeError",
    "DomainError",
    "FieldFormatError",
    "GaugeError",
    "InfeasibleCutoffError",
    "IntegrandError",
    "MalformedPayloadError",
    "OracleAccuracyError",
    "PVFreeError",
    "UnsupportedVersionError",
    "InvalidDataError",
    "PauliVillarsScheme",
    "WeightedSpecies",
    "default_scheme",
    "scheme_from_cutoff",
    "scheme_from_masses",
    "QuadratureResult",
    "QuadratureSpec",
    "beta_average",
    "integrate_half_line",
    "integrate_interval",
    "ThermoPoint",
    "bessel_k",
    "fermi_thermo",
    "matsubara_frequency",
    "theta2",
    "x_tanh_x_partial",
    "GammaParts",
    "MultiplierSample",
    "MultiplierTable",
    "build_table",
    "gamma",
    "gamma_beta_averaged",
    "gamma_thermal_part",
    "gamma_zero_part",
    "m_thermal",
    "m_thermal_as_printed",
    "m_zero",
    "uehling",
    "OracleResult",
    "OracleSpec",
    "bessel_integral_identity_check",
    "beta_averaged_oracle",
    "gamma_matsubara_oracle",
    "matsubara_weight_partial_sum",
    "oracle_partial_sums",
    "scalar_multiplier_oracle",
    "vector_multiplier_oracle",
    "GridField",
    "SpectralField",
    "coulomb_project",
    "dump_grid_field",
    "field_spectra_and_norms",
    "gaussian_test_field",
    "load_grid_field",
    "spectral_transform",
    "FreeEnergyReport",
    "gaussian_electric_reference",
    "quadratic_free_energy",
    "remainder_factors",
    "CommandOutcome",
    "execute_command",
]
