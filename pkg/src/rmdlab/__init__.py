"""Spin chains under random multipolar driving: sequences, exact
stroboscopic evolution, heating bounds, and scaling analysis."""

__version__ = "0.1.0"

from .sequence import (DriveSequence, SpectrumEstimate, generate_rmd,
                       thue_morse_cell, block_moment,
                       autocorrelation_empirical, spectral_density_analytic,
                       power_spectrum_fft, ensemble_power_spectrum,
                       low_frequency_exponent)
from .spinchain import (SpinChainParams, build_hamiltonian, product_state,
                        all_down_state, global_flip, translation_operator,
                        momentum_zero_basis)
from .observables import (energy_expectation, half_chain_entropy, page_entropy,
                          local_magnetization, subharmonic_weight)
from .propagation import (PropagatorPair, UnitCellPair, ObservableTrace,
                          make_propagators, build_unit_cells, iter_unit_cells,
                          evolve_rmd, evolve_tms, evolve_dtc,
                          heating_trajectory, expm_hermitian, cell_matrix)
from .bounds import (BoundConstants, FgrParams, bound_constants, dipole_bound,
                     quadrupole_bound, measured_cell_error, fgr_rate,
                     fgr_rate_tms)
from .analysis import (ThermalizationTime, ScalingFit, thermalization_time,
                       fit_power_law, fit_exponential, fit_residual_sum,
                       normalized_diagnostic, ensemble_average_trace)
from .errors import ResourceCapError, NotThermalizedError, ConfigError
