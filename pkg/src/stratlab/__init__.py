"""stratlab: spectral stability laboratory for the stratified Couette flow.

Linear and nonlinear 2D Boussinesq dynamics around the Couette shear in the
sheared frame: per-mode decay/growth envelopes, enhanced-dissipation checks,
classical stability eigenproblems, the resonant-cascade toy system, and a
desk-scale pseudo-spectral solver, all behind one CLI (`stratlab`).
"""
from ._kernels import BACKEND_NAME
from .params import PhysicalParams, dissipation_rate, energy_envelope_constant
from .spectral import (Mode, ModeState, SpectralField, frame_shift,
                       gevrey_norm, l2_norm, sobolev_norm, split_zero_mode,
                       symbol_dtp, symbol_p, velocity_from_vorticity)
from .linear import (IntegratorStall, SymmetricState, check_energy_envelope,
                     check_vorticity_decay, energy_functional,
                     evolve_field_linear, evolve_mode, from_symmetric,
                     good_unknown, mode_trajectory, to_symmetric)
from .diagnostics import (CheckReport, NormSeries, RateFit, ScalarSeries,
                          check_envelope, check_instability_lower_bound,
                          fit_power_law)
from .eigen import (EigenResult, ShearProfile, couette,
                    rayleigh_taylor_spectrum, richardson_number,
                    taylor_goldstein_spectrum)
from .toy import (CascadeReport, ToyParams, cascade_gain,
                  critical_time_partition, evolve_toy,
                  fit_amplification_exponent)
from .sim import (CflError, SimConfig, SimState, energy_balance,
                  gaussian_density_field, gaussian_density_state,
                  nonlinear_frame, remesh, run, step)

__version__ = "0.1.0"
