"""arisim: active/passive reconfigurable-surface aided MU-MISO downlink
simulation -- channel models, closed-form SNR analysis, FP-based joint
beamforming, self-interference suppression, and a Monte-Carlo harness."""

from .channels import (ChannelSet, Geometry, Link, PathLossAssignment,
                       PathLossKind, PathLossModel, draw_channels,
                       los_component, path_loss_db, path_loss_linear,
                       rayleigh_vector, ricean_channel,
                       self_interference_matrix, substream)
from .system import (AuxiliaryState, Precoder, RisMode, SystemConfig,
                     TrialResult, bs_power, equivalent_channel,
                     reflection_matrix, ris_power, simulate_reception, sinr,
                     sinr_values, sum_rate)
from .fp_solver import (FpWorkspace, InfeasibleRisPowerError, SolverOptions,
                        build_workspace, initial_precoder, solve_joint,
                        surrogate_value, update_psi, update_rho, update_varpi,
                        update_w)
from .asymptotics import (AsymptoticParams, crossover_elements,
                          element_power_model, min_distance_active_wins,
                          snr_active_asymptotic, snr_active_exact,
                          snr_passive_asymptotic, snr_passive_exact,
                          su_siso_optimal)
from .self_interference import (SelfExcitationError, SiOptions, SiProblem,
                                SiSolution, effective_precoding, rescale_tau,
                                si_cost, suppress, update_phi,
                                update_phi_prime)
from .baselines import (BaselineKind, no_ris_baseline, passive_ris_fp,
                        random_phase_baseline, wmmse_beamforming)
from .harness import (ScenarioSpec, SweepRow, SweepSpec, build_scenario,
                      emit_results, run_asymptotic_figure, run_sweep)

__version__ = "0.1.0"
