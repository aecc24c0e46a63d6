"""Smoothed and unsmoothed nonparametric likelihood estimators for
interval-censored data, case 2, in the separated case."""

from .duality import DualityReport, MonotoneEstimate, check_fenchel, nabla, nabla_bar
from .isotonics import CusumDiagram, curstat_msle, gcm_slopes, isotonic_ls
from .kernels import (BoundaryCoefficients, boundary_coeffs, integrated_kernel,
                      kernel_moments, scaled_kernel, triweight)
from .mle_smle import MleSolution, fit_mle, fit_smle
from .msle_solver import SolverConfig, em_step, fit_msle, fit_msle_em, icm_step, icm_weights, loglik
from .asymptotics import (AsymptoticsReport, ModelFunctions, beta, beta1, compute_report,
                          d_F0, exp_triangle_model, sigma1, sigma_sq, smle_variance_limit,
                          solve_linear_inteq, solve_smle_phi, toy_estimator)
from .simulation import SimDesign, draw_sample, montecarlo_normality, rate_study, sample_pair, sample_records
from .smoothing import (CensoredSample, Grid, SmoothedDensities, estimate_g, estimate_g1,
                        estimate_g2, estimate_h, estimate_h1, estimate_h2, normalize,
                        smooth_sample)

__version__ = "0.1.0"
