"""
Cost-aware active learning for simulated robotic exploration.

A Gaussian process learner walks a gridded surface, choosing each next
sample by predictive variance, optionally penalized or constrained by the
distance it has to travel. Campaigns compare the policies on convergence
error, samples and distance.
"""

__version__ = "0.1.0"

from .gp import (AdamConfig, FactorizationError, FittedModel, KernelHyperparams, Posterior,
                 TrainingSet, fit, log_marginal_likelihood, mll_gradient, predict,
                 rbf_kernel, train_hyperparameters)
from .surfaces import (SurfaceGrid, SurfaceKind, build_parabola, build_surface,
                       build_synthetic_crater, build_townsend, count_local_extrema,
                       load_dem, measure, traversal_distance)
from .policies import Policy, SelectionContext, candidate_set, default_policies, select_next
from .explorer import TrialConfig, TrialRecord, run_trial, stopping_count
from .metrics import ConvergenceReport, NormalizationConstants, full_report, normalization_for
from .campaign import CampaignConfig, PolicySummary, best_worst, persist, run_campaign
