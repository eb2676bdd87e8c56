"""Estimate the basic neighborhood of a Markov random field on Z^d by PIC."""

from .counts import CountTable, count_blocks, count_sieves, project
from .estimator import (PicReport, empirical_specification, estimate, kappa_auto,
                        typicality_check)
from .lattice import (Neighborhood, Region, block_count_exact, enumerate_neighborhoods,
                      radius_schedule, window, window_width)
from .model import Potential, Specification, alpha_bound, exact_joint_tiny, ising, potts, \
    spec_from_potential
from .pseudolik import CriterionValue, log_mpl, log_pl, penalty, pic
from .sampler import Sample, gibbs_sample

__version__ = "0.1.0"

__all__ = [
    "CountTable", "CriterionValue", "Neighborhood", "PicReport", "Potential", "Region", "Sample",
    "Specification", "alpha_bound", "block_count_exact", "count_blocks", "count_sieves",
    "empirical_specification", "enumerate_neighborhoods", "estimate", "exact_joint_tiny",
    "gibbs_sample", "ising", "kappa_auto", "log_mpl", "log_pl", "penalty", "pic", "potts",
    "project", "radius_schedule", "spec_from_potential", "typicality_check", "window",
    "window_width",
]
