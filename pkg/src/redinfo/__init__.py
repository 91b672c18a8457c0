"""Bivariate redundant information via KL projections onto convex closures."""

from .dist import Alphabet, CondFamily, Dist, Joint3, cond_family, from_mechanism, marginal, validate
from .infomeasures import (
    conditional_mutual_information,
    entropy,
    i_min,
    kl,
    mutual_information,
    specific_information,
)
from .pid import PIDecomposition, decompose, i_red, self_redundancy
from .projection import SolverConfig, brute_force_project, mixture, project, projected_information
from .transfer import TransferDecomposition, decompose_transfer, transfer_entropy

__version__ = "0.1.0"
