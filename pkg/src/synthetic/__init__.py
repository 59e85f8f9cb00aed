"""
Synthetic Package Initialization
Planted-structure datasets with known ground truth
"""

from src.synthetic.generator import (
    GroundTruth, PlantedGroup, PlantedSpec, alpha_for_mean, generate, group_mean, oracle_fit,
    reversal_planted, spec_from_dict, two_group_paradox_spec, write_csv
)
