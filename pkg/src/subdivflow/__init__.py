"""Exact norm certificates for multivariate subdivision schemes.

Difference schemes are analysed through optimal difference masks: first
differences reduce to unit-cost network flows, higher-order operators to an
L1 linear program, and everything is computed over the rationals.
"""

from .certify import AnalysisAbort, AnalysisConfig, Certificate, ThresholdRule, analyze, render
from .difference import DifferenceOperator, NoSolution, construct_difference_mask, verify_intertwining
from .formats import FormatError, parse_mask_file, serialize_mask
from .l1lp import build_delta_matrix, l1_nullspace_distance, solve_box_lp
from .lattice import DilationMatrix, coset_decompose, coset_representatives
from .masks import Mask, Sequence, apply_subdivision, check_sum_rules_order1, iterate_mask, operator_norm
from .netflow import LatticeGraph, solve_flow_problem, solve_min_cost_flow

__version__ = "0.1.0"

__all__ = [
    "AnalysisAbort", "AnalysisConfig", "Certificate", "DifferenceOperator", "DilationMatrix",
    "FormatError", "LatticeGraph", "Mask", "NoSolution", "Sequence", "ThresholdRule",
    "analyze", "apply_subdivision", "build_delta_matrix", "check_sum_rules_order1",
    "construct_difference_mask", "coset_decompose", "coset_representatives", "iterate_mask",
    "l1_nullspace_distance", "operator_norm", "parse_mask_file", "render", "serialize_mask",
    "solve_box_lp", "solve_flow_problem", "solve_min_cost_flow", "verify_intertwining",
]
