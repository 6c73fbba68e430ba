"""Multigrid for the weighted (Caffarelli-Silvestre) extension of the
fractional Laplacian on anisotropically graded tensor-product meshes."""

from .analysis import (ExactProblem, convergence_rate, energy_error, exact_energy_sq,
                       spectral_equivalence_report)
from .assembly import (WeightedOperator, assemble_axis_matrices, assemble_load,
                       assemble_operator, energy_inner, normalization_constant,
                       weighted_moment)
from .meshes import (FracParams, GradedAxis, GradingMap, TensorMesh, build_axis,
                     build_hierarchy, estimate_a2_constant, make_grading,
                     modified_map_params)
from .smoothers import (LinePlan, Tridiag, build_line_plan, line_gs_sweep, point_gs_sweep,
                        tridiag_solve)
from .transfer import TransferPair, build_transfer
from .vcycle import (MgHierarchy, MultigridFailure, SolveReport, estimate_contraction,
                     mg_solve, vcycle_apply)

__version__ = "0.1.0"
