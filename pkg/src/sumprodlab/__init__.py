"""Numerical laboratory for dyadic-scale entropy of sums and products of
self-similar measures: grid measures and their Shannon/collision entropies,
affine IFS rendering, regularity diagnostics, exact arithmetic of independent
measures, planar multiplicity/tube machinery, and the experiment drivers that
chain them.
"""

from .arithmetic import (ConvolutionPlan, conditional_entropy_quotient,
                         product_distribution, quotient_shift,
                         sum_distribution, sum_then_product, total_variation)
from .config import ExperimentConfig, parse_config
from .errors import (BudgetError, ConfigError, ConsistencyError,
                     DeterminationError, DomainError, LabError,
                     ScaleOrderError, SeparationError, ZeroMassEventError)
from .fuzz import FuzzReport, run_all_fuzz
from .gridmeasure import (CellSet1D, GridMeasure, coarsen, collision_entropy,
                          condition, covering_number, mix, shannon_entropy)
from .ifs import (AffineIFS, ap_ifs, dimension, parse_ifs_spec,
                  pushforward_monotone, regular_subset, render_measure)
from .inequalities import (CoveringRow, JointTable, MainTheoremRow,
                           SharpnessRow, check_discretised_submodular,
                           check_submodular, covering_rows_from_main,
                           frostman_entropy_bound, rendition_submodular_slack,
                           sharpness_experiment, sum_product_exponent,
                           two_scale_submodular_slack,
                           verify_covering_corollary, verify_main_inequality)
from .projection import (CellSet2D, Grid2DMeasure, TubeEnergy,
                         high_multiplicity_set, multiplicity, product_measure,
                         projective_transform, radial_high_multiplicity_set,
                         radial_integral, radial_multiplicity, tube_energy)
from .regularity import (RegularityReport, ahlfors_check, frostman_constant,
                         upper_regular_constant)

__all__ = [name for name in dir() if not name.startswith("_")]
