"""Flexible skew quad-surface meshes of the orthodiagonal involutive type.

The package synthesizes, certifies and animates meshes built from a
rigid central quad surrounded by four orthodiagonal spherical corner
quads whose fold motions are coupled hinge to hinge. The core pipeline:

- ``spherical``: single-quad configuration polynomials, classification
  and the two fold involutions.
- ``coupling``: hinge couplings as projective offsets and the induced
  involution they must reproduce.
- ``matching``: the minor systems whose vanishing certifies a common
  one-parameter motion, plus real-existence case analysis.
- ``synthesis``: recovering quads from involution factors and
  assembling complete mesh designs.
- ``kinematics``: chain solving, admissible ranges, spatial embedding
  and motion tracing.
- ``oracle``: independent certification through resultant elimination
  and brute-force interval scans.
- ``designfile`` and ``cli``: the JSON design format and the
  ``kokoflex`` command line tool built on it.
"""

from .coupling import (
    Coupling,
    induced_involution,
    is_involutive,
    make_coupling,
    mobius,
    principal_F,
    t_of,
)
from .designs import bundled_design
from .errors import (
    AssemblyError,
    CellFormulaInconsistency,
    DegenerateBranch,
    DegenerateElimination,
    EvaluationAtPole,
    InconsistentInput,
    KokoflexError,
    NoRealSolution,
    ParseError,
    TraceError,
)
from .kinematics import (
    MotionFrame,
    RealIntervalSet,
    admissible_interval,
    chain_candidates,
    chain_solve,
    closure_residual,
    embed,
    geometric_property_check,
    probe_closure,
    trace_motion,
)
from .matching import (
    EllipticParams,
    ExistenceReport,
    MinorVector,
    cad_cell_sample,
    deltoid_minors_B1,
    deltoid_minors_B2,
    generic_branch_residuals,
    global_existence,
    is_oi_match,
    linear_branch,
    local_existence,
    minors,
)
from .oracle import (
    BiquadraticPoly,
    brute_force_interval,
    common_component_score,
    design_resultants,
    sylvester_resultant,
)
from .projective import ProjectiveReal
from .spherical import (
    ConfigPolynomial,
    InvolutionFactors,
    SphericalQuad,
    classify,
    complete_orthodiagonal,
    config_poly,
    involution_factors,
    involution_i,
    involution_j,
    is_orthodiagonal,
)
from .synthesis import (
    LinkageDesign,
    MeshDesign,
    assemble_deltoid_design,
    assemble_design,
    build_central_tetrahedron,
    recover_deltoid_angles,
    recover_quad_angles,
    recover_zeta,
    tau_from_vertices,
)

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "BiquadraticPoly",
    "CellFormulaInconsistency",
    "ConfigPolynomial",
    "Coupling",
    "DegenerateBranch",
    "DegenerateElimination",
    "EllipticParams",
    "EvaluationAtPole",
    "ExistenceReport",
    "InconsistentInput",
    "InvolutionFactors",
    "KokoflexError",
    "LinkageDesign",
    "MeshDesign",
    "MinorVector",
    "MotionFrame",
    "NoRealSolution",
    "ParseError",
    "ProjectiveReal",
    "RealIntervalSet",
    "SphericalQuad",
    "TraceError",
    "admissible_interval",
    "assemble_deltoid_design",
    "assemble_design",
    "brute_force_interval",
    "build_central_tetrahedron",
    "bundled_design",
    "cad_cell_sample",
    "chain_candidates",
    "chain_solve",
    "classify",
    "closure_residual",
    "common_component_score",
    "complete_orthodiagonal",
    "config_poly",
    "deltoid_minors_B1",
    "deltoid_minors_B2",
    "design_resultants",
    "embed",
    "generic_branch_residuals",
    "geometric_property_check",
    "global_existence",
    "induced_involution",
    "involution_factors",
    "involution_i",
    "involution_j",
    "is_involutive",
    "is_oi_match",
    "is_orthodiagonal",
    "linear_branch",
    "local_existence",
    "make_coupling",
    "minors",
    "mobius",
    "principal_F",
    "probe_closure",
    "recover_deltoid_angles",
    "recover_quad_angles",
    "recover_zeta",
    "sylvester_resultant",
    "t_of",
    "tau_from_vertices",
    "trace_motion",
]
