"""Numerical closed-range tests for composition operators on Hardy spaces.

The package decides, to numerical evidence, whether composition with a
rational self-map of the unit disk has closed range on the Hardy scale, by
evaluating several classically equivalent criteria independently and
cross-checking them, alongside verification of the integral identities that
tie the criteria together.
"""

from .numerics import (
    CircleQuadrature,
    DiskQuadrature,
    EvaluationError,
    PolyCoeffs,
    PreconditionError,
    RootPolishError,
    SeededSampler,
    cluster_roots,
    integrate_circle,
    integrate_disk,
    log_recip_abs,
    mc_region_fraction,
    poly_roots,
)
from .symbols import (
    PreimageSet,
    SymbolError,
    SymbolSpec,
    affine,
    boundary_pushforward_point,
    compose,
    finite_blaschke,
    identity,
    moebius,
    parse_symbol_record,
    polynomial_map,
    preimages,
)
from .nevanlinna import (
    TauField,
    counting,
    counting_many,
    in_super_level,
    tau,
    tau_many,
    verify_change_of_variable,
)
from .hardy import (
    KernelSpec,
    TestFunction,
    circle_means,
    default_radius_grid,
    hardy_stein_constant,
    kernel,
    norm_boundary,
    norm_hardy_stein,
    norm_layer_cake,
    outer_function,
    outer_step,
)
from .measures import (
    CarlesonWindow,
    DensityEstimate,
    EmpiricalBoundaryMeasure,
    PseudoDisk,
    TestObservable,
    measure_of_window,
    pseudo_disk_area,
    pseudo_distance,
    pullback_measure,
    rn_density,
    rn_density_of_measure,
    verify_pushforward_identity,
    verify_window_domination,
    window_contains,
)
from .criteria import (
    CLOSED,
    INCONCLUSIVE,
    NOT_CLOSED,
    ClosedRangeReport,
    CriteriaConfig,
    SymbolArtifacts,
    Verdict,
    analyze,
    boundary_density_test,
    default_ratio_family,
    direct_norm_ratio_probe,
    golden_corpus,
    kernel_test,
    levelset_area_test,
    levelset_energy_probe,
    window_test,
)

__version__ = "0.1.0"
