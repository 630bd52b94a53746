"""Spectra of symmetric Levy generators: symbols, periodic-grid operators,
spectrum classification and Monte Carlo cross-checks."""

from .errors import (
    AtomOffGrid,
    BadParameter,
    DivergentMeasure,
    LevySpecError,
    MismatchedModel,
    ModelError,
    NotFinite,
    OriginAtom,
    QuadratureFailure,
    SpectrumProximity,
    UnsupportedMeasure,
)
from .grid import (
    GridFunction,
    PeriodicGrid,
    forward_transform,
    frequency_lattice,
    inverse_transform,
    sample,
)
from .measures import (
    AtomMeasure,
    DiffusionMatrix,
    LevyTriplet,
    RadialDensity,
    StableIsotropic,
    ZeroMeasure,
    levy_integral,
    symmetrize_atoms,
    total_mass,
    validate_triplet,
)
from .model import Model, load_model, parse_model
from .montecarlo import (
    MCReport,
    SamplerSpec,
    empirical_characteristic_function,
    sample_increments,
    verify_characteristic_function,
    verify_semigroup_mc,
)
from .operators import (
    GeneratorSpec,
    apply_generator,
    apply_resolvent,
    apply_semigroup,
    bounded_jump_norm_check,
    direct_generator,
    resolvent_residual,
)
from .spectrum import (
    SpectrumReport,
    atom_sharpness_check,
    classify_spectrum,
    eigen_oracle,
    range_of_symbol,
)
from .symbol import (
    BernsteinFunction,
    Symbol,
    closed_form_preset,
    eval_symbol,
    quadrature_symbol,
    sup_symbol,
)

__version__ = "0.1.0"
