"""Exception types raised by levyspec."""


class LevySpecError(Exception):
    """Base class for all library errors."""


class BadParameter(LevySpecError, ValueError):
    pass


class OriginAtom(LevySpecError, ValueError):
    """An atom was placed at the origin, where a Levy measure carries no mass."""


class DivergentMeasure(LevySpecError):
    """The integrability condition on the Levy measure fails."""


class QuadratureFailure(LevySpecError):
    """Adaptive quadrature did not reach the requested tolerance."""


class SpectrumProximity(LevySpecError):
    """Resolvent requested at a point that lies (numerically) in the spectrum."""

    def __init__(self, lam, distance, margin):
        self.lam = lam
        self.distance = distance
        self.margin = margin
        super().__init__(
            f"lambda={lam!r} lies within {distance:.3g} of the spectrum "
            f"(safety margin {margin:.3g})"
        )


class NotFinite(LevySpecError):
    """The Levy measure has infinite total mass."""


class AtomOffGrid(LevySpecError):
    pass


class UnsupportedMeasure(LevySpecError):
    """No sampler exists for the requested measure."""


class MismatchedModel(LevySpecError):
    pass


class ModelError(LevySpecError):
    """A model file could not be parsed into a valid triplet."""
