"""Thin wrapper over QUADPACK that turns unmet tolerances into exceptions."""

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureFailure


def integrate(func, a, b, *, epsabs=1e-10, epsrel=1e-10, limit=400, **kwargs):
    """Integrate ``func`` over ``[a, b]`` and return ``(value, abserr)``.

    QUADPACK flags (roundoff, slow convergence) are tolerated when the
    reported error estimate still meets the requested tolerance; otherwise
    a :class:`QuadratureFailure` is raised.  ``full_output`` keeps the call
    free of global warning-filter state so it is safe from worker threads.
    """
    out = quad(func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
               full_output=1, **kwargs)
    value, abserr = out[0], out[1]
    if not np.isfinite(value):
        raise QuadratureFailure(f"non-finite integral on [{a}, {b}]")
    if len(out) > 3:
        budget = max(epsabs, epsrel * abs(value))
        if abserr > budget:
            raise QuadratureFailure(
                f"quadrature on [{a}, {b}] stopped at error {abserr:.3g} "
                f"(target {budget:.3g}): {out[3]}"
            )
    return value, abserr
