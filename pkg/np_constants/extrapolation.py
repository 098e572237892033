import logging

import numpy as np
from django.conf import settings
from numpy.polynomial import polynomial as P

from np_constants.exceptions import InsufficientRange
from np_constants.models import LimitFit

logger = logging.getLogger(__name__)

MIN_RADIUS_FACTOR = 50.0
MIN_RADII = 4


def extraction_radii(scale: float, r_extent: float = np.inf) -> np.ndarray:
    """Radii r_j = r_0 2^j, pushed below ``r_extent`` when it is finite."""
    lab = settings.LAB
    count = lab["EXTRACTION_RADII"]
    radii = lab["EXTRACTION_RADIUS_FACTOR"] * scale * 2.0 ** np.arange(count)
    if radii[-1] > r_extent:
        radii = r_extent * 2.0 ** (np.arange(count) - (count - 1))
        radii = radii[radii >= MIN_RADIUS_FACTOR * scale]
    if radii.size < MIN_RADII:
        raise InsufficientRange(
            f"fewer than {MIN_RADII} extraction radii above "
            f"{MIN_RADIUS_FACTOR * scale:g} fit below r = {r_extent:g}"
        )
    return radii


def extrapolate_limit(radii, values, degree: int = 3) -> LimitFit:
    """Fit values(r) by polynomials in 1/r of degree ``degree`` and one less.

    The limit is the constant term of the higher fit; the spread between
    the two constant terms is the error bar.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    r0 = radii[0]
    x = r0 / radii
    high = P.polyfit(x, values, degree)
    low = P.polyfit(x, values, degree - 1)
    coefficients = high * r0 ** np.arange(degree + 1)
    noise = 16 * np.finfo(float).eps * np.abs(values).max(initial=0.0)
    fit = LimitFit(
        value=float(high[0]),
        error=float(abs(high[0] - low[0]) + noise),
        coefficients=tuple(float(c) for c in coefficients),
        radii=tuple(float(r) for r in radii),
    )
    logger.debug(
        "Extrapolated limit %.16g +- %.3g from %d radii",
        fit.value,
        fit.error,
        radii.size,
    )
    return fit


def tail_integral(fit: LimitFit, r: float) -> float:
    """2 int_r^oo y(r')/r'^2 dr' for y given by the fit in powers of 1/r."""
    return float(
        sum(
            2.0 * c * r ** (-k - 1) / (k + 1)
            for k, c in enumerate(fit.coefficients)
        )
    )
