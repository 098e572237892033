"""Custom metric functions loadable from run configurations.

A custom metric is any object with vectorised ``D``, ``dD`` and ``d2D``
methods and a ``mass`` attribute; ``beta``, ``d_coeffs`` and ``D_offset``
are optional. Configurations name the class by dotted path, e.g.
``"geometry.metrics.HaywardMetric"``.
"""

import numpy as np


class HaywardMetric:
    """D(r) = 1 - 2M r^2 / (r^3 + b^3).

    Regular at the centre. For b above 2^(5/3) M / 3 there is no horizon
    (Case II), below it the outer root of D is a non-degenerate horizon.
    """

    beta = 2.0

    def __init__(self, mass: float = 1.0, core: float = 1.5):
        self.mass = float(mass)
        self.core = float(core)
        self.d_coeffs = (-2.0 * self.mass, 0.0, 0.0)

    def D(self, r):
        r = np.asarray(r, dtype=float)
        return 1.0 - 2.0 * self.mass * r**2 / (r**3 + self.core**3)

    def dD(self, r):
        r = np.asarray(r, dtype=float)
        b3 = self.core**3
        return 2.0 * self.mass * r * (r**3 - 2.0 * b3) / (r**3 + b3) ** 2

    def d2D(self, r):
        r = np.asarray(r, dtype=float)
        b3 = self.core**3
        s = r**3 + b3
        return (
            2.0
            * self.mass
            * (-2.0 * r**6 + 14.0 * b3 * r**3 - 2.0 * b3**2)
            / s**3
        )
