"""Abstract Base Classes (ABCs) for scaling limit families."""

import abc

import numpy as np


class LimitFamily(metaclass=abc.ABCMeta):
    """Base class for the Gaussian limit random fields.

    Families are defined in the canonical frame (``q1 <= q2``, congruous
    ``B`` with ``b21 = 0``). Public evaluators take points in user
    coordinates and map them through the frame of the classification.
    """

    def __init__(self, family, regime, hurst_pair=None):
        self.family = family
        self.regime = regime
        self._hurst_pair = hurst_pair

    @property
    def frame(self):
        return self.regime.frame

    @property
    def hurst_pair(self):
        """FBS Hurst pair in user coordinates, ``None`` if not an FBS."""

        if self._hurst_pair is None:
            return None
        return self._hurst_pair[::-1] if self.frame.transposed else self._hurst_pair

    @property
    @abc.abstractmethod
    def matrix(self):
        """Defining matrix of the family in canonical coordinates."""

    @abc.abstractmethod
    def canonical_covariance(self, x, y):
        """Covariance of the family at canonical points ``x``, ``y``."""

    def canonical_covariance_by_quadrature(self, x, y):
        return self.canonical_covariance(x, y)

    def _canonical(self, x):
        return tuple(float(v) for v in self.frame.to_canonical_x(x))

    def covariance(self, x, y):
        return self.canonical_covariance(self._canonical(x), self._canonical(y))

    def covariance_by_quadrature(self, x, y):
        """Covariance by numerical integration of the defining expression."""

        return self.canonical_covariance_by_quadrature(self._canonical(x), self._canonical(y))

    def variance(self, x):
        return self.covariance(x, x)

    def covariance_matrix(self, points):
        points = [tuple(p) for p in points]
        matrix = np.empty((len(points), len(points)))
        for i, x in enumerate(points):
            for j in range(i, len(points)):
                matrix[i, j] = matrix[j, i] = self.covariance(x, points[j])
        return matrix

    @property
    def sigma2(self):
        """Variance constant at ``x = (1, 1)``."""

        return self.variance((1.0, 1.0))

    def __repr__(self):
        return "<%s %s>" % (type(self).__name__, self.family.value)
