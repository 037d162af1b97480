"""
    anisofield
    ----------

    Long-range dependent linear random fields on the integer lattice with an
    oblique dependence axis: synthesis, exact covariance oracles, scaling
    limits and dependence axis estimation.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version(__name__)
except PackageNotFoundError:
    # package is not installed
    __version__ = None
