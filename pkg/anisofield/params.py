"""
    anisofield.params
    -----------------

    Model parameters, derived exponents and the classification of the
    parameter region into scaling regimes.

    The regime formulas are written for ``q1 < q2``. Inputs
    with ``q1 > q2`` are brought to that form by swapping the rows of ``B``,
    and congruous inputs whose dependence axis is the vertical lattice axis
    are brought to the standard congruous form by transposing the lattice.
    :class:`CanonicalFrame` records both swaps; everything this module returns
    is expressed back in user coordinates.

    :copyright: (c) 2026, anisofield authors.
    :license: BSD, see LICENSE for details.
"""

import dataclasses
import enum
import logging
import typing

import numpy as np

from anisofield import errors
from anisofield.kernel import AngularSpec


__all__ = [
    "BOUNDARY_TOL",
    "CanonicalFrame",
    "ExponentSet",
    "Family",
    "Innovation",
    "LimitLabel",
    "ModelParams",
    "Region",
    "RegimeClassification",
    "canonical_frame",
    "classify_regime",
    "derive_exponents",
    "scaling_exponent",
    "theory_table",
]

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-6


class Innovation(str, enum.Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        value = {"centered-uniform": "uniform"}.get(value, value)
        try:
            return cls(value)
        except ValueError:
            raise errors.ConfigError("unknown innovation law: '%s'" % value) from None


class Region(str, enum.Enum):
    R_BOTH_GT = "R_BOTH_GT"
    R_MIXED_12 = "R_MIXED_12"
    R_MIXED_21 = "R_MIXED_21"
    R_BOTH_LT = "R_BOTH_LT"
    EQ_SMALL = "EQ_SMALL"
    EQ_LARGE = "EQ_LARGE"


class Family(str, enum.Enum):
    """Labels of the limit random fields.

    ``VT`` families integrate the kernel over the rectangle (the "tilde"
    families), ``V`` families integrate the rectangle indicator against the
    kernel. Digits name the defining matrix.
    """

    VT00 = "Vt00"
    VT01 = "Vt01"
    VT02 = "Vt02"
    VT11 = "Vt11"
    VT20 = "Vt20"
    VT21 = "Vt21"
    VT22 = "Vt22"
    VT0 = "Vt0"
    V0 = "V0"
    V01 = "V01"
    V10 = "V10"
    V20 = "V20"
    V11 = "V11"
    V21 = "V21"
    V22 = "V22"

    @property
    def tilde(self):
        return self.value.startswith("Vt")


@dataclasses.dataclass(frozen=True)
class ExponentSet:
    q1: float
    q2: float
    Q: float
    q_tilde1: float
    q_tilde2: float
    Q_tilde1: float
    Q_tilde2: float
    H_tilde1: float
    H_tilde2: float
    H1: float
    H2: float

    def as_dict(self):
        return dataclasses.asdict(self)


def derive_exponents(q1, q2, boundary_tol=BOUNDARY_TOL):
    """Derive every exponent of the model from ``(q1, q2)``."""

    if not (q1 > 0 and q2 > 0):
        raise errors.OutOfRegion(
            "q1 and q2 must be positive, got ('%s', '%s')" % (q1, q2), q1=q1, q2=q2
        )

    Q = 1.0 / q1 + 1.0 / q2
    if not 1.0 < Q < 2.0:
        raise errors.OutOfRegion(
            "q1/q2 outside the long-range region: Q = '%s' not in (1, 2)" % Q, Q=Q
        )
    if min(Q - 1.0, 2.0 - Q) <= boundary_tol:
        raise errors.BoundaryParameter("Q = '%s' is on the region boundary" % Q, Q=Q)
    if q1 != q2 and abs(q1 / q2 - 1.0) <= boundary_tol:
        raise errors.BoundaryParameter(
            "q1/q2 = '%s' is neither 1 nor separated from it" % (q1 / q2)
        )

    Q_tilde = (Q - 0.5 / q1, Q - 0.5 / q2)
    for index, value in enumerate(Q_tilde, start=1):
        if abs(value - 1.0) <= boundary_tol:
            raise errors.BoundaryParameter(
                "Q_tilde%d = '%s' is on the boundary 1" % (index, value),
                index=index,
                value=value,
            )

    return ExponentSet(
        q1=q1,
        q2=q2,
        Q=Q,
        q_tilde1=q1 * (2.0 - Q),
        q_tilde2=q2 * (2.0 - Q),
        Q_tilde1=Q_tilde[0],
        Q_tilde2=Q_tilde[1],
        H_tilde1=1.0 - 0.5 * q1 * (2.0 - Q),
        H_tilde2=1.0 - 0.5 * q2 * (2.0 - Q),
        H1=0.5 + q1 * (Q - 1.0),
        H2=0.5 + q2 * (Q - 1.0),
    )


@dataclasses.dataclass(frozen=True)
class ModelParams:
    q1: float
    q2: float
    B: typing.Tuple[typing.Tuple[float, float], typing.Tuple[float, float]]
    angular: AngularSpec = AngularSpec.constant(1.0)
    innovation: Innovation = Innovation.GAUSSIAN
    b0: float = 0.0
    M: int = 64
    boundary_tol: float = BOUNDARY_TOL

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        if B.shape != (2, 2) or not np.all(np.isfinite(B)):
            raise errors.ConfigError("B must be a finite 2x2 matrix, got '%s'" % (self.B,))
        object.__setattr__(self, "B", tuple(tuple(float(v) for v in row) for row in B))
        object.__setattr__(self, "innovation", Innovation.parse(self.innovation))

        if np.linalg.det(B) == 0.0:
            raise errors.DegenerateMatrix("B is singular: '%s'" % (self.B,))
        if self.M < 0:
            raise errors.ConfigError("truncation radius must be nonnegative: '%s'" % self.M)
        derive_exponents(self.q1, self.q2, self.boundary_tol)

    @classmethod
    def from_config(cls, model):
        return cls(
            q1=float(model["q1"]),
            q2=float(model["q2"]),
            B=model.get("B", ((1.0, 0.0), (0.0, 1.0))),
            angular=AngularSpec.from_config(model.get("angular", {})),
            innovation=model.get("innovation", Innovation.GAUSSIAN),
            b0=float(model.get("b0", 0.0)),
            M=int(model.get("M", 64)),
            boundary_tol=float(model.get("boundary_tol", BOUNDARY_TOL)),
        )

    def as_config(self):
        return {
            "q1": self.q1,
            "q2": self.q2,
            "B": [list(row) for row in self.B],
            "angular": self.angular.as_config(),
            "innovation": self.innovation.value,
            "b0": self.b0,
            "M": self.M,
            "boundary_tol": self.boundary_tol,
        }

    @property
    def matrix(self):
        return np.array(self.B, dtype=float)

    @property
    def exponents(self):
        return derive_exponents(self.q1, self.q2, self.boundary_tol)


@dataclasses.dataclass(frozen=True)
class CanonicalFrame:
    """Coordinates in which ``q1 <= q2`` and a congruous ``B`` has ``b21 = 0``.

    ``swapped_rows`` means the user had ``q1 > q2`` and the rows of ``B`` (the
    kernel coordinates) were exchanged. ``transposed`` means the lattice
    coordinates were exchanged as well; user rectangles ``(x1, x2)`` then map
    to ``(x2, x1)`` and aspect exponents ``gamma`` to ``1 / gamma``.
    """

    q1: float
    q2: float
    B: typing.Tuple[typing.Tuple[float, float], typing.Tuple[float, float]]
    swapped_rows: bool
    transposed: bool

    @property
    def matrix(self):
        return np.array(self.B, dtype=float)

    def to_canonical_x(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., ::-1] if self.transposed else x

    def to_canonical_u(self, u):
        """Map canonical kernel coordinates to user kernel coordinates."""

        u = np.asarray(u, dtype=float)
        return u[..., ::-1] if self.swapped_rows else u


def canonical_frame(q1, q2, B):
    B = np.array(B, dtype=float)
    swapped_rows = q1 > q2
    if swapped_rows:
        q1, q2 = q2, q1
        B = B[::-1, :]

    transposed = q1 != q2 and B[1, 0] != 0.0 and B[1, 1] == 0.0
    if transposed:
        B = B[:, ::-1]

    return CanonicalFrame(
        q1=q1,
        q2=q2,
        B=tuple(tuple(float(v) for v in row) for row in B),
        swapped_rows=swapped_rows,
        transposed=transposed,
    )


@dataclasses.dataclass(frozen=True)
class LimitLabel:
    family: Family
    hurst_pair: typing.Optional[typing.Tuple[float, float]] = None
    transposed: bool = False

    def as_dict(self):
        return {
            "family": self.family.value,
            "hurst_pair": list(self.hurst_pair) if self.hurst_pair else None,
            "transposed": self.transposed,
        }


@dataclasses.dataclass(frozen=True)
class RegimeClassification:
    region: Region
    congruous: bool
    gamma0: float
    limit_plus: LimitLabel
    limit_minus: LimitLabel
    limit_crit: LimitLabel
    frame: CanonicalFrame
    exponents: ExponentSet
    canonical_exponents: ExponentSet

    def as_dict(self):
        return {
            "region": self.region.value,
            "congruous": self.congruous,
            "gamma0": self.gamma0,
            "limit_plus": self.limit_plus.as_dict(),
            "limit_minus": self.limit_minus.as_dict(),
            "limit_crit": self.limit_crit.as_dict(),
            "swapped_rows": self.frame.swapped_rows,
            "transposed": self.frame.transposed,
        }


def _region(exps):
    if exps.q1 == exps.q2:
        return Region.EQ_SMALL if exps.q1 < 1.5 else Region.EQ_LARGE
    above = (exps.Q_tilde1 > 1.0, exps.Q_tilde2 > 1.0)
    return {
        (True, True): Region.R_BOTH_GT,
        (False, True): Region.R_MIXED_12,
        (True, False): Region.R_MIXED_21,
        (False, False): Region.R_BOTH_LT,
    }[above]


def _canonical_limits(exps, congruous):
    """Unbalanced and critical limits for ``q1 <= q2`` in canonical coordinates."""

    if exps.q1 == exps.q2:
        if exps.q1 < 1.5:
            Ht = exps.H_tilde1
            return (Family.VT02, (1.0, Ht)), (Family.VT01, (Ht, 1.0)), Family.VT0
        H = exps.H1
        return (Family.V10, (H, 0.5)), (Family.V20, (0.5, H)), Family.V0

    if exps.Q_tilde1 > 1.0:
        plus = (Family.VT22, (1.0, exps.H_tilde2))
        if congruous:
            return plus, (Family.VT11, (exps.H_tilde1, 1.0)), Family.VT00
        return plus, (Family.VT21, (exps.H_tilde2, 1.0)), Family.VT20

    plus = (Family.V11, (exps.H1, 0.5))
    if not congruous:
        return plus, (Family.V21, (0.5, exps.H1)), Family.V01
    if exps.Q_tilde2 > 1.0:
        return plus, (Family.VT11, (exps.H_tilde1, 1.0)), Family.VT00
    return plus, (Family.V22, (0.5, exps.H2)), Family.VT00


def classify_regime(params):
    """Classify the parameter region, the scaling type and the limits."""

    exps = params.exponents
    frame = canonical_frame(params.q1, params.q2, params.B)
    canonical = derive_exponents(frame.q1, frame.q2, params.boundary_tol)

    B = frame.matrix
    congruous = bool(B[1, 0] == 0.0 or B[1, 1] == 0.0)
    if frame.q1 == frame.q2:
        gamma0 = 1.0
    elif congruous:
        gamma0 = frame.q1 / frame.q2
    else:
        gamma0 = 1.0

    plus, minus, crit = _canonical_limits(canonical, congruous and frame.q1 != frame.q2)
    if frame.transposed:
        # gamma > gamma0 in user coordinates is gamma' < gamma0' after transposition.
        gamma0 = 1.0 / gamma0
        plus, minus = minus, plus
        plus = (plus[0], plus[1][::-1])
        minus = (minus[0], minus[1][::-1])

    regime = RegimeClassification(
        region=_region(exps),
        congruous=congruous,
        gamma0=gamma0,
        limit_plus=LimitLabel(plus[0], plus[1], frame.transposed),
        limit_minus=LimitLabel(minus[0], minus[1], frame.transposed),
        limit_crit=LimitLabel(crit, None, frame.transposed),
        frame=frame,
        exponents=exps,
        canonical_exponents=canonical,
    )
    logger.debug(
        "classified q = ('%s', '%s') as '%s', gamma0 = '%s'",
        params.q1,
        params.q2,
        regime.region.value,
        gamma0,
    )
    return regime


def scaling_exponent(regime, exps, gamma):
    """Normalization exponent ``H(gamma)`` of rectangle partial sums."""

    if (exps.q1, exps.q2) != (regime.exponents.q1, regime.exponents.q2):
        raise ValueError("exponents do not belong to the classified parameters")
    if not gamma > 0:
        raise ValueError("gamma must be positive, got '%s'" % gamma)

    label = regime.limit_plus if gamma >= regime.gamma0 else regime.limit_minus
    H1, H2 = label.hurst_pair
    return H1 + gamma * H2


def theory_table(regime, exps, gamma_grid):
    """Theory curve with the active limit per ``gamma``."""

    rows = []
    for gamma in gamma_grid:
        if gamma > regime.gamma0:
            label = regime.limit_plus
        elif gamma < regime.gamma0:
            label = regime.limit_minus
        else:
            label = regime.limit_crit
        rows.append(
            {
                "gamma": float(gamma),
                "H": scaling_exponent(regime, exps, gamma),
                "family": label.family.value,
            }
        )
    return rows
