"""Posterior mean bounds under a constant-mean prior near-ignorance set.

Instead of one constant prior mean, the model carries the whole set of
constants M*h (M >= 0, h = +/-1) with covariance inflated by (1 + M) / c,
indexed by a single degree of imprecision c > 0.  Those set parameters are
eliminated analytically; the resulting upper/lower posterior means need only
the base kernel matrix terms already cached on a fitted :class:`GpModel`:

    central(x) = k_x' K^-1 y + (1 - k_x' s_k) * (s_k' y / S_k)

which is exactly the estimated-constant kriging mean.  Which bound pair
applies does not depend on x:

    near-ignorance case (1):  |s_k' y / S_k| <= 1 + c / S_k
        upper/lower = central(x) +/- c |1 - k_x' s_k| / S_k

    extreme case (2):         otherwise
        upper = central(x) + c (1 - k_x' s_k) / S_k        (no absolute value)
        lower = k_x' K^-1 y + (1 - k_x' s_k) * s_k' y / (c + S_k)

As c -> 0 both bounds collapse to the precise estimated-constant prediction.
In case (2) the printed formulas can produce upper < lower when
1 - k_x' s_k < 0 or the targets' GLS mean is strongly negative; widths are
clamped at zero and every clamp is counted on the spec's diagnostics rather
than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve

from .errors import DimensionMismatchError
from .gp import GpModel
from .kernels import kernel_matrix, _as_points

CASE_NEAR_IGNORANCE = "near-ignorance-case-1"
CASE_EXTREME = "extreme-case-2"


@dataclass
class ClampDiagnostics:
    """Counts how often a negative case-2 width was clamped to zero."""

    events: int = 0

    def bump(self, n: int = 1) -> None:
        self.events += n


@dataclass(frozen=True)
class ImpreciseGpSpec:
    """Degree of imprecision c attached to a fitted GP.

    The case split is x-independent, so it is evaluated once here and
    cached.  diagnostics is shared mutable state counting clamp events.
    """

    c: float
    model: GpModel
    diagnostics: ClampDiagnostics = field(default_factory=ClampDiagnostics)
    case: str = field(init=False)

    def __post_init__(self):
        c = float(self.c)
        if not math.isfinite(c) or c <= 0.0:
            raise ValueError(f"degree of imprecision must be positive, got {c}")
        object.__setattr__(self, "c", c)
        m = self.model
        gls_mean = float(m.s_k @ m.y) / m.S_k
        if abs(gls_mean) <= 1.0 + c / m.S_k:
            object.__setattr__(self, "case", CASE_NEAR_IGNORANCE)
        else:
            object.__setattr__(self, "case", CASE_EXTREME)


@dataclass(frozen=True)
class MeanBounds:
    lower: float
    upper: float
    width: float
    case: str


def case_condition(spec: ImpreciseGpSpec) -> str:
    """Which bound pair applies (cached; the condition does not involve x)."""
    return spec.case


def _terms(spec: ImpreciseGpSpec, X: np.ndarray):
    """Shared per-point quantities: k_x' K^-1 y and k_x' s_k for each row."""
    m = spec.model
    Kx = kernel_matrix(m.kernel, m.X, X)  # (n, q)
    ky = cho_solve((m.K.cholesky, True), m.y) @ Kx  # k_x' K^-1 y
    ksk = m.s_k @ Kx
    return ky, ksk


def mean_width_batch(spec: ImpreciseGpSpec, X) -> np.ndarray:
    """Upper minus lower posterior mean at each row of X, clamped at zero."""
    m = spec.model
    X = _as_points(X, m.dimension, "evaluation points")
    _, ksk = _terms(spec, X)
    one_minus = 1.0 - ksk
    if spec.case == CASE_NEAR_IGNORANCE:
        return 2.0 * spec.c * np.abs(one_minus) / m.S_k
    sy = float(m.s_k @ m.y)
    factor = sy / m.S_k + spec.c / m.S_k - sy / (spec.c + m.S_k)
    width = one_minus * factor
    negative = width < 0.0
    if np.any(negative):
        spec.diagnostics.bump(int(np.count_nonzero(negative)))
        width = np.where(negative, 0.0, width)
    return width


def mean_width(spec: ImpreciseGpSpec, x) -> float:
    """Width of the posterior mean bounds at a single point."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != spec.model.dimension:
        raise DimensionMismatchError(spec.model.dimension, x.shape[0])
    return float(mean_width_batch(spec, x[None, :])[0])


def mean_bounds(spec: ImpreciseGpSpec, x) -> MeanBounds:
    """Lower/upper posterior mean at a single point.

    If the case-2 formulas cross (upper < lower), both bounds collapse to
    their midpoint and the event is counted, keeping width consistent with
    :func:`mean_width`.
    """
    m = spec.model
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != m.dimension:
        raise DimensionMismatchError(m.dimension, x.shape[0])
    ky, ksk = _terms(spec, x[None, :])
    ky, ksk = float(ky[0]), float(ksk[0])
    one_minus = 1.0 - ksk
    sy = float(m.s_k @ m.y)
    if spec.case == CASE_NEAR_IGNORANCE:
        central = ky + one_minus * sy / m.S_k
        half = spec.c * abs(one_minus) / m.S_k
        lower, upper = central - half, central + half
    else:
        upper = ky + one_minus * sy / m.S_k + spec.c * one_minus / m.S_k
        lower = ky + one_minus * sy / (spec.c + m.S_k)
        if upper < lower:
            spec.diagnostics.bump()
            lower = upper = 0.5 * (lower + upper)
    return MeanBounds(lower=lower, upper=upper, width=upper - lower, case=spec.case)
