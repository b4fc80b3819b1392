"""Guaranteed two-sided spectral bounds for the preconditioned operators,
and a brute-force per-element oracle that computes the sharp equivalence
constants for a concrete coefficient field.

All analytic bounds depend only on the dominance ratio mu, the polynomial
family and the basis orders.  They are valid for every admissible
coefficient field with that mu, hence they enclose the per-element oracle
values, which in turn enclose the true eigenvalues of the preconditioned
operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .basis import COMPLETE, TENSOR, MultiIndexSet, assemble_G, assemble_G_tilde
from .errors import DominanceError, ParameterDomainError, SizeError, UsageError
from .fem import CoefficientField
from .operator import (
    GAUSS_SEIDEL_2,
    MEAN_BASED,
    SPLITTING_COMPLETE,
    SPLITTING_TP,
    TRUNCATED_TP,
)
from .orthopoly import RecurrenceFamily, d_sequence, max_root

__all__ = [
    "SpectralBounds",
    "ClassicalBounds",
    "mean_based_bounds",
    "classical_bounds",
    "truncated_bounds",
    "splitting_bounds_tp",
    "splitting_bounds_complete",
    "cbs_and_gs2",
    "element_equivalence_oracle",
]

ORACLE_CAP = 600

_SPLITTING_KINDS = (SPLITTING_TP, SPLITTING_COMPLETE)


@dataclass(frozen=True)
class SpectralBounds:
    """Equivalence constants c_lower <= spectrum(M^-1 A) <= c_upper.

    ``vacuous`` marks a nonpositive lower constant: the factorized
    preconditioner can still exist but the bound carries no information and
    kappa_bound is +inf.  For splitting kinds, cbs_gamma bounds the
    strengthened Cauchy-Schwarz constant of the two subspaces and
    gs2_kappa_bound = 1/(1 - cbs_gamma^2) bounds the two-block Gauss-Seidel
    condition number; t_arg is the block order attaining the extremes.
    """

    kind: str
    c_lower: float
    c_upper: float
    vacuous: bool
    kappa_bound: float
    cbs_gamma: float | None = None
    gs2_kappa_bound: float | None = None
    t_arg: int | None = None


@dataclass(frozen=True)
class ClassicalBounds:
    c_lower: float
    c_upper: float
    vacuous: bool
    kappa_bound: float


def _symmetric_bounds(kind: str, reach: float) -> SpectralBounds:
    c_lo = 1.0 - reach
    c_hi = 1.0 + reach
    vacuous = not c_lo > 0.0
    kappa = math.inf if vacuous else c_hi / c_lo
    return SpectralBounds(kind, c_lo, c_hi, vacuous, kappa)


def mean_based_bounds(family: RecurrenceFamily, index_set: MultiIndexSet, mu: float) -> SpectralBounds:
    """Bounds for the block-diagonal mean preconditioner: 1 -+ mu times the
    largest root at the highest order appearing in the basis."""
    if mu < 0.0:
        raise ParameterDomainError("mu must be nonnegative")
    return _symmetric_bounds(MEAN_BASED, mu * max_root(family, index_set.max_order))


def classical_bounds(family: RecurrenceFamily, index_set: MultiIndexSet, mu_class: float) -> ClassicalBounds:
    """Counterpart bounds from the global-norm dominance ratio."""
    if mu_class < 0.0:
        raise ParameterDomainError("mu_class must be nonnegative")
    reach = mu_class * max_root(family, index_set.max_order)
    c_lo = 1.0 - reach
    c_hi = 1.0 + reach
    vacuous = not c_lo > 0.0
    return ClassicalBounds(c_lo, c_hi, vacuous, math.inf if vacuous else c_hi / c_lo)


def truncated_bounds(family: RecurrenceFamily, s_last: int, mu: float) -> SpectralBounds:
    """Bounds for the preconditioner that drops the last expansion term of a
    tensor-product basis; controlled by the last coordinate's order only."""
    if mu < 0.0:
        raise ParameterDomainError("mu must be nonnegative")
    if s_last < 1:
        raise ParameterDomainError("order must be >= 1")
    return _symmetric_bounds(TRUNCATED_TP, mu * max_root(family, s_last))


def cbs_and_gs2(b: SpectralBounds) -> SpectralBounds:
    """Fill the Cauchy-Schwarz constant bound and the two-block Gauss-Seidel
    condition bound from splitting constants."""
    if b.kind not in _SPLITTING_KINDS:
        raise UsageError("CBS/GS2 quantities only apply to splitting bounds")
    gamma = b.c_upper - 1.0
    return replace(b, cbs_gamma=gamma, gs2_kappa_bound=1.0 / (1.0 - gamma * gamma))


def splitting_bounds_tp(family: RecurrenceFamily, s_last: int, mu: float) -> SpectralBounds:
    """Bounds for the two-block splitting of a tensor-product basis along the
    top order of the last coordinate."""
    if s_last < 1:
        raise ParameterDomainError("order must be >= 1")
    if s_last == 1:
        b = SpectralBounds(SPLITTING_TP, 1.0, 1.0, False, 1.0, t_arg=1)
        return cbs_and_gs2(b)
    d_last = float(d_sequence(family, mu, s_last).values[-1])
    r = math.sqrt(max(1.0 - d_last, 0.0))
    b = SpectralBounds(SPLITTING_TP, 1.0 - r, 1.0 + r, False,
                       (1.0 + r) / (1.0 - r), t_arg=s_last)
    return cbs_and_gs2(b)


def splitting_bounds_complete(family: RecurrenceFamily, order: int, mu: float) -> SpectralBounds:
    """Bounds for the two-block splitting of a complete basis at its top
    total degree; the extremes sweep the comparison blocks of every order
    t <= s and are attained at the smallest pivot."""
    if order < 1:
        raise ParameterDomainError("order must be >= 1")
    if order == 1:
        b = SpectralBounds(SPLITTING_COMPLETE, 1.0, 1.0, False, 1.0, t_arg=1)
        return cbs_and_gs2(b)
    pivots = d_sequence(family, mu, order).values
    t = int(np.argmin(pivots)) + 1  # ties resolve to the smaller order
    r = math.sqrt(max(1.0 - float(pivots[t - 1]), 0.0))
    b = SpectralBounds(SPLITTING_COMPLETE, 1.0 - r, 1.0 + r, False,
                       (1.0 + r) / (1.0 - r) if r < 1.0 else math.inf, t_arg=t)
    return cbs_and_gs2(b)


def _tilde_terms(family, index_set, values, kind):
    """Dense (coefficient, matrix) pairs of the preconditioner side of the
    per-element comparison, for one element's coefficients ``values``."""
    nvars = index_set.nvars
    n = index_set.size
    eye = np.eye(n)
    if kind == MEAN_BASED:
        return values[0] * eye
    if kind == TRUNCATED_TP:
        if index_set.kind != TENSOR:
            raise UsageError("truncated comparison requires a tensor-product basis")
        out = values[0] * eye
        for k in range(1, nvars):
            out += values[k] * assemble_G(family, index_set, k).toarray()
        return out
    if kind == SPLITTING_TP:
        if index_set.kind != TENSOR:
            raise UsageError("tensor splitting comparison requires a tensor-product basis")
        out = values[0] * eye
        for k in range(1, nvars):
            out += values[k] * assemble_G(family, index_set, k).toarray()
        out += values[nvars] * assemble_G_tilde(family, index_set, nvars, TENSOR).toarray()
        return out
    if kind == SPLITTING_COMPLETE:
        if index_set.kind != COMPLETE:
            raise UsageError("complete splitting comparison requires a complete basis")
        out = values[0] * eye
        for k in range(1, nvars + 1):
            out += values[k] * assemble_G_tilde(family, index_set, k, COMPLETE).toarray()
        return out
    raise UsageError(f"no per-element comparison for preconditioner kind {kind!r}")


def element_equivalence_oracle(
    family: RecurrenceFamily,
    index_set: MultiIndexSet,
    field: CoefficientField,
    kind: str,
    cap: int = ORACLE_CAP,
) -> tuple[float, float]:
    """Sharp per-element equivalence constants for a concrete field.

    For every element, solves the dense generalized eigenproblem between the
    element's coupling combination and its preconditioner-side counterpart,
    and returns the global (min, max).  These constants are what lifts to
    the full operator, so they always sit inside the analytic bounds and
    outside the true eigenvalues.
    """
    if kind == GAUSS_SEIDEL_2:
        raise UsageError("the per-element oracle applies to block-diagonal kinds only")
    if index_set.size > cap:
        raise SizeError(f"oracle needs a dense basis solve; {index_set.size} > cap {cap}")
    if field.nterms != index_set.nvars:
        raise UsageError("field and basis disagree on the number of variables")
    gs = [assemble_G(family, index_set, k).toarray() for k in range(index_set.nvars + 1)]
    lo = math.inf
    hi = -math.inf
    for j in range(field.n_elements):
        values = field.values[:, j]
        lhs = sum(values[k] * gs[k] for k in range(len(gs)))
        rhs = _tilde_terms(family, index_set, values, kind)
        try:
            np.linalg.cholesky(rhs)
        except np.linalg.LinAlgError:
            raise DominanceError(
                f"preconditioner comparison matrix is not positive definite on element {j}",
                index=j,
            ) from None
        w = scipy.linalg.eigh(lhs, rhs, eigvals_only=True)
        lo = min(lo, float(w[0]))
        hi = max(hi, float(w[-1]))
    return lo, hi
