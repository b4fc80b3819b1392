"""Classical orthogonal polynomial recurrences and the small-matrix spectral
machinery built on them.

The symmetric families (Hermite, Legendre, Chebyshev second kind, Gegenbauer)
all have three-term recurrences with zero diagonal terms, so their Jacobi
matrices are determined by the offdiagonal entries sqrt(beta_n) alone.  The
eigenvalues of the order-s Jacobi matrix are the roots of the degree-s
polynomial; together with the squared last components of its eigenvectors they
form the quadrature rule that evaluates corner entries of resolvent-like
matrix functions.  The pivot sequence d_1..d_s of I + mu*J drives the
splitting-preconditioner bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DominanceError, ParameterDomainError

__all__ = [
    "RecurrenceFamily",
    "JacobiMatrix",
    "GaussRule",
    "DSequence",
    "hermite",
    "legendre",
    "chebyshev_u",
    "gegenbauer",
    "family_from_name",
    "recurrence_coeffs",
    "jacobi_matrix",
    "tridiag_eigenvalues",
    "max_root",
    "gauss_rule",
    "d_sequence",
    "d_last_via_quadrature",
    "h_extreme_eigs",
    "mu_bar",
]

HERMITE = "hermite"
LEGENDRE = "legendre"
CHEBYSHEV_U = "chebyshev_u"
GEGENBAUER = "gegenbauer"

_KINDS = (HERMITE, LEGENDRE, CHEBYSHEV_U, GEGENBAUER)


@dataclass(frozen=True)
class RecurrenceFamily:
    """A symmetric orthonormal polynomial family: alpha_n = 0 for all n and an
    explicit rule for beta_n.

    Legendre and Chebyshev (second kind) coincide with the Gegenbauer family
    at shape parameters 1/2 and 1 respectively; they are kept as separate
    kinds so that their exact beta formulas are used.
    """

    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterDomainError(f"unknown family kind {self.kind!r}")
        if self.kind == GEGENBAUER:
            if self.gamma is None or not self.gamma > -0.5:
                raise ParameterDomainError(
                    f"gegenbauer shape parameter must exceed -1/2, got {self.gamma}"
                )
        elif self.gamma is not None:
            raise ParameterDomainError(f"{self.kind} takes no shape parameter")

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == HERMITE:
            return (-math.inf, math.inf)
        return (-1.0, 1.0)

    @property
    def label(self) -> str:
        if self.kind == GEGENBAUER:
            return f"gegenbauer(gamma={self.gamma:g})"
        return self.kind

    def gegenbauer_gamma(self) -> float | None:
        """Shape parameter of the equivalent Gegenbauer family, or None for
        Hermite (which is not of Gegenbauer type)."""
        if self.kind == LEGENDRE:
            return 0.5
        if self.kind == CHEBYSHEV_U:
            return 1.0
        if self.kind == GEGENBAUER:
            return self.gamma
        return None

    def alpha(self, n: int) -> float:
        if n < 0:
            raise ParameterDomainError("recurrence index must be nonnegative")
        return 0.0

    def beta(self, n: int) -> float:
        if n < 1:
            raise ParameterDomainError("recurrence index must be >= 1")
        if self.kind == HERMITE:
            return n / 2.0
        if self.kind == CHEBYSHEV_U:
            return 0.25
        if self.kind == LEGENDRE:
            return n * n / ((2.0 * n - 1.0) * (2.0 * n + 1.0))
        g = self.gamma
        if n == 1:
            # (2g) / ((2g)(2 + 2g)) with the common factor cancelled, which
            # also covers the g -> 0 limit.
            return 1.0 / (2.0 + 2.0 * g)
        return (n + 2.0 * g - 1.0) * n / ((2.0 * n - 2.0 + 2.0 * g) * (2.0 * n + 2.0 * g))


def hermite() -> RecurrenceFamily:
    return RecurrenceFamily(HERMITE)


def legendre() -> RecurrenceFamily:
    return RecurrenceFamily(LEGENDRE)


def chebyshev_u() -> RecurrenceFamily:
    return RecurrenceFamily(CHEBYSHEV_U)


def gegenbauer(gamma: float) -> RecurrenceFamily:
    return RecurrenceFamily(GEGENBAUER, float(gamma))


def family_from_name(name: str, gamma: float | None = None) -> RecurrenceFamily:
    """Build a family from its configuration name."""
    name = name.strip().lower()
    if name == GEGENBAUER:
        if gamma is None:
            raise ParameterDomainError("gegenbauer requires a gamma value")
        return gegenbauer(gamma)
    if gamma is not None:
        raise ParameterDomainError(f"{name} takes no gamma value")
    if name not in _KINDS:
        raise ParameterDomainError(f"unknown family name {name!r}")
    return RecurrenceFamily(name)


def recurrence_coeffs(family: RecurrenceFamily, n: int) -> tuple[float, float]:
    """Return (alpha_n, beta_n) for n >= 1."""
    return family.alpha(n), family.beta(n)


@dataclass(frozen=True)
class JacobiMatrix:
    """Symmetric tridiagonal matrix with zero diagonal and positive
    offdiagonal entries sqrt(beta_1), ..., sqrt(beta_{s-1})."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray

    @property
    def size(self) -> int:
        return self.diagonal.size

    def toarray(self) -> np.ndarray:
        a = np.diag(self.diagonal)
        if self.offdiagonal.size:
            a += np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)
        return a


def jacobi_matrix(family: RecurrenceFamily, s: int) -> JacobiMatrix:
    """Order-s Jacobi matrix of the family's orthonormal recurrence."""
    if s < 1:
        raise ParameterDomainError("matrix order must be >= 1")
    off = np.sqrt([family.beta(n) for n in range(1, s)]) if s > 1 else np.zeros(0)
    return JacobiMatrix(np.zeros(s), np.asarray(off, dtype=float))


def _tridiag_eig(diag, offdiag, vectors=False, tol=0.0, sweep_cap_factor=50):
    """Eigen decomposition of a symmetric tridiagonal matrix by the implicit
    shift QL iteration with Wilkinson shifts.

    Returns eigenvalues in ascending order and, when ``vectors`` is set, the
    matrix whose columns are the matching orthonormal eigenvectors.  Raises
    ConvergenceError after ``sweep_cap_factor * n`` QL sweeps.
    """
    d = np.array(diag, dtype=float, copy=True)
    n = d.size
    if n == 0:
        raise ParameterDomainError("empty matrix")
    e = np.zeros(n)
    if n > 1:
        e[: n - 1] = np.asarray(offdiag, dtype=float)
    z = np.eye(n) if vectors else None
    if n == 1:
        return d, z
    eps = np.finfo(float).eps
    scale = float(np.max(np.abs(d)) + np.max(np.abs(e)))
    floor = tol * scale if tol > 0.0 else 0.0
    cap = sweep_cap_factor * n
    sweeps = 0
    for low in range(n):
        while True:
            m = low
            while m < n - 1:
                neighborhood = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * neighborhood + floor:
                    break
                m += 1
            if m == low:
                break
            sweeps += 1
            if sweeps > cap:
                raise ConvergenceError(
                    f"tridiagonal QL iteration exceeded {cap} sweeps (n={n})"
                )
            g = (d[low + 1] - d[low]) / (2.0 * e[low])
            r = math.hypot(g, 1.0)
            g = d[m] - d[low] + e[low] / (g + math.copysign(r, g))
            s_rot = 1.0
            c_rot = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, low - 1, -1):
                f = s_rot * e[i]
                b = c_rot * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s_rot = f / r
                c_rot = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s_rot + 2.0 * c_rot * b
                p = s_rot * r
                d[i + 1] = g + p
                g = c_rot * r - b
                if z is not None:
                    col = z[:, i + 1].copy()
                    z[:, i + 1] = s_rot * z[:, i] + c_rot * col
                    z[:, i] = c_rot * z[:, i] - s_rot * col
            if underflow:
                continue
            d[low] -= p
            e[low] = g
            e[m] = 0.0
    order = np.argsort(d, kind="stable")
    d = d[order]
    if z is not None:
        z = z[:, order]
    return d, z


def tridiag_eigenvalues(matrix: JacobiMatrix, tol: float = 1e-14) -> np.ndarray:
    """All eigenvalues of a Jacobi matrix, sorted ascending."""
    if tol <= 0.0:
        raise ParameterDomainError("tolerance must be positive")
    values, _ = _tridiag_eig(matrix.diagonal, matrix.offdiagonal, tol=tol)
    return values


def max_root(family: RecurrenceFamily, s: int) -> float:
    """Largest root of the family's degree-s polynomial (0 for s = 1)."""
    if s == 1:
        return 0.0
    return float(tridiag_eigenvalues(jacobi_matrix(family, s))[-1])


@dataclass(frozen=True)
class GaussRule:
    """Nodes and weights of the quadrature generated by reading the
    recurrence backwards (offdiagonals reversed), evaluated without ever
    forming the reversed matrix: the nodes are the Jacobi eigenvalues and
    the weights the squared last components of its orthonormal eigenvectors.

    For these symmetric families the nodes coincide with the classical Gauss
    nodes and the weights are positive and sum to one.  Sums of
    weights[j] * f(nodes[j]) reproduce the corner entry e_s^T f(J) e_s for
    any f, which is what the splitting bounds need.
    """

    nodes: np.ndarray
    weights: np.ndarray


def gauss_rule(family: RecurrenceFamily, s: int) -> GaussRule:
    j = jacobi_matrix(family, s)
    values, z = _tridiag_eig(j.diagonal, j.offdiagonal, vectors=True)
    weights = z[-1, :] ** 2
    return GaussRule(values, weights)


@dataclass(frozen=True)
class DSequence:
    """Pivot sequence of the LDL^T factorization of I + mu*J: d_1 = 1 and
    d_j = 1 - mu^2 beta_{j-1} / d_{j-1}.  All pivots are positive exactly
    when mu * max_root(family, j) < 1 for every j up to s."""

    family: RecurrenceFamily
    mu: float
    values: np.ndarray


def d_sequence(family: RecurrenceFamily, mu: float, s: int) -> DSequence:
    if mu < 0.0:
        raise ParameterDomainError("mu must be nonnegative")
    if s < 1:
        raise ParameterDomainError("sequence length must be >= 1")
    vals = np.empty(s)
    vals[0] = 1.0
    musq = mu * mu
    for j in range(2, s + 1):
        d = 1.0 - musq * family.beta(j - 1) / vals[j - 2]
        if d <= 0.0:
            raise DominanceError(
                f"pivot d_{j} = {d:.3g} is nonpositive for {family.label} with mu={mu:g}",
                index=j,
            )
        vals[j - 1] = d
    return DSequence(family, mu, vals)


def d_last_via_quadrature(family: RecurrenceFamily, mu: float, s: int) -> float:
    """d_s evaluated through the quadrature identity
    1/d_s = sum_j w_j / (1 - mu^2 node_j^2), an independent route used to
    cross-check the pivot recursion."""
    if mu < 0.0:
        raise ParameterDomainError("mu must be nonnegative")
    rule = gauss_rule(family, s)
    denom = 1.0 - (mu * rule.nodes) ** 2
    if np.any(denom <= 0.0):
        j = int(np.argmin(denom))
        raise DominanceError(
            f"mu={mu:g} reaches a quadrature node of {family.label} (node {rule.nodes[j]:g})",
            index=j,
        )
    return float(1.0 / np.sum(rule.weights / denom))


def h_extreme_eigs(family: RecurrenceFamily, mu: float, s: int) -> tuple[float, float]:
    """Extreme eigenvalues (1 - sqrt(1-d_s), 1 + sqrt(1-d_s)) of the
    order-s coarse/detail comparison matrix; (1, 1) for s = 1."""
    if s < 1:
        raise ParameterDomainError("order must be >= 1")
    if s == 1:
        return (1.0, 1.0)
    d = float(d_sequence(family, mu, s).values[-1])
    r = math.sqrt(max(1.0 - d, 0.0))
    return (1.0 - r, 1.0 + r)


def mu_bar(family: RecurrenceFamily, basis_kind: str, orders) -> float:
    """Largest dominance ratio that still guarantees positive definiteness of
    the assembled operator.

    Beta-type families (Legendre, Chebyshev second kind, Gegenbauer) allow
    mu_bar = 1 because their roots stay inside (-1, 1).  For Hermite the
    bound shrinks with the polynomial order; the degenerate all-constant
    basis returns +inf, meaning unconstrained.
    """
    if family.kind != HERMITE:
        return 1.0
    if basis_kind == "tensor":
        m = sum(int(s) - 1 for s in orders)
    elif basis_kind == "complete":
        m = int(orders) - 1
    else:
        raise ParameterDomainError(f"unknown basis kind {basis_kind!r}")
    if m < 0:
        raise ParameterDomainError("orders must be >= 1")
    if m == 0:
        return math.inf
    return 1.0 / math.sqrt(2.0 * m)
