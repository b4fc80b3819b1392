"""Shared constructions for the test suite."""

import numpy as np
import scipy.linalg

from sgprecond.basis import MultiIndexSet
from sgprecond.fem import CoefficientField, build_mesh, compute_mu
from sgprecond.operator import DiscreteProblem
from sgprecond.orthopoly import jacobi_matrix


def dense_h_matrix(family, mu, s, sign=+1):
    """Dense coarse/detail comparison matrix of order s:
    inv(I + sign*mu*Jhat) @ (I + sign*mu*J) with Jhat the Jacobi matrix of
    order s-1 padded by a zero row/column."""
    j = jacobi_matrix(family, s).toarray()
    jhat = np.zeros_like(j)
    jhat[: s - 1, : s - 1] = jacobi_matrix(family, max(s - 1, 1)).toarray() if s > 1 else 0.0
    left = np.eye(s) + sign * mu * jhat
    right = np.eye(s) + sign * mu * j
    return scipy.linalg.solve(left, right)


def random_field(rng, nterms, n_elements, target_mu):
    """Coefficient field with a_0 in [0.5, 2] and fluctuations scaled so the
    elementwise dominance ratio equals target_mu."""
    a0 = rng.uniform(0.5, 2.0, size=n_elements)
    fluct = rng.uniform(-1.0, 1.0, size=(nterms, n_elements))
    current = np.max(np.abs(fluct).sum(axis=0) / a0)
    if current == 0.0:
        fluct[0, 0] = a0[0]
        current = 1.0
    fluct *= target_mu / current
    return CoefficientField(np.vstack([a0[None, :], fluct]))


def random_instance(rng, family, max_vars=3, max_order=4, target_mu=None):
    """A small random problem: mesh, index set and coefficient field."""
    nterms = int(rng.integers(1, max_vars + 1))
    if rng.random() < 0.5:
        iset = MultiIndexSet.complete(nterms, int(rng.integers(1, max_order + 1)))
    else:
        orders = tuple(int(rng.integers(1, max_order + 1)) for _ in range(nterms))
        iset = MultiIndexSet.tensor(orders)
    if rng.random() < 0.5:
        mesh = build_mesh(1, int(rng.integers(2, 10)))
    else:
        mesh = build_mesh(2, (3, 3))
    if target_mu is None:
        target_mu = rng.uniform(0.1, 0.9)
    field = random_field(rng, nterms, mesh.n_elements, target_mu)
    return mesh, iset, field


def dense_pencil_extremes(problem: DiscreteProblem, m_dense):
    """Extreme eigenvalues of the pencil (A, M) by a dense solve."""
    a = problem.operator.assemble_dense(cap=4000)
    w = scipy.linalg.eigh(a, m_dense, eigvals_only=True)
    return float(w[0]), float(w[-1])


def dense_preconditioner_matrix(problem: DiscreteProblem, prec):
    """Materialize a preconditioner by applying it to the identity columns."""
    n = problem.operator.shape[0]
    cols = [prec.matvec(col) for col in np.eye(n)]
    return np.column_stack(cols)


__all__ = [
    "dense_h_matrix",
    "random_field",
    "random_instance",
    "dense_pencil_extremes",
    "dense_preconditioner_matrix",
    "compute_mu",
]
