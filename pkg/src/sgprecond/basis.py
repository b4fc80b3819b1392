"""Multi-index sets for the polynomial chaos bases and the sparse coupling
matrices assembled over them.

Two basis kinds are supported: tensor-product sets with per-variable order
caps s_k (indices enumerated with the first coordinate changing fastest) and
complete sets with a total-degree cap s-1 (indices sorted by total degree,
ties broken by decreasing first coordinate, then decreasing second, and so
on).  Both orderings are deterministic so that assembled matrices are
reproducible entry for entry.
"""

from __future__ import annotations

from math import comb, prod, sqrt

import numpy as np
import scipy.sparse as sp

from .errors import ParameterDomainError, SizeError, UsageError
from .orthopoly import RecurrenceFamily

__all__ = [
    "MultiIndexSet",
    "StochasticMatrix",
    "make_index_set",
    "assemble_G",
    "assemble_G_tilde",
]

DEFAULT_SIZE_CAP = 2_000_000

TENSOR = "tensor"
COMPLETE = "complete"


def _degree_level(nvars: int, degree: int):
    """Multi-indices of total degree ``degree``, first coordinate decreasing."""
    if nvars == 1:
        yield (degree,)
        return
    for lead in range(degree, -1, -1):
        for rest in _degree_level(nvars - 1, degree - lead):
            yield (lead, *rest)


class MultiIndexSet:
    """Ordered set of K-variate polynomial degree multi-indices."""

    def __init__(self, kind, indices, orders=None, order=None):
        self.kind = kind
        self.indices = indices
        self.orders = orders
        self.order = order
        self._positions = None

    @classmethod
    def tensor(cls, orders, cap=DEFAULT_SIZE_CAP):
        orders = tuple(int(s) for s in orders)
        if len(orders) < 1 or any(s < 1 for s in orders):
            raise ParameterDomainError("tensor orders must be a nonempty sequence of s_k >= 1")
        size = prod(orders)
        if size > cap:
            raise SizeError(f"tensor basis size {size} exceeds cap {cap}")
        rows = np.empty((size, len(orders)), dtype=np.int64)
        pos = 0
        # first coordinate fastest
        for tail in np.ndindex(*orders[::-1]):
            rows[pos] = tail[::-1]
            pos += 1
        return cls(TENSOR, rows, orders=orders)

    @classmethod
    def complete(cls, nvars, order, cap=DEFAULT_SIZE_CAP):
        nvars = int(nvars)
        order = int(order)
        if nvars < 1 or order < 1:
            raise ParameterDomainError("complete basis needs K >= 1 and s >= 1")
        size = comb(nvars + order - 1, nvars)
        if size > cap:
            raise SizeError(f"complete basis size {size} exceeds cap {cap}")
        rows = np.empty((size, nvars), dtype=np.int64)
        pos = 0
        for degree in range(order):
            for tup in _degree_level(nvars, degree):
                rows[pos] = tup
                pos += 1
        return cls(COMPLETE, rows, order=order)

    @property
    def nvars(self) -> int:
        return self.indices.shape[1]

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    @property
    def max_order(self) -> int:
        """The s that controls mean-based bounds: max(s_k) for tensor sets,
        the total-degree cap s for complete sets."""
        if self.kind == TENSOR:
            return max(self.orders)
        return self.order

    def total_degrees(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    def position(self, tup) -> int | None:
        if self._positions is None:
            self._positions = {tuple(row): i for i, row in enumerate(self.indices.tolist())}
        return self._positions.get(tuple(tup))

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        if self.kind == TENSOR:
            return f"MultiIndexSet(tensor, orders={self.orders}, size={self.size})"
        return f"MultiIndexSet(complete, K={self.nvars}, order={self.order}, size={self.size})"


def make_index_set(kind, *, orders=None, nvars=None, order=None, cap=DEFAULT_SIZE_CAP) -> MultiIndexSet:
    """Dispatching constructor used by configuration code."""
    if kind == TENSOR:
        if orders is None:
            raise ParameterDomainError("tensor basis requires per-variable orders")
        return MultiIndexSet.tensor(orders, cap=cap)
    if kind == COMPLETE:
        if nvars is None or order is None:
            raise ParameterDomainError("complete basis requires nvars and order")
        return MultiIndexSet.complete(nvars, order, cap=cap)
    raise ParameterDomainError(f"unknown basis kind {kind!r}")


class StochasticMatrix:
    """Sparse symmetric coupling matrix of one coordinate over a basis.

    Entry (i, j) is nonzero only when the two multi-indices differ by exactly
    one in coordinate k and agree elsewhere; its value is
    sqrt(beta_{min(i_k, j_k) + 1}).  Coordinate 0 denotes the identity.
    """

    def __init__(self, k: int, mat: sp.csr_matrix):
        mat = mat.tocsr()
        mat.sort_indices()
        self.k = k
        self.mat = mat

    @property
    def size(self) -> int:
        return self.mat.shape[0]

    @property
    def nnz(self) -> int:
        return self.mat.nnz

    def toarray(self) -> np.ndarray:
        return self.mat.toarray()

    def to_coordinate_text(self) -> str:
        """Coordinate-triplet text dump: a size/nnz header line followed by
        one '<row> <col> <value>' line per stored entry (1-based indices,
        17 significant digits)."""
        coo = self.mat.tocoo()
        lines = [f"{self.size} {self.size} {coo.nnz}"]
        order = np.lexsort((coo.col, coo.row))
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            lines.append(f"{r + 1} {c + 1} {v:.17g}")
        return "\n".join(lines) + "\n"


def _couplings(family: RecurrenceFamily, index_set: MultiIndexSet, k: int, skip):
    """COO triplets for coordinate k, omitting pairs where ``skip`` holds."""
    rows = []
    cols = []
    vals = []
    col = k - 1
    for i, tup in enumerate(index_set.indices.tolist()):
        if skip is not None and skip(tup):
            continue
        up = list(tup)
        up[col] += 1
        j = index_set.position(up)
        if j is None:
            continue
        v = sqrt(family.beta(tup[col] + 1))
        rows += [i, j]
        cols += [j, i]
        vals += [v, v]
    n = index_set.size
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def assemble_G(family: RecurrenceFamily, index_set: MultiIndexSet, k: int) -> StochasticMatrix:
    """Coupling matrix of coordinate k over the basis (identity for k = 0)."""
    if k < 0 or k > index_set.nvars:
        raise ParameterDomainError(f"coordinate {k} outside 0..{index_set.nvars}")
    if k == 0:
        return StochasticMatrix(0, sp.identity(index_set.size, format="csr"))
    return StochasticMatrix(k, _couplings(family, index_set, k, None))


def assemble_G_tilde(
    family: RecurrenceFamily, index_set: MultiIndexSet, k: int, variant: str
) -> StochasticMatrix:
    """Annihilated coupling matrix used by the splitting preconditioners.

    variant "tensor": only valid for tensor sets and k = K; removes the
    single coupling between the two highest orders of the last coordinate.
    variant "complete": only valid for complete sets and k >= 1; removes
    every coupling between total degree s-2 and total degree s-1.
    """
    if variant == TENSOR:
        if index_set.kind != TENSOR or k != index_set.nvars:
            raise UsageError("tensor splitting applies to tensor sets and the last coordinate")
        top = index_set.orders[-1] - 2

        def skip(tup, _top=top, _col=k - 1):
            return tup[_col] == _top

    elif variant == COMPLETE:
        if index_set.kind != COMPLETE or k < 1 or k > index_set.nvars:
            raise UsageError("complete splitting applies to complete sets and k >= 1")
        top = index_set.order - 2

        def skip(tup, _top=top):
            return sum(tup) == _top

    else:
        raise UsageError(f"unknown splitting variant {variant!r}")
    return StochasticMatrix(k, _couplings(family, index_set, k, skip))
