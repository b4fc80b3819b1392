"""Show the block anatomy of a small assembled operator: the coupling
matrices over tensor-product and complete bases, their annihilated variants,
and the sparsity patterns of the block preconditioners.

Run:  python3 demos/small_operator_anatomy.py
"""

import numpy as np

from sgprecond import (
    DiscreteProblem,
    MultiIndexSet,
    assemble_G,
    assemble_G_tilde,
    build_mesh,
    build_preconditioner,
    legendre,
    sample_coefficients,
)


def pattern(mat, cut=None):
    mat = np.asarray(mat)
    lines = []
    for i, row in enumerate(mat):
        cells = "".join(" X" if abs(v) > 1e-14 else " ." for v in row)
        lines.append(cells)
        if cut is not None and i + 1 == cut and cut < len(mat):
            lines.append("-" * (2 * len(row)))
    return "\n".join(lines)


fam = legendre()

print("tensor basis with orders (3, 3): first coordinate changes fastest")
tset = MultiIndexSet.tensor((3, 3))
print(f"  indices: {[tuple(r) for r in tset.indices.tolist()]}")
print("\ncoupling matrix of the second coordinate:")
print(pattern(assemble_G(fam, tset, 2).toarray()))
print("\nits annihilated variant drops the top-order coupling:")
print(pattern(assemble_G_tilde(fam, tset, 2, "tensor").toarray()))

print("\ncomplete basis with total order 3 groups indices by degree:")
cset = MultiIndexSet.complete(2, 3)
print(f"  indices: {[tuple(r) for r in cset.indices.tolist()]}")
g1 = assemble_G(fam, cset, 1)
print("\ncoupling matrix of the first coordinate and its annihilated variant:")
print(pattern(g1.toarray()))
print()
print(pattern(assemble_G_tilde(fam, cset, 1, "complete").toarray()))

mesh = build_mesh(1, 4)
field = sample_coefficients(["1", "0.4", "0.25"], mesh)
problem = DiscreteProblem.build(fam, cset, mesh, field)
a = problem.operator.assemble_dense()
print(f"\nassembled operator: {a.shape[0]} unknowns "
      f"({cset.size} basis polynomials x {mesh.n_interior} interior nodes)")

for kind in ("mean_based", "splitting_complete", "gs2"):
    m = build_preconditioner(problem, kind)
    mat = np.column_stack([m.matvec(col) for col in np.eye(a.shape[0])])
    print(f"\n{kind} preconditioner pattern:")
    print(pattern(mat, cut=m.split_index))

print("\ncoordinate text dump of the first coupling matrix:")
print(g1.to_coordinate_text())
