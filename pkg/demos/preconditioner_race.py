"""Race the block preconditioners inside conjugate gradients on one 2D
problem and compare iteration counts with the analytic condition bounds.

Run:  python3 demos/preconditioner_race.py
"""

import time

import numpy as np

from sgprecond import (
    DiscreteProblem,
    MultiIndexSet,
    build_mesh,
    build_preconditioner,
    load_vector,
    mu_from_exprs,
    pcg,
    legendre,
    sample_coefficients,
    splitting_bounds_complete,
    mean_based_bounds,
)

mesh = build_mesh(2, (20, 20))
exprs = ["1", "0.3*sin(1*pi*x1)", "0.3*sin(2*pi*x2)", "0.3*sin(2*pi*x1)"]
field = sample_coefficients(exprs, mesh)
mu, _ = mu_from_exprs(exprs, mesh, refine=64)
iset = MultiIndexSet.complete(3, 4)
problem = DiscreteProblem.build(legendre(), iset, mesh, field)
print(f"problem size {problem.operator.shape[0]}, dominance ratio mu = {mu:.4f}")

rhs = np.zeros(problem.operator.shape[0])
rhs[: mesh.n_interior] = load_vector(mesh, "1")

mb = mean_based_bounds(legendre(), iset, mu)
sb = splitting_bounds_complete(legendre(), 4, mu)
bounds = {
    "mean_based": mb.kappa_bound,
    "splitting_complete": sb.kappa_bound,
    "gs2": sb.gs2_kappa_bound,
}

print(f"{'preconditioner':<20} {'cond. bound':>12} {'iterations':>11} {'seconds':>9}")
for kind in ("mean_based", "splitting_complete", "gs2"):
    m = build_preconditioner(problem, kind)
    start = time.perf_counter()
    _x, iterations, history = pcg(problem.operator, m, rhs, tol=1e-10)
    elapsed = time.perf_counter() - start
    print(f"{kind:<20} {bounds[kind]:>12.3f} {iterations:>11d} {elapsed:>9.3f}")

print("\nsmaller guaranteed condition numbers buy fewer iterations;")
print("the two-block Gauss-Seidel sweep pays more per application instead.")
