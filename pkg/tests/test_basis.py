import math

import numpy as np
import pytest
import scipy.sparse as sp

from sgprecond.basis import MultiIndexSet, assemble_G, assemble_G_tilde, make_index_set
from sgprecond.errors import ParameterDomainError, SizeError, UsageError
from sgprecond.orthopoly import chebyshev_u, gegenbauer, hermite, jacobi_matrix, legendre

B1 = 1 / math.sqrt(3)
B2 = 2 / math.sqrt(15)


class TestIndexSets:
    def test_tensor_ordering_first_coordinate_fastest(self):
        s = MultiIndexSet.tensor((3, 3))
        assert s.size == 9
        assert s.indices[0].tolist() == [0, 0]
        assert s.indices[1].tolist() == [1, 0]
        assert s.indices[3].tolist() == [0, 1]

    def test_complete_ordering_by_degree(self):
        s = MultiIndexSet.complete(2, 3)
        assert s.size == 6
        assert s.indices.tolist() == [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]

    def test_complete_univariate(self):
        s = MultiIndexSet.complete(1, 4)
        assert s.indices.tolist() == [[0], [1], [2], [3]]

    def test_sizes(self):
        assert MultiIndexSet.tensor((2, 3, 4)).size == 24
        assert MultiIndexSet.complete(3, 4).size == math.comb(6, 3)

    def test_no_duplicates_and_degree_caps(self):
        for s in (MultiIndexSet.tensor((2, 4, 3)), MultiIndexSet.complete(3, 5)):
            rows = [tuple(r) for r in s.indices.tolist()]
            assert len(set(rows)) == len(rows)
        t = MultiIndexSet.tensor((2, 4, 3))
        assert np.all(t.indices < np.array([2, 4, 3]))
        c = MultiIndexSet.complete(3, 5)
        assert c.total_degrees().max() == 4

    def test_cap(self):
        with pytest.raises(SizeError):
            MultiIndexSet.tensor((2000, 2000))
        with pytest.raises(SizeError):
            MultiIndexSet.complete(30, 30)

    def test_validation(self):
        with pytest.raises(ParameterDomainError):
            MultiIndexSet.tensor(())
        with pytest.raises(ParameterDomainError):
            MultiIndexSet.complete(0, 2)

    def test_dispatcher(self):
        assert make_index_set("tensor", orders=(2, 2)).size == 4
        assert make_index_set("complete", nvars=2, order=3).size == 6
        with pytest.raises(ParameterDomainError):
            make_index_set("other")


class TestAssembleG:
    def test_identity(self):
        s = MultiIndexSet.complete(2, 3)
        g0 = assemble_G(legendre(), s, 0)
        assert (g0.mat != sp.identity(6, format="csr")).nnz == 0

    def test_tensor_matches_kronecker(self):
        fam = legendre()
        s = MultiIndexSet.tensor((3, 3))
        j = sp.csr_matrix(jacobi_matrix(fam, 3).toarray())
        eye = sp.identity(3, format="csr")
        assert abs(assemble_G(fam, s, 1).mat - sp.kron(eye, j)).max() == 0.0
        assert abs(assemble_G(fam, s, 2).mat - sp.kron(j, eye)).max() == 0.0

    def test_tensor_matches_kronecker_three_vars(self):
        fam = gegenbauer(2.0)
        orders = (2, 3, 4)
        s = MultiIndexSet.tensor(orders)
        mats = [sp.csr_matrix(jacobi_matrix(fam, o).toarray()) for o in orders]
        eyes = [sp.identity(o, format="csr") for o in orders]
        for k in range(1, 4):
            factors = [mats[i] if i == k - 1 else eyes[i] for i in range(3)]
            expect = sp.kron(sp.kron(factors[2], factors[1]), factors[0])
            assert abs(assemble_G(fam, s, k).mat - expect).max() == pytest.approx(0.0, abs=1e-15)

    def test_complete_example_entries(self):
        fam = legendre()
        s = MultiIndexSet.complete(2, 3)
        g2 = assemble_G(fam, s, 2).toarray()
        expect = np.zeros((6, 6))
        expect[0, 2] = expect[2, 0] = B1
        expect[1, 4] = expect[4, 1] = B1
        expect[2, 5] = expect[5, 2] = B2
        assert np.allclose(g2, expect, atol=1e-15)

    def test_complete_is_submatrix_of_tensor(self):
        for fam in (legendre(), hermite(), chebyshev_u()):
            for nvars, order in [(2, 2), (2, 3), (3, 3), (3, 2)]:
                comp = MultiIndexSet.complete(nvars, order)
                full = MultiIndexSet.tensor((order,) * nvars)
                inject = [full.position(tuple(row)) for row in comp.indices.tolist()]
                for k in range(nvars + 1):
                    small = assemble_G(fam, comp, k).toarray()
                    big = assemble_G(fam, full, k).toarray()
                    assert np.allclose(small, big[np.ix_(inject, inject)], atol=1e-15)

    def test_tensor_nonzero_count(self):
        fam = legendre()
        orders = (4, 3, 2)
        s = MultiIndexSet.tensor(orders)
        n = s.size
        for k, sk in enumerate(orders, start=1):
            g = assemble_G(fam, s, k)
            assert g.nnz == 2 * n * (sk - 1) // sk

    def test_symmetry_and_coupling_values(self):
        fam = hermite()
        s = MultiIndexSet.complete(3, 4)
        for k in range(1, 4):
            g = assemble_G(fam, s, k).toarray()
            assert np.array_equal(g, g.T)
            idx = s.indices
            for i in range(s.size):
                for j in range(s.size):
                    if g[i, j] != 0.0:
                        diff = idx[j] - idx[i]
                        assert abs(diff[k - 1]) == 1 and np.sum(np.abs(diff)) == 1
                        low = min(idx[i][k - 1], idx[j][k - 1])
                        assert g[i, j] == pytest.approx(math.sqrt(fam.beta(low + 1)), abs=1e-15)

    def test_coordinate_out_of_range(self):
        s = MultiIndexSet.complete(2, 2)
        with pytest.raises(ParameterDomainError):
            assemble_G(legendre(), s, 3)


class TestAssembleGTilde:
    def test_tensor_variant_zeroes_top_coupling(self):
        fam = legendre()
        s = MultiIndexSet.tensor((3, 3))
        jt = jacobi_matrix(fam, 3).toarray()
        jt[1, 2] = jt[2, 1] = 0.0
        expect = sp.kron(sp.csr_matrix(jt), sp.identity(3, format="csr"))
        got = assemble_G_tilde(fam, s, 2, "tensor")
        assert abs(got.mat - expect).max() == pytest.approx(0.0, abs=1e-15)

    def test_complete_variant_zeroes_top_degree_couplings(self):
        fam = legendre()
        s = MultiIndexSet.complete(2, 3)
        gt1 = assemble_G_tilde(fam, s, 1, "complete").toarray()
        expect = np.zeros((6, 6))
        expect[0, 1] = expect[1, 0] = B1  # degree 0-1 coupling kept
        assert np.allclose(gt1, expect, atol=1e-15)

    def test_degenerate_order_keeps_everything(self):
        fam = legendre()
        s = MultiIndexSet.complete(2, 1)
        gt = assemble_G_tilde(fam, s, 1, "complete")
        assert gt.nnz == 0 and gt.size == 1
        t = MultiIndexSet.tensor((2, 1))
        gt2 = assemble_G_tilde(fam, t, 2, "tensor")
        assert abs(gt2.mat - assemble_G(fam, t, 2).mat).max() == 0.0

    def test_sparsity_contained_in_original(self):
        fam = chebyshev_u()
        s = MultiIndexSet.complete(3, 4)
        for k in range(1, 4):
            g = assemble_G(fam, s, k).toarray() != 0.0
            gt = assemble_G_tilde(fam, s, k, "complete").toarray() != 0.0
            assert np.all(g | ~gt)

    def test_variant_mismatch(self):
        comp = MultiIndexSet.complete(2, 3)
        tens = MultiIndexSet.tensor((3, 3))
        with pytest.raises(UsageError):
            assemble_G_tilde(legendre(), comp, 1, "tensor")
        with pytest.raises(UsageError):
            assemble_G_tilde(legendre(), tens, 1, "tensor")  # only the last coordinate
        with pytest.raises(UsageError):
            assemble_G_tilde(legendre(), tens, 1, "complete")
        with pytest.raises(UsageError):
            assemble_G_tilde(legendre(), comp, 0, "complete")

    def test_shifted_identity_stays_semidefinite(self):
        # I +- mu_bar * J has no negative eigenvalues for the top admissible mu
        from sgprecond.orthopoly import mu_bar

        for fam in (legendre(), chebyshev_u(), gegenbauer(2.0), hermite()):
            for order in (2, 3, 5):
                top = min(mu_bar(fam, "complete", order), 1.0)
                j = jacobi_matrix(fam, order).toarray()
                for sign in (1.0, -1.0):
                    w = np.linalg.eigvalsh(np.eye(order) + sign * top * j)
                    assert w.min() >= -1e-12


class TestCoordinateText:
    def test_round_trip_values(self):
        fam = legendre()
        s = MultiIndexSet.complete(2, 3)
        g = assemble_G(fam, s, 1)
        text = g.to_coordinate_text()
        lines = text.strip().splitlines()
        n, m, nnz = (int(x) for x in lines[0].split())
        assert (n, m, nnz) == (6, 6, g.nnz)
        rebuilt = np.zeros((n, m))
        for line in lines[1:]:
            i, j, v = line.split()
            rebuilt[int(i) - 1, int(j) - 1] = float(v)
        assert np.array_equal(rebuilt, g.toarray())
