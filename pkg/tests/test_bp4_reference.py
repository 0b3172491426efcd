import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scalarbp.bp4_reference import VectorBp4, collapse, decode_bp4_vector, horizontal_vector
from scalarbp.code_factory import builtin_code
from scalarbp.pauli_core import ANTICOMMUTE, CheckMatrix, PauliString, X, Y, Z, syndrome

from _instances import random_priors, random_stabilizer_code


def normalized(v):
    v = np.asarray(v, dtype=float)
    return v / v.sum()


class TestHorizontalVector:
    # check XYI restricted to its support {1, 2}: paulis (X, Y)
    paulis = [X, Y]
    q2 = np.array([0.7, 0.1, 0.1, 0.1])

    def test_commuting_syndrome(self):
        q = np.array([[0.25] * 4, self.q2])
        r = horizontal_vector(q, self.paulis, 0)
        np.testing.assert_allclose(normalized(r[0]), normalized([0.8, 0.8, 0.2, 0.2]), atol=1e-15)

    def test_anticommuting_syndrome_is_complement(self):
        q = np.array([[0.25] * 4, self.q2])
        r = horizontal_vector(q, self.paulis, 1)
        np.testing.assert_allclose(normalized(r[0]), normalized([0.2, 0.2, 0.8, 0.8]), atol=1e-15)

    def test_weight_one_check(self):
        for pauli, z in itertools.product((X, Y, Z), (0, 1)):
            r = horizontal_vector(np.array([[0.4, 0.3, 0.2, 0.1]]), [pauli], z)
            expected = [1.0 if ANTICOMMUTE[w, pauli] == z else 0.0 for w in range(4)]
            assert r[0].tolist() == expected

    def test_row_weight_bound(self):
        with pytest.raises(ValueError):
            horizontal_vector(np.full((13, 4), 0.25), [X] * 13, 0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 1), st.integers(0, 2**32 - 1))
    def test_collapse_matches_delta_product(self, k, z, seed):
        rng = np.random.default_rng(seed)
        q = rng.dirichlet(np.ones(4), size=k)
        paulis = rng.integers(1, 4, size=k)
        r = horizontal_vector(q, paulis, z)
        d = np.array([collapse(q[i], paulis[i])[0] - collapse(q[i], paulis[i])[1] for i in range(k)])
        for i in range(k):
            delta = (-1) ** z * np.prod(np.delete(d, i))
            r0, r1 = collapse(r[i], paulis[i])
            assert r0 == pytest.approx((1 + delta) / 2, abs=1e-10)
            assert r1 == pytest.approx((1 - delta) / 2, abs=1e-10)


class TestDecodeVector:
    def test_zero_syndrome(self):
        S = builtin_code("five_qubit")
        p = np.tile([0.99, 0.01 / 3, 0.01 / 3, 0.01 / 3], (5, 1))
        out = decode_bp4_vector(S, np.zeros(4, dtype=int), p)
        assert out.converged and out.iterations == 1
        assert out.estimate.is_identity()

    def test_five_qubit_single_x(self):
        S = builtin_code("five_qubit")
        eps = 0.1
        p = np.tile([1 - eps, eps / 3, eps / 3, eps / 3], (5, 1))
        z = syndrome(S, "XIIII")
        out = decode_bp4_vector(S, z, p, max_iter=12)
        assert out.converged
        assert np.array_equal(syndrome(S, out.estimate), z)

    def test_fig2_one_iteration_marginals(self):
        S = builtin_code("fig2_toy")
        p = np.tile([0.7, 0.1, 0.1, 0.1], (3, 1))
        st_ = VectorBp4(S, [0, 0], p)
        st_.iterate("parallel")
        # qubit 1 sits on XYI (partner qubit 2 with Y) and ZZY (partners 2 with Z, 3 with Y)
        r_a = normalized([0.8, 0.8, 0.2, 0.2])  # X on qubit 1, partner Y prior mass (I+Y) = 0.8
        d2, d3 = 0.8 - 0.2, 0.8 - 0.2
        over = (1 + d2 * d3) / 2
        r_b = normalized([over, 1 - over, 1 - over, over])  # Z on qubit 1
        expected = normalized(p[0] * r_a * r_b)
        np.testing.assert_allclose(st_.marginals()[0], expected, atol=1e-14)

    def test_messages_normalized(self):
        rng = np.random.default_rng(4)
        S = random_stabilizer_code(rng, max_n=7)
        p = random_priors(rng, S.num_qubits)
        st_ = VectorBp4(S, rng.integers(0, 2, S.num_checks), p)
        for sched in ("parallel", "serial", "parallel"):
            st_.iterate(sched)
            np.testing.assert_allclose(st_.q.sum(axis=1), 1.0, atol=1e-12)
            assert (st_.q >= 0).all()

    def test_contradictory_check_counts_zero_message(self):
        # each check demands X or Y on qubit 0, whose prior allows only I, so
        # the vertical product on qubit 0 vanishes for every W
        S = CheckMatrix.from_strings(["ZZI", "ZIZ"])
        p = np.tile([1.0, 0.0, 0.0, 0.0], (3, 1))
        st_ = VectorBp4(S, [1, 1], p)
        st_.iterate()
        assert st_.zero_messages >= 1
        assert np.isfinite(st_.marginals()).all()

    def test_dimension_errors(self):
        S = builtin_code("fig2_toy")
        with pytest.raises(ValueError):
            decode_bp4_vector(S, [0], np.full((3, 4), 0.25))
        with pytest.raises(ValueError):
            decode_bp4_vector(S, [0, 0], np.full((2, 4), 0.25))
        with pytest.raises(ValueError):
            decode_bp4_vector(S, [0, 0], np.full((3, 4), 0.25), max_iter=0)


def test_estimate_type():
    S = builtin_code("fig2_toy")
    out = decode_bp4_vector(S, [0, 0], np.tile([0.7, 0.1, 0.1, 0.1], (3, 1)))
    assert isinstance(out.estimate, PauliString)
    assert str(out.estimate) == "III"
