import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_state, random_unitary
from ghzdense.statevec import (
    PureState,
    apply_single_qubit,
    apply_two_qubit,
    basis_state,
    equal_up_to_phase,
    inner_product,
    measure_qubit,
)
from ghzdense.protocol import prepare_ghz, purification_unitary

S = 1 / math.sqrt(2)
X = np.array([[0, 1], [1, 0]])
Z = np.array([[1, 0], [0, -1]])
PHI_PLUS = PureState(2, np.array([S, 0, 0, S]))
PHI_MINUS = PureState(2, np.array([S, 0, 0, -S]))
PSI_PLUS = PureState(2, np.array([0, S, S, 0]))


class TestBasisState:
    def test_single_zero(self):
        np.testing.assert_array_equal(basis_state(1, "0").amplitudes, [1, 0])

    @pytest.mark.parametrize("n,bits,index", [(2, "10", 2), (3, "111", 7), (4, "0010", 2)])
    def test_msb_first(self, n, bits, index):
        amps = basis_state(n, bits).amplitudes
        assert amps[index] == 1
        assert np.count_nonzero(amps) == 1

    @pytest.mark.parametrize("n,bits", [(0, ""), (27, "0" * 27), (2, "012"), (2, "1")])
    def test_rejects(self, n, bits):
        with pytest.raises(ValueError):
            basis_state(n, bits)


class TestApplySingleQubit:
    def test_pauli_flip(self):
        assert equal_up_to_phase(apply_single_qubit(basis_state(1, "0"), 1, X), basis_state(1, "1"))

    def test_z_on_bob_gives_phi_minus(self):
        out = apply_single_qubit(PHI_PLUS, 2, Z)
        np.testing.assert_allclose(out.amplitudes, PHI_MINUS.amplitudes, atol=1e-15)

    def test_x_on_bob_gives_psi_plus(self):
        out = apply_single_qubit(PHI_PLUS, 2, X)
        np.testing.assert_allclose(out.amplitudes, PSI_PLUS.amplitudes, atol=1e-15)

    def test_matches_bruteforce(self, rng):
        for n in (1, 2, 3, 5):
            psi = random_state(rng, n)
            for q in range(1, n + 1):
                u = random_unitary(rng, 2)
                got = apply_single_qubit(PureState(n, psi), q, u).amplitudes
                np.testing.assert_allclose(got, oracles.full_single(n, q, u) @ psi, atol=1e-12)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            apply_single_qubit(PHI_PLUS, 3, X)

    def test_non_unitary(self):
        with pytest.raises(ValueError, match="unitary"):
            apply_single_qubit(PHI_PLUS, 1, np.array([[1, 1], [0, 1]]))


class TestApplyTwoQubit:
    def test_identity(self):
        out = apply_two_qubit(basis_state(2, "00"), 1, 2, np.eye(4))
        np.testing.assert_array_equal(out.amplitudes, basis_state(2, "00").amplitudes)

    def test_purification_at_u_one_fixes_000(self):
        out = apply_two_qubit(basis_state(3, "000"), 1, 3, purification_unitary(1.0))
        np.testing.assert_allclose(out.amplitudes, basis_state(3, "000").amplitudes, atol=1e-15)

    def test_purification_output_amplitudes(self):
        theta = math.atan(0.5)
        c, s = math.cos(theta), math.sin(theta)
        pair = PureState(2, np.array([c, 0, 0, s]))
        joint = pair.tensor(basis_state(1, "0"))
        out = apply_two_qubit(joint, 1, 3, purification_unitary(math.tan(theta))).amplitudes
        expected = np.zeros(8)
        expected[0b000] = s
        expected[0b110] = s
        expected[0b101] = c * math.sqrt(1 - math.tan(theta) ** 2)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_matches_bruteforce(self, rng):
        for n in (2, 3, 4):
            psi = random_state(rng, n)
            for q1 in range(1, n + 1):
                for q2 in range(1, n + 1):
                    if q1 == q2:
                        continue
                    u = random_unitary(rng, 4)
                    got = apply_two_qubit(PureState(n, psi), q1, q2, u).amplitudes
                    want = oracles.full_two(n, q1, q2, u) @ psi
                    np.testing.assert_allclose(got, want, atol=1e-12)

    def test_collision(self):
        with pytest.raises(ValueError):
            apply_two_qubit(PHI_PLUS, 1, 1, np.eye(4))

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            apply_two_qubit(PHI_PLUS, 1, 3, np.eye(4))


class TestMeasureQubit:
    def test_ghz_pi_over_4(self):
        split = measure_qubit(prepare_ghz(3), 3, math.pi / 4)
        assert split.plus_probability == pytest.approx(0.5, abs=1e-15)
        assert split.minus_probability == pytest.approx(0.5, abs=1e-15)
        assert equal_up_to_phase(split.plus_state, PHI_PLUS, atol=1e-12)

    def test_ghz_computational(self):
        split = measure_qubit(prepare_ghz(3), 3, 0.0)
        assert split.plus_probability == pytest.approx(0.5)
        assert equal_up_to_phase(split.plus_state, basis_state(2, "00"))
        assert equal_up_to_phase(split.minus_state, basis_state(2, "11"))
        assert split.minus_state.amplitudes[3] == pytest.approx(-1.0)

    def test_born_rule_product(self):
        split = measure_qubit(basis_state(1, "0"), 1, math.pi / 3)
        assert split.plus_probability == pytest.approx(0.25, abs=1e-12)
        assert split.minus_probability == pytest.approx(0.75, abs=1e-12)
        assert split.plus_state.qubit_count == 0

    def test_zero_probability_branch_is_absent(self):
        split = measure_qubit(basis_state(2, "00"), 2, 0.0)
        assert split.minus_probability == 0.0
        assert split.minus_state is None
        assert split.plus_state is not None

    def test_matches_projection(self, rng):
        for n in (2, 3, 4):
            psi = random_state(rng, n)
            theta = rng.uniform(-math.pi, math.pi)
            c, s = math.cos(theta), math.sin(theta)
            for q in range(1, n + 1):
                split = measure_qubit(PureState(n, psi), q, theta)
                plus = oracles.project(psi, n, q, np.array([c, s]))
                p = np.vdot(plus, plus).real
                assert split.plus_probability == pytest.approx(p, abs=1e-12)
                np.testing.assert_allclose(split.plus_state.amplitudes, plus / math.sqrt(p), atol=1e-12)


class TestInnerProduct:
    def test_values(self):
        assert inner_product(basis_state(1, "0"), basis_state(1, "0")) == 1
        assert inner_product(basis_state(1, "0"), basis_state(1, "1")) == 0
        assert inner_product(PHI_PLUS, PSI_PLUS) == 0

    def test_mismatch(self):
        with pytest.raises(ValueError):
            inner_product(PHI_PLUS, basis_state(1, "0"))


# -- properties ---------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(1, 6)


@settings(max_examples=60, deadline=None)
@given(seeds, sizes)
def test_norm_preserved(seed, n):
    rng = np.random.default_rng(seed)
    state = PureState(n, random_state(rng, n))
    q = int(rng.integers(1, n + 1))
    out = apply_single_qubit(state, q, random_unitary(rng, 2))
    assert abs(out.norm() - 1) < 1e-12
    if n >= 2:
        q2 = int(rng.choice([k for k in range(1, n + 1) if k != q]))
        out = apply_two_qubit(out, q, q2, random_unitary(rng, 4))
        assert abs(out.norm() - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds, sizes, st.floats(-10, 10))
def test_measurement_complete_and_reconstructs(seed, n, theta):
    rng = np.random.default_rng(seed)
    psi = random_state(rng, n)
    q = int(rng.integers(1, n + 1))
    split = measure_qubit(PureState(n, psi), q, theta)
    assert abs(split.plus_probability + split.minus_probability - 1) < 1e-12
    c, s = math.cos(theta), math.sin(theta)
    rebuilt = np.zeros_like(psi)
    for p, post, vec in (
        (split.plus_probability, split.plus_state, np.array([c, s])),
        (split.minus_probability, split.minus_state, np.array([s, -c])),
    ):
        if post is None:
            continue
        assert abs(post.norm() - 1) < 1e-12
        # Re-insert the measured qubit at position q.
        rest = post.amplitudes.reshape(2 ** (q - 1), 1, 2 ** (n - q))
        rebuilt += (math.sqrt(p) * rest * vec.reshape(1, 2, 1)).reshape(-1)
    np.testing.assert_allclose(rebuilt, psi, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 6))
def test_disjoint_unitaries_commute(seed, n):
    rng = np.random.default_rng(seed)
    state = PureState(n, random_state(rng, n))
    q1, q2 = rng.choice(np.arange(1, n + 1), size=2, replace=False)
    u1, u2 = random_unitary(rng, 2), random_unitary(rng, 2)
    a = apply_single_qubit(apply_single_qubit(state, int(q1), u1), int(q2), u2)
    b = apply_single_qubit(apply_single_qubit(state, int(q2), u2), int(q1), u1)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, sizes, st.floats(-5, 5))
def test_theta_periodicity(seed, n, theta):
    rng = np.random.default_rng(seed)
    state = PureState(n, random_state(rng, n))
    q = int(rng.integers(1, n + 1))
    a = measure_qubit(state, q, theta)
    b = measure_qubit(state, q, theta + math.pi)
    assert a.plus_probability == pytest.approx(b.plus_probability, abs=1e-12)
    assert a.minus_probability == pytest.approx(b.minus_probability, abs=1e-12)
