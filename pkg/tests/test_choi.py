import numpy as np
import pytest

from gkpcap import choi, fock
from conftest import random_hermitian, random_kraus_channel


def kraus_apply(kraus, rho):
    return sum(K @ rho @ K.conj().T for K in kraus)


def random_density(dim, rng):
    A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


class TestChoiBasics:
    def test_identity_choi_acts_as_identity(self, rng):
        X = choi.identity_choi(3)
        rho = random_density(3, rng)
        np.testing.assert_allclose(X.apply(rho), rho, atol=1e-12)
        X.validate()

    def test_identity_choi_is_rank_one(self):
        w = np.linalg.eigvalsh(choi.identity_choi(4).X)
        np.testing.assert_allclose(np.sort(w)[::-1][0], 4.0, atol=1e-12)
        assert np.abs(w[:-1]).max() < 1e-12

    def test_shape_check(self):
        with pytest.raises(ValueError):
            choi.ChoiMatrix(np.eye(5), 2, 3)

    def test_validate_rejects_non_hermitian(self):
        X = choi.identity_choi(2).X.copy()
        X[0, 1] += 1e-3
        with pytest.raises(ValueError, match="Hermitian"):
            choi.ChoiMatrix(X, 2, 2).validate()

    def test_validate_rejects_indefinite(self):
        X = choi.identity_choi(2).X.copy()
        X[1, 1] -= 0.5
        X[2, 2] += 0.5        # keeps trace preservation intact
        with pytest.raises(ValueError, match="PSD"):
            choi.ChoiMatrix(X, 2, 2).validate()

    def test_validate_rejects_trace_increasing(self):
        with pytest.raises(ValueError, match="trace preservation"):
            choi.ChoiMatrix(1.5 * choi.identity_choi(2).X, 2, 2).validate()


class TestKrausConversion:
    def test_rejects_incomplete_family(self, rng):
        ks = random_kraus_channel(3, 3, 2, rng)
        with pytest.raises(ValueError, match="complete"):
            choi.choi_from_kraus([0.9 * K for K in ks])

    def test_apply_matches_kraus_sum(self, rng):
        for din, dout in ((3, 3), (2, 5), (4, 2)):
            ks = random_kraus_channel(din, dout, 3, rng)
            X = choi.choi_from_kraus(ks).validate()
            rho = random_density(din, rng)
            np.testing.assert_allclose(X.apply(rho), kraus_apply(ks, rho),
                                       atol=1e-10)

    def test_unitary_choi_of_identity_kraus(self):
        X = choi.choi_from_kraus([np.eye(3)])
        np.testing.assert_allclose(X.X, choi.identity_choi(3).X, atol=1e-14)

    def test_pure_loss_kraus_round_trip(self, rng):
        ks = fock.pure_loss_kraus(0.7, 12)
        X = choi.choi_from_kraus(ks).validate()
        vec = np.zeros(12, dtype=complex)
        vec[[0, 1, 3]] = [0.6, 0.48j, 0.64]
        rho = np.outer(vec, vec.conj())
        np.testing.assert_allclose(X.apply(rho), kraus_apply(ks, rho),
                                   atol=1e-10)


class TestSuperoperator:
    def test_round_trip(self, rng):
        ks = random_kraus_channel(3, 4, 2, rng)
        X = choi.choi_from_kraus(ks)
        back = choi.superop_to_choi(choi.choi_to_superop(X))
        np.testing.assert_allclose(back.X, X.X, atol=1e-13)
        assert (back.dim_in, back.dim_out) == (3, 4)

    def test_apply_agreement(self, rng):
        ks = random_kraus_channel(4, 3, 3, rng)
        X = choi.choi_from_kraus(ks)
        T = choi.choi_to_superop(X)
        rho = random_density(4, rng)
        np.testing.assert_allclose(T.apply(rho), X.apply(rho), atol=1e-11)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            choi.Superoperator(np.eye(5), 2, 2)


class TestComposition:
    def test_matches_sequential_application(self, rng):
        ks1 = random_kraus_channel(3, 4, 2, rng)
        ks2 = random_kraus_channel(4, 2, 3, rng)
        X1 = choi.choi_from_kraus(ks1)
        X2 = choi.choi_from_kraus(ks2)
        X21 = choi.compose_choi(X2, X1).validate()
        assert (X21.dim_in, X21.dim_out) == (3, 2)
        rho = random_density(3, rng)
        np.testing.assert_allclose(X21.apply(rho),
                                   kraus_apply(ks2, kraus_apply(ks1, rho)),
                                   atol=1e-10)

    def test_identity_is_neutral(self, rng):
        ks = random_kraus_channel(3, 3, 2, rng)
        X = choi.choi_from_kraus(ks)
        left = choi.compose_choi(choi.identity_choi(3), X)
        right = choi.compose_choi(X, choi.identity_choi(3))
        np.testing.assert_allclose(left.X, X.X, atol=1e-12)
        np.testing.assert_allclose(right.X, X.X, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="chain"):
            choi.compose_choi(choi.identity_choi(3), choi.identity_choi(2))


class TestPartialTraces:
    def test_output_trace_is_identity_for_cptp(self, rng):
        ks = random_kraus_channel(3, 5, 2, rng)
        X = choi.choi_from_kraus(ks)
        np.testing.assert_allclose(
            choi.partial_trace_output(X.X, 3, 5), np.eye(3), atol=1e-11)

    def test_input_trace_is_image_of_identity(self, rng):
        ks = random_kraus_channel(3, 4, 3, rng)
        X = choi.choi_from_kraus(ks)
        np.testing.assert_allclose(
            choi.partial_trace_input(X.X, 3, 4),
            kraus_apply(ks, np.eye(3)), atol=1e-11)

    def test_average_output_state(self, rng):
        ks = random_kraus_channel(4, 3, 2, rng)
        X = choi.choi_from_kraus(ks)
        avg = choi.average_output_state(X)
        np.testing.assert_allclose(avg, kraus_apply(ks, np.eye(4) / 4),
                                   atol=1e-11)
        assert np.trace(avg).real == pytest.approx(1.0, abs=1e-10)


def fidelity_by_basis_application(XE, XN, XD, d):
    """Independent route: F = (1/d^2) sum_{i i'} <i|C(|i><i'|)|i'> for the
    composed map C, evaluated entry by entry on matrix units."""
    C = choi.compose_choi(XD, choi.compose_choi(XN, XE))
    total = 0.0 + 0.0j
    for i in range(d):
        for k in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, k] = 1.0
            total += C.apply(unit)[i, k]
    return (total / d ** 2).real


class TestEntanglementFidelity:
    def test_identity_chain_is_one(self):
        I2 = choi.identity_choi(2)
        assert choi.entanglement_fidelity(I2, I2, I2, 2) == pytest.approx(
            1.0, abs=1e-12)

    def test_discard_and_prepare_gives_inverse_dim_squared(self, rng):
        # replacing the input with any fixed state leaves fidelity 1/d^2
        for d in (2, 3):
            sigma = random_density(d, rng)
            evals, evecs = np.linalg.eigh(sigma)
            ks = [np.sqrt(evals[a]) * np.outer(evecs[:, a],
                                               np.conj(basis))
                  for a in range(d)
                  for basis in np.eye(d)]
            X_discard = choi.choi_from_kraus(ks).validate()
            Id = choi.identity_choi(d)
            got = choi.entanglement_fidelity(Id, X_discard, Id, d)
            assert got == pytest.approx(1.0 / d ** 2, abs=1e-10)

    def test_kraus_trace_formula(self, rng):
        # for a d -> d channel with Kraus {K}, the entanglement fidelity on
        # the maximally entangled input is sum_k |Tr K_k|^2 / d^2
        d = 3
        ks = random_kraus_channel(d, d, 4, rng)
        XN = choi.choi_from_kraus(ks)
        Id = choi.identity_choi(d)
        expect = sum(abs(np.trace(K)) ** 2 for K in ks) / d ** 2
        assert choi.entanglement_fidelity(Id, XN, Id, d) == pytest.approx(
            expect, abs=1e-11)

    def test_matches_basis_application_route(self, rng):
        d, n = 2, 4
        XE = choi.choi_from_kraus(random_kraus_channel(d, n, 2, rng))
        XN = choi.choi_from_kraus(random_kraus_channel(n, n, 3, rng))
        XD = choi.choi_from_kraus(random_kraus_channel(n, d, 2, rng))
        got = choi.entanglement_fidelity(XE, XN, XD, d)
        assert got == pytest.approx(
            fidelity_by_basis_application(XE, XN, XD, d), abs=1e-11)
        assert 0.0 <= got <= 1.0 + 1e-12

    def test_unitary_encode_decode_recovers_one(self, rng):
        # encode with a random unitary, decode with its adjoint
        d = 3
        U = np.linalg.qr(rng.standard_normal((d, d))
                         + 1j * rng.standard_normal((d, d)))[0]
        XE = choi.choi_from_kraus([U])
        XD = choi.choi_from_kraus([U.conj().T])
        Id = choi.identity_choi(d)
        assert choi.entanglement_fidelity(XE, Id, XD, d) == pytest.approx(
            1.0, abs=1e-11)


class TestFidelityAdjoints:
    def test_decoder_cost_matrix_is_hermitian(self, rng):
        d, n = 2, 5
        XE = choi.choi_from_kraus(random_kraus_channel(d, n, 2, rng))
        XN = choi.choi_from_kraus(random_kraus_channel(n, n, 2, rng))
        M = choi.f_n_map(XN, XE)
        assert M.shape == (n * d, n * d)
        np.testing.assert_allclose(M, M.conj().T, atol=1e-11)

    def test_decoder_cost_matrix_linear_in_encoder(self, rng):
        d, n = 2, 3
        XN = choi.choi_from_kraus(random_kraus_channel(n, n, 2, rng))
        A = random_hermitian(n * d, rng)
        B = random_hermitian(n * d, rng)
        combo = choi.f_n_map(XN, 0.3 * A + 0.7 * B)
        np.testing.assert_allclose(
            combo, 0.3 * choi.f_n_map(XN, A) + 0.7 * choi.f_n_map(XN, B),
            atol=1e-11)

    def test_trace_pairing_matches_fidelity(self, rng):
        d, n = 2, 4
        XE = choi.choi_from_kraus(random_kraus_channel(d, n, 2, rng))
        XN = choi.choi_from_kraus(random_kraus_channel(n, n, 2, rng))
        XD = choi.choi_from_kraus(random_kraus_channel(n, d, 3, rng))
        F = choi.entanglement_fidelity(XE, XN, XD, d)
        pairing = np.trace(XD.X @ choi.f_n_map(XN, XE)).real
        assert pairing == pytest.approx(d ** 2 * F, abs=1e-10)

    def test_encoder_objective_is_adjoint(self, rng):
        # Tr[X_E M_E] must equal Tr[X_D f(X_E)] for arbitrary Hermitian X_E
        d, n = 2, 4
        XN = choi.choi_from_kraus(random_kraus_channel(n, n, 2, rng))
        XD = choi.choi_from_kraus(random_kraus_channel(n, d, 2, rng))
        ME = choi.encoder_objective(XN, XD)
        assert ME.shape == (d * n, d * n)
        np.testing.assert_allclose(ME, ME.conj().T, atol=1e-11)
        for _ in range(3):
            H = random_hermitian(d * n, rng)
            lhs = np.trace(H @ ME)
            rhs = np.trace(XD.X @ choi.f_n_map(XN, H))
            assert lhs.real == pytest.approx(rhs.real, abs=1e-9)
            assert abs(lhs.imag) < 1e-9

    def test_dimension_guard(self, rng):
        XN = choi.choi_from_kraus(random_kraus_channel(3, 3, 2, rng))
        with pytest.raises(ValueError, match="dimension"):
            choi.f_n_map(XN, np.eye(7))
