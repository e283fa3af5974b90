import itertools

import numpy as np
import pytest

from rdmfq.fermion import (
    EncodingScheme,
    InteractionSpec,
    InteractionTerm,
    bravyi_kitaev,
    encode_ladder,
    encoding_matrix,
    interaction_observable,
    jordan_wigner,
    one_particle_paulis,
    parity_encoding,
    rho1_observables,
    rho2_observable,
)

from dense_oracles import interaction_matrix, ladder_matrix, pauli_sum_matrix

ALL_SCHEMES = [jordan_wigner, parity_encoding, bravyi_kitaev]


def encoded_dense(op):
    return pauli_sum_matrix(op)


def basis_permutation(scheme: str, n: int) -> np.ndarray:
    """Permutation mapping occupation index |n> to qubit index |B n>."""
    b = encoding_matrix(scheme, n)
    dim = 2**n
    perm = np.zeros((dim, dim))
    for s in range(dim):
        bits = np.array([(s >> (n - 1 - q)) & 1 for q in range(n)], dtype=np.uint8)
        qbits = b @ bits % 2
        t = 0
        for q in range(n):
            t |= int(qbits[q]) << (n - 1 - q)
        perm[t, s] = 1.0
    return perm


class TestEncodeLadder:
    def test_jw_create_mode0(self):
        op = encode_ladder(0, "create", jordan_wigner(2))
        got = {t.label(): t.coeff for t in op.terms}
        assert got == {"XI": 0.5, "YI": -0.5j}

    def test_jw_matches_fermionic_dense(self):
        enc = jordan_wigner(3)
        for j in range(3):
            for kind, create in (("create", True), ("annihilate", False)):
                dense = ladder_matrix(j, 3, create=create)
                assert np.allclose(encoded_dense(encode_ladder(j, kind, enc)), dense, atol=1e-12)

    @pytest.mark.parametrize("make", ALL_SCHEMES)
    def test_conjugation_by_basis_change(self, make):
        # Enc(c_j) equals the occupation-basis operator conjugated by the
        # bit-transform permutation.
        n = 4
        enc = make(n)
        perm = basis_permutation(enc.scheme, n)
        for j in range(n):
            dense = perm @ ladder_matrix(j, n, create=False) @ perm.T
            assert np.allclose(encoded_dense(encode_ladder(j, "annihilate", enc)), dense, atol=1e-12)

    @pytest.mark.parametrize("make", ALL_SCHEMES)
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_canonical_anticommutation(self, make, n):
        enc = make(n)
        c = [encoded_dense(encode_ladder(j, "annihilate", enc)) for j in range(n)]
        cd = [encoded_dense(encode_ladder(j, "create", enc)) for j in range(n)]
        eye = np.eye(2**n)
        for a in range(n):
            for b in range(n):
                acc = c[a] @ cd[b] + cd[b] @ c[a]
                want = eye if a == b else 0 * eye
                assert np.max(np.abs(acc - want)) < 1e-12
                acc2 = c[a] @ c[b] + c[b] @ c[a]
                assert np.max(np.abs(acc2)) < 1e-12

    def test_bk_weight_logarithmic(self):
        op = encode_ladder(2, "create", bravyi_kitaev(4))
        assert max(t.weight for t in op.terms) <= 2 + 2  # ceil(log2 4) + 2

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            encode_ladder(2, "create", jordan_wigner(2))


class TestRho1Observables:
    def test_number_operator_jw(self):
        a, b = rho1_observables(0, 0, jordan_wigner(2))
        got = {t.label(): t.coeff for t in a.terms}
        assert got == {"II": 0.5, "ZI": -0.5}
        assert len(b) == 0

    def test_offdiagonal_real_part(self):
        a, _ = rho1_observables(0, 1, jordan_wigner(2))
        got = {t.label(): t.coeff for t in a.terms}
        assert got == {"XX": 0.5, "YY": 0.5}

    @pytest.mark.parametrize("make", ALL_SCHEMES)
    def test_hermitian_coefficients(self, make):
        enc = make(4)
        for alpha, beta in itertools.combinations_with_replacement(range(4), 2):
            a, b = rho1_observables(alpha, beta, enc)
            assert all(t.coeff.imag == 0 for t in a.terms)
            assert all(t.coeff.imag == 0 for t in b.terms)

    @pytest.mark.parametrize("make", ALL_SCHEMES)
    def test_recovers_matrix_element(self, make):
        rng = np.random.default_rng(7)
        n = 3
        enc = make(n)
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        perm = basis_permutation(enc.scheme, n)
        for alpha in range(n):
            for beta in range(alpha, n):
                a, b = rho1_observables(alpha, beta, enc)
                ev_a = psi.conj() @ encoded_dense(a) @ psi
                ev_b = psi.conj() @ encoded_dense(b) @ psi if len(b) else 0.0
                got = ev_a if alpha == beta else (ev_a - 1j * ev_b) / 2
                # Reference: <c+_a c_b> in the permuted occupation basis.
                dense = perm @ (
                    ladder_matrix(alpha, n, True) @ ladder_matrix(beta, n, False)
                ) @ perm.T
                want = psi.conj() @ dense @ psi
                assert abs(got - want) < 1e-12

    def test_occupation_in_unit_interval(self):
        rng = np.random.default_rng(3)
        enc = jordan_wigner(3)
        for _ in range(25):
            psi = rng.normal(size=8) + 1j * rng.normal(size=8)
            psi /= np.linalg.norm(psi)
            for alpha in range(3):
                a, _ = rho1_observables(alpha, alpha, enc)
                val = (psi.conj() @ encoded_dense(a) @ psi).real
                assert -1e-12 <= val <= 1 + 1e-12


class TestRho2:
    def test_double_annihilation_vanishes(self):
        enc = jordan_wigner(3)
        assert len(rho2_observable(1, 1, 0, 2, enc)) == 0
        assert len(rho2_observable(0, 2, 1, 1, enc)) == 0

    def test_double_occupancy_expansion(self):
        # n0 n1 = c+0 c+1 c1 c0 = rho2 with (alpha,beta,gamma,delta)=(1,0,0,1)
        enc = jordan_wigner(2)
        op = rho2_observable(1, 0, 0, 1, enc)
        got = {t.label(): t.coeff for t in op.terms}
        assert got == {"II": 0.25, "ZI": -0.25, "IZ": -0.25, "ZZ": 0.25}

    @pytest.mark.parametrize("make", ALL_SCHEMES)
    def test_spectrum_matches_fermionic(self, make):
        n = 4
        enc = make(n)
        dense_f = (
            ladder_matrix(2, n, True)
            @ ladder_matrix(3, n, True)
            @ ladder_matrix(0, n, False)
            @ ladder_matrix(1, n, False)
        )
        herm = dense_f + dense_f.conj().T
        enc_op = rho2_observable(0, 1, 2, 3, enc)
        enc_herm = encoded_dense(enc_op) + encoded_dense(enc_op).conj().T
        assert np.allclose(
            np.sort(np.linalg.eigvalsh(herm)), np.sort(np.linalg.eigvalsh(enc_herm)), atol=1e-10
        )


def hubbard_site_interaction(value=1.0):
    return InteractionSpec(2, (InteractionTerm(0, 1, 0, 1, 2 * value),))


class TestInteraction:
    def test_single_site_hubbard(self):
        op = interaction_observable(hubbard_site_interaction(1.0), jordan_wigner(2))
        got = {t.label(): t.coeff for t in op.terms}
        assert got == {"II": 0.25, "ZI": -0.25, "IZ": -0.25, "ZZ": 0.25}

    def test_zero_interaction(self):
        w = InteractionSpec(2, ())
        assert len(interaction_observable(w, jordan_wigner(2))) == 0

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            InteractionSpec(3, (InteractionTerm(0, 1, 2, 1, 1.0),))

    @pytest.mark.parametrize("make", ALL_SCHEMES)
    def test_spectra_equal_across_schemes(self, make):
        rng = np.random.default_rng(11)
        n = 4
        for _ in range(4):
            terms = []
            for _ in range(3):
                a, b, g, d = rng.integers(0, n, size=4)
                if a == b or g == d:
                    continue
                v = float(rng.normal())
                terms.append(InteractionTerm(int(a), int(b), int(d), int(g), v))
                terms.append(InteractionTerm(int(d), int(g), int(a), int(b), v))
            w = InteractionSpec(n, tuple(terms))
            ref = np.sort(np.linalg.eigvalsh(interaction_matrix(w, n)))
            got = np.sort(np.linalg.eigvalsh(encoded_dense(interaction_observable(w, make(n)))))
            assert np.allclose(ref, got, atol=1e-10)


class TestOneParticlePaulis:
    def test_jw_count(self):
        for n in (2, 4, 6):
            assert len(one_particle_paulis(jordan_wigner(n))) == 2 * n * n - n
