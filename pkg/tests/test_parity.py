"""Tests for parity operator validation, sector splitting, classification."""

import numpy as np
import pytest

from tpskit.algebra import close_algebra, structure_decompose
from tpskit.errors import ContractViolationError, ParitySetError
from tpskit.parity import (
    classify_operator,
    conjugate_parity_set,
    pauli_string_matrix,
    syndrome_decompose,
    validate_parity_set,
)
from tpskit.tps import EntanglementMeasure, entanglement

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
HAD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
BELL_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
BELL_MINUS = np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)


def haar_unitary(dim, rng):
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


class TestPauliStrings:
    def test_single_letters(self):
        assert np.array_equal(pauli_string_matrix("X"), SX)
        assert np.array_equal(pauli_string_matrix("Y"), SY)
        assert np.array_equal(pauli_string_matrix("Z"), SZ)
        assert np.array_equal(pauli_string_matrix("I"), I2)

    def test_xx_by_hand(self):
        # antidiagonal of ones
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 3] = expected[1, 2] = expected[2, 1] = expected[3, 0] = 1
        assert np.array_equal(pauli_string_matrix("XX"), expected)

    def test_leftmost_is_most_significant(self):
        assert np.array_equal(pauli_string_matrix("XI"), np.kron(SX, I2))
        assert np.array_equal(pauli_string_matrix("IX"), np.kron(I2, SX))
        assert not np.array_equal(pauli_string_matrix("XI"), pauli_string_matrix("IX"))

    def test_zzi_spot_entries(self):
        M = pauli_string_matrix("ZZI")
        diag = np.real(np.diag(M))
        # entry for |abc> is (-1)^a (-1)^b
        for idx in range(8):
            a, b = (idx >> 2) & 1, (idx >> 1) & 1
            assert diag[idx] == (-1) ** a * (-1) ** b

    def test_invalid_strings(self):
        with pytest.raises(ContractViolationError):
            pauli_string_matrix("XQ")
        with pytest.raises(ContractViolationError):
            pauli_string_matrix("")


class TestValidateParitySet:
    def test_single_x_slot(self):
        ps = validate_parity_set([np.kron(SX, I2)])
        assert ps.n == 2 and ps.k == 1

    def test_commuting_pauli_pair(self):
        ps = validate_parity_set([pauli_string_matrix("XX"), pauli_string_matrix("ZZ")])
        assert ps.k == 2

    def test_anticommuting_pair_rejected(self):
        with pytest.raises(ParitySetError, match="0 and 1 do not commute"):
            validate_parity_set([np.kron(SX, I2), np.kron(SZ, I2)])

    def test_identity_rejected_traceless(self):
        with pytest.raises(ParitySetError, match="not traceless"):
            validate_parity_set([np.eye(4, dtype=complex)])

    def test_noninvolution_rejected(self):
        with pytest.raises(ParitySetError, match="not an involution"):
            validate_parity_set([0.5 * np.kron(SX, I2)])

    def test_nonhermitian_rejected(self):
        M = np.kron(SX, I2).astype(complex)
        M[0, 1] = 1j
        with pytest.raises(ParitySetError, match="not Hermitian"):
            validate_parity_set([M])

    def test_multiple_violations_all_reported(self):
        with pytest.raises(ParitySetError) as err:
            validate_parity_set([np.eye(4, dtype=complex), 0.5 * np.kron(SX, I2)])
        msg = str(err.value)
        assert "op 0" in msg and "op 1" in msg

    def test_dependent_triple_rejected(self):
        # third operator is the product of the first two
        ops = [pauli_string_matrix(s) for s in ("ZZI", "IZZ", "ZIZ")]
        with pytest.raises(ParitySetError, match="dependent"):
            validate_parity_set(ops)

    def test_empty_rejected(self):
        with pytest.raises(ParitySetError):
            validate_parity_set([])


class TestSyndromeDecompose:
    def test_x_slot_sectors(self):
        ps = validate_parity_set([np.kron(SX, I2)])
        sd = syndrome_decompose(ps)
        assert sd.tps.dims == (2, 2)
        assert sd.labels == [(1,), (-1,)]
        for label, V in sd.sectors.items():
            assert np.allclose(V.conj().T @ V, np.eye(2), atol=1e-12)
            assert np.allclose(np.kron(SX, I2) @ V, label[0] * V, atol=1e-10)

    def test_xx_sectors_hold_bell_states(self):
        ps = validate_parity_set([pauli_string_matrix("XX")])
        sd = syndrome_decompose(ps)
        assert sd.tps.dims == (2, 2)
        V_plus = sd.sectors[(1,)]
        V_minus = sd.sectors[(-1,)]
        # (|00> + |11>)/sqrt2 has XX eigenvalue +1, the minus Bell state -1
        for v, V in ((BELL_PLUS, V_plus), (BELL_MINUS, V_minus)):
            resid = np.linalg.norm(v - V @ (V.conj().T @ v))
            assert resid < 1e-10

    def test_bell_states_unentangled_in_parity_tps(self):
        sd = syndrome_decompose(validate_parity_set([pauli_string_matrix("XX")]))
        from tpskit.tps import TPS
        natural = TPS.natural((2, 2))
        for v in (BELL_PLUS, BELL_MINUS):
            assert entanglement(v, sd.tps) < 1e-8
            assert abs(entanglement(v, natural) - 1.0) < 1e-8

    def test_repetition_code_sectors(self):
        ps = validate_parity_set([pauli_string_matrix("ZZI"), pauli_string_matrix("IZZ")])
        sd = syndrome_decompose(ps)
        assert sd.tps.dims == (2, 4)
        assert len(sd.sectors) == 4
        # oracle: joint eigenbasis of diagonal strings read off bit patterns
        expected = {
            (1, 1): [0b000, 0b111],
            (1, -1): [0b001, 0b110],
            (-1, 1): [0b100, 0b011],
            (-1, -1): [0b010, 0b101],
        }
        for label, idxs in expected.items():
            V = sd.sectors[label]
            for idx in idxs:
                e = np.zeros(8, dtype=complex)
                e[idx] = 1
                assert np.linalg.norm(e - V @ (V.conj().T @ e)) < 1e-10

    def test_single_sector_states_are_products(self):
        rng = np.random.default_rng(5)
        sd = syndrome_decompose(validate_parity_set([pauli_string_matrix("XX")]))
        for label, V in sd.sectors.items():
            c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            psi = V @ (c / np.linalg.norm(c))
            assert entanglement(psi, sd.tps) < 1e-10

    def test_sector_sum_is_full_space(self):
        sd = syndrome_decompose(validate_parity_set(
            [pauli_string_matrix("ZZI"), pauli_string_matrix("IZZ")]))
        P = sum(V @ V.conj().T for V in sd.sectors.values())
        assert np.allclose(P, np.eye(8), atol=1e-10)

    def test_sign_pair_passes_validation_but_fails_split(self):
        # X1 = ZZI and X2 = -ZZI have distinct subset-product patterns yet
        # realize only two of the four labels
        ps = validate_parity_set([pauli_string_matrix("ZZI"), -pauli_string_matrix("ZZI")])
        with pytest.raises(ParitySetError, match="free character"):
            syndrome_decompose(ps)

    def test_no_logical_factor_rejected(self):
        ps = validate_parity_set([pauli_string_matrix("XX"), pauli_string_matrix("ZZ")])
        with pytest.raises(ParitySetError, match="no logical factor"):
            syndrome_decompose(ps)

    def test_sector_maps_reidentify(self):
        ps = validate_parity_set([pauli_string_matrix("XX")])
        base = syndrome_decompose(ps)
        U = HAD
        sd = syndrome_decompose(ps, sector_maps={(-1,): U})
        assert np.allclose(sd.sectors[(1,)], base.sectors[(1,)])
        assert np.allclose(sd.sectors[(-1,)], base.sectors[(-1,)] @ U)
        with pytest.raises(ContractViolationError):
            syndrome_decompose(ps, sector_maps={(1,): 2 * np.eye(2)})

    def test_determinism(self):
        ps = validate_parity_set([pauli_string_matrix("ZZI"), pauli_string_matrix("IZZ")])
        a = syndrome_decompose(ps)
        b = syndrome_decompose(ps)
        assert np.array_equal(a.tps.iso, b.tps.iso)


class TestConjugateParitySet:
    def test_identity_fixes_set(self):
        ps = validate_parity_set([np.kron(SX, I2)])
        out = conjugate_parity_set(ps, np.eye(4))
        assert np.allclose(out.ops, ps.ops)

    def test_hadamard_maps_x_to_z(self):
        ps = validate_parity_set([np.kron(SX, I2)])
        out = conjugate_parity_set(ps, np.kron(HAD, I2))
        assert np.max(np.abs(out.ops[0] - np.kron(SZ, I2))) < 1e-12

    def test_random_conjugation_preserves_sector_dims(self):
        rng = np.random.default_rng(21)
        ps = validate_parity_set([pauli_string_matrix("ZZI"), pauli_string_matrix("IZZ")])
        U = haar_unitary(8, rng)
        out = conjugate_parity_set(ps, U)
        sd = syndrome_decompose(out)
        assert sorted(V.shape[1] for V in sd.sectors.values()) == [2, 2, 2, 2]

    def test_nonunitary_rejected(self):
        ps = validate_parity_set([np.kron(SX, I2)])
        with pytest.raises(ContractViolationError):
            conjugate_parity_set(ps, 2 * np.eye(4))


class TestClassifyOperator:
    @staticmethod
    def _fixture():
        ps = validate_parity_set([pauli_string_matrix("XX")])
        return ps, syndrome_decompose(ps)

    def test_code_local_roundtrip(self):
        ps, sd = self._fixture()
        m = np.array([[0.3, 1j], [-1j, -0.1]])
        O = sd.tps.iso @ np.kron(m, np.eye(2)) @ sd.tps.iso.conj().T
        assert classify_operator(O, sd) == "code-local"
        for X in ps.ops:
            assert np.max(np.abs(O @ X - X @ O)) < 1e-10

    def test_parity_itself_is_syndrome_local(self):
        ps, sd = self._fixture()
        assert classify_operator(ps.ops[0], sd) == "syndrome-local"

    def test_identity_reported_code_local(self):
        _, sd = self._fixture()
        assert classify_operator(np.eye(4), sd) == "code-local"

    def test_generic_hermitian_is_mixed(self):
        _, sd = self._fixture()
        rng = np.random.default_rng(33)
        H = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        H = H + H.conj().T
        assert classify_operator(H, sd) == "mixed"

    def test_code_and_syndrome_locals_commute(self):
        _, sd = self._fixture()
        m = np.array([[1.0, 0.5], [0.5, -1.0]], dtype=complex)
        code = sd.tps.iso @ np.kron(m, np.eye(2)) @ sd.tps.iso.conj().T
        syn = sd.tps.iso @ np.kron(np.eye(2), m) @ sd.tps.iso.conj().T
        assert classify_operator(code, sd) == "code-local"
        assert classify_operator(syn, sd) == "syndrome-local"
        assert np.max(np.abs(code @ syn - syn @ code)) < 1e-10


class TestCrossModuleStructure:
    def test_parity_algebra_blocks(self):
        # the abelian algebra generated by one parity on 2 qubits has
        # dimension 2 and splits into 2 blocks of shape (2, 1)
        alg = close_algebra([pauli_string_matrix("XX")])
        assert len(alg) == 2
        sd = structure_decompose(alg, seed=1)
        assert sd.block_shape == [(2, 1), (2, 1)]

    def test_repetition_parity_algebra_blocks(self):
        alg = close_algebra([pauli_string_matrix("ZZI"), pauli_string_matrix("IZZ")])
        assert len(alg) == 4
        sd = structure_decompose(alg, seed=1)
        assert sd.block_shape == [(2, 1), (2, 1), (2, 1), (2, 1)]
