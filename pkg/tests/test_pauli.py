"""Unit tests for Pauli strings and GF(2) linear algebra."""

import numpy as np
import pytest

from src.gf2 import gf2_inverse, gf2_matmul, gf2_rank, gf2_row_reduce, gf2_solve, symplectic_inner
from src.pauli import PauliString


class TestPauliString:
    """Test suite for PauliString."""

    # --- Construction ---

    def test_parse_keeps_sign(self):
        """Test that a leading minus sign is parsed."""
        pauli = PauliString.parse("-ZZII")
        assert pauli.sign == -1
        assert pauli.letters == "ZZII"

    def test_from_letters_fills_identity(self):
        """Test that unlisted qubits carry identity."""
        pauli = PauliString.from_letters(4, {1: "X", 3: "Z"})
        assert pauli.letters == "IXIZ"
        assert pauli.support == (1, 3)

    @pytest.mark.parametrize("letters, sign", [("XQ", 1), ("XZ", 2)])
    def test_invalid_strings_rejected(self, letters, sign):
        """Test that unknown letters and non-unit signs raise."""
        with pytest.raises(ValueError):
            PauliString(letters, sign)

    def test_from_letters_rejects_outside_qubit(self):
        """Test that a qubit beyond the register raises."""
        with pytest.raises(ValueError):
            PauliString.from_letters(2, {2: "X"})

    def test_bits_round_trip_y(self):
        """Test that Y maps to x = z = 1 and back."""
        pauli = PauliString("XYZI")
        rebuilt = PauliString.from_bits(pauli.xbits, pauli.zbits)
        assert rebuilt == pauli
        assert list(pauli.xbits) == [1, 1, 0, 0]
        assert list(pauli.zbits) == [0, 1, 1, 0]

    # --- Algebra ---

    @pytest.mark.parametrize(
        "first, second, commute",
        [
            ("XI", "ZI", False),
            ("XX", "ZZ", True),
            ("XZ", "ZX", True),
            ("YI", "IY", True),
            ("XYZ", "ZYX", True),
        ],
    )
    def test_commutes(self, first, second, commute):
        """Test commutation from the symplectic product."""
        assert PauliString(first).commutes(PauliString(second)) is commute

    def test_product_of_commuting_strings(self):
        """Test that XX * ZZ = -YY."""
        assert PauliString("XX") * PauliString("ZZ") == PauliString("YY", -1)

    def test_product_of_anticommuting_strings_raises(self):
        """Test that a non-Hermitian product is rejected."""
        with pytest.raises(ValueError):
            _ = PauliString("X") * PauliString("Z")

    def test_negation_and_str(self):
        """Test negation flips the sign shown by str."""
        assert str(-PauliString("XZ")) == "-XZ"
        assert str(PauliString("XZ")) == "+XZ"

    def test_restricted_and_extended(self):
        """Test picking and padding qubits."""
        pauli = PauliString("XYZ", -1)
        assert pauli.restricted([2, 0]) == PauliString("ZX", -1)
        assert pauli.extended(5) == PauliString("XYZII", -1)


class TestGF2:
    """Test suite for GF(2) helpers."""

    def test_row_reduce_rank_and_pivots(self):
        """Test rank and pivot columns of a rank-2 matrix."""
        matrix = np.array([[1, 1, 0], [1, 1, 0], [0, 1, 1]])
        result = gf2_row_reduce(matrix)
        assert result.rank == 2
        assert result.pivots == (0, 1)
        assert np.array_equal(gf2_matmul(result.transform, matrix), result.matrix)

    def test_rank_of_identity(self):
        """Test full rank of the identity."""
        assert gf2_rank(np.eye(5, dtype=np.uint8)) == 5

    def test_solve_consistent_system(self):
        """Test that the returned solution satisfies the system."""
        matrix = np.array([[1, 0, 1], [0, 1, 1]])
        vector = np.array([1, 0])
        solution = gf2_solve(matrix, vector)
        assert solution is not None
        assert np.array_equal(gf2_matmul(matrix, solution.reshape(-1, 1)).ravel(), vector)

    def test_solve_inconsistent_system(self):
        """Test that an inconsistent system returns None."""
        matrix = np.array([[1, 1], [1, 1]])
        assert gf2_solve(matrix, np.array([1, 0])) is None

    def test_inverse(self, rng):
        """Test that a random invertible matrix times its inverse is the identity."""
        while True:
            matrix = rng.integers(0, 2, size=(6, 6))
            if gf2_rank(matrix) == 6:
                break
        inverse = gf2_inverse(matrix)
        assert np.array_equal(gf2_matmul(matrix, inverse), np.eye(6, dtype=np.uint8))

    def test_inverse_of_singular_raises(self):
        """Test that a singular matrix has no inverse."""
        with pytest.raises(ValueError):
            gf2_inverse(np.array([[1, 1], [1, 1]]))

    @pytest.mark.parametrize("first, second, expected", [("X", "Z", 1), ("XX", "ZZ", 0)])
    def test_symplectic_inner(self, first, second, expected):
        """Test the symplectic product against commutation."""
        a, b = PauliString(first), PauliString(second)
        assert symplectic_inner(a.xbits, a.zbits, b.xbits, b.zbits) == expected
