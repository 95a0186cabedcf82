"""Pauli algebra and stabilizer validation."""
import itertools

import numpy as np
import pytest

from errors import Dependent, DimensionMismatch, FormatError, ImaginaryPhase, NonCommuting
from pauli import (
    PauliString,
    SubsetSelector,
    commutes,
    dense_matrix,
    load_stabilizer,
    parse_stabilizer,
    pauli_mul,
    subset_product,
    validate_stabilizer,
)


def P(label):
    return PauliString.from_label(label)


class TestPauliString:
    """Labels, phases and bit conventions."""

    def test_hermitian_y_carries_one_i(self):
        y = P("Y")
        assert y.x_bits == (1,) and y.z_bits == (1,)
        assert y.phase_exp == 1
        assert y.sign_exp == 0
        assert y.label() == "+Y"

    def test_sign_prefixes(self):
        assert P("-XZ").label() == "-XZ"
        assert P("+iX").sign_exp == 1
        assert P("-iX").sign_exp == 3
        assert not P("iX").is_hermitian

    def test_dense_y_matches_pauli_y(self):
        np.testing.assert_allclose(dense_matrix(P("Y")), [[0, -1j], [1j, 0]], atol=1e-15)

    def test_masks_put_qubit_zero_first(self):
        assert P("XI").masks() == (0b10, 0)
        assert P("IZ").masks() == (0, 0b01)

    def test_invalid_label(self):
        with pytest.raises(FormatError):
            P("+XQ")

    def test_single(self):
        assert PauliString.single(3, 1, "Z", sign=-1).label() == "-IZI"


class TestMultiplication:
    """Group law with exact phase tracking."""

    def test_x_times_z_is_minus_i_y(self):
        product = P("X") * P("Z")
        assert product.label() == "-iY"
        np.testing.assert_allclose(dense_matrix(product), dense_matrix(P("X")) @ dense_matrix(P("Z")), atol=1e-15)

    def test_identity_element(self):
        g = P("-XZ")
        assert pauli_mul(P("II"), g) == g

    def test_xz_times_zx_is_yy(self):
        assert (P("XZ") * P("ZX")).label() == "+YY"

    def test_dense_homomorphism(self):
        """dense(p) dense(q) = dense(pq) for every pair of signed 2-qubit strings"""
        labels = ["".join(letters) for letters in itertools.product("IXYZ", repeat=2)]
        for left, right in itertools.product(labels, repeat=2):
            for sign in ("+", "-i"):
                p, q = P(sign + left), P(right)
                np.testing.assert_allclose(dense_matrix(p) @ dense_matrix(q), dense_matrix(p * q), atol=1e-12)

    def test_associative(self, rng):
        letters = "IXYZ"
        for _ in range(20):
            a, b, c = (P("".join(rng.choice(list(letters), size=3))) for _ in range(3))
            assert (a * b) * c == a * (b * c)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            P("X") * P("XX")


class TestCommutes:
    def test_x_and_z_anticommute(self):
        assert not commutes(P("X"), P("Z"))

    def test_xx_and_zz_commute(self):
        assert commutes(P("XX"), P("ZZ"))

    def test_matches_dense_commutator(self):
        labels = ["".join(letters) for letters in itertools.product("IXYZ", repeat=2)]
        for left, right in itertools.product(labels, repeat=2):
            p, q = dense_matrix(P(left)), dense_matrix(P(right))
            assert commutes(P(left), P(right)) == np.allclose(p @ q, q @ p)


class TestValidateStabilizer:
    """Checks run in order: phase, commutation, independence."""

    def test_edge_graph_generators(self):
        group = validate_stabilizer([P("XZ"), P("ZX")])
        assert group.size == 2
        assert group.labels() == ["+XZ", "+ZX"]

    def test_imaginary_phase(self):
        with pytest.raises(ImaginaryPhase) as info:
            validate_stabilizer([P("ZI"), P("+iIX")])
        assert info.value.index == 1

    def test_non_commuting(self):
        with pytest.raises(NonCommuting) as info:
            validate_stabilizer([P("XI"), P("ZI")])
        assert (info.value.i, info.value.j) == (0, 1)

    def test_minus_identity_in_group(self):
        with pytest.raises(Dependent) as info:
            validate_stabilizer([P("ZZ"), P("-ZZ")])
        assert info.value.subset == (0, 1)
        assert info.value.sign == -1

    def test_redundant_generator(self):
        with pytest.raises(Dependent) as info:
            validate_stabilizer([P("XX"), P("ZZ"), P("-YY")])
        assert info.value.subset == (0, 1, 2)
        assert info.value.sign == 1

    def test_error_payloads(self):
        with pytest.raises(NonCommuting) as info:
            validate_stabilizer([P("X"), P("Z")])
        assert info.value.to_dict()["pair"] == [0, 1]


class TestSubsets:
    def test_selector_from_int_is_msb_first(self):
        assert SubsetSelector.from_int(2, 2).bits == (1, 0)
        assert SubsetSelector.from_int(5, 3).to_string() == "101"

    def test_subset_product(self):
        group = validate_stabilizer([P("XZ"), P("ZX")])
        assert subset_product(group, SubsetSelector((1, 1))).label() == "+YY"
        assert subset_product(group, (0, 0)).is_identity

    def test_every_subset_product_is_hermitian(self):
        group = validate_stabilizer([P("XZI"), P("ZXZ"), P("-IZX")])
        for value in range(8):
            assert subset_product(group, SubsetSelector.from_int(value, 3)).is_hermitian


class TestParsing:
    def test_parse(self):
        group = parse_stabilizer({"n": 2, "generators": ["+XZ", "+ZX"]})
        assert group.to_dict() == {"n": 2, "generators": ["+XZ", "+ZX"]}

    def test_length_mismatch(self):
        with pytest.raises(FormatError):
            parse_stabilizer({"n": 3, "generators": ["+XZ"]})

    def test_missing_key(self):
        with pytest.raises(FormatError):
            parse_stabilizer({"generators": ["+XZ"]})

    def test_load_file(self, instances_dir):
        group = load_stabilizer(instances_dir / "edge_stabilizer.json")
        assert group.labels() == ["+XZ", "+ZX"]

    def test_load_imaginary_file(self, instances_dir):
        with pytest.raises(ImaginaryPhase):
            load_stabilizer(instances_dir / "imaginary_stabilizer.json")
