import json
from fractions import Fraction

import numpy as np
import pytest

from qtheta import codec
from qtheta.errors import ScenarioError
from qtheta.finite_ext import kernel_d0, theta_ab
from qtheta.heisenberg import lift
from qtheta.kaehler import KaehlerStructure, SiegelPoint
from qtheta.theta_engine import quantum_theta, theta_multiplier


@pytest.mark.parametrize("value, expected", [
    (3, Fraction(3)),
    ("1/2", Fraction(1, 2)),
    (" -5/4 ", Fraction(-5, 4)),
    (0.25, Fraction(1, 4)),
])
def test_parse_rational(value, expected):
    assert codec.parse_rational(value) == expected


@pytest.mark.parametrize("value", [True, "1/0", "half", None, [1]])
def test_parse_rational_rejects(value):
    with pytest.raises(ScenarioError):
        codec.parse_rational(value)


def test_complex_values():
    assert codec.complex_from_json([0.0, 1.0]) == 1j
    assert codec.complex_from_json(2) == 2.0
    with pytest.raises(ScenarioError):
        codec.complex_from_json([1.0])


def test_lattice_keeps_exact_generators():
    D = codec.load_lattice({"N": 1, "generators": [["1/2", 0], [0, 2]]})
    assert D.is_exact()
    assert codec.dump_lattice(D) == {"N": 1, "generators": [["1/2", "0"], ["0", "2"]]}


def test_lattice_with_custom_form():
    D = codec.load_lattice({"N": 1, "A": [[0, 2], [-2, 0]], "generators": [[1, 0], [0, 1]]})
    assert not D.space.is_standard()
    assert codec.dump_lattice(D)["A"] == [[0.0, 2.0], [-2.0, 0.0]]


@pytest.mark.parametrize("obj", [
    {"generators": [[1, 0], [0, 1]]},
    {"N": 1, "generators": "nope"},
    {"N": 1, "A": [[0, 1], [-1, 0]], "generators": [[1, 0, 0]]},
    {"N": 2, "A": [[0, 1], [-1, 0]], "generators": [[1, 0], [0, 1]]},
])
def test_bad_lattices(obj):
    with pytest.raises(ScenarioError):
        codec.load_lattice(obj)


def test_siegel_defaults_real_part_to_zero():
    point = codec.load_siegel({"T_im": [[2.0]]})
    assert point.T[0, 0] == 2j
    assert codec.dump_siegel(point) == {"T_re": [[0.0]], "T_im": [[2.0]]}


def test_siegel_shapes_must_agree():
    with pytest.raises(ScenarioError):
        codec.load_siegel({"T_re": [[0.0, 0.0]], "T_im": [[1.0]]})
    with pytest.raises(ScenarioError):
        codec.load_siegel({"T_im": [[-1.0]]})


def test_extended_lattice_and_cochain(z2_cochain):
    obj = {"N": 1, "orders": [2], "generators": [{"v": ["1/2", 0], "a": [1], "l": [0]},
                                                {"v": [0, "1/2"], "a": [0], "l": [1]}]}
    D = codec.load_extended_lattice(obj)
    assert D.key((1, 1)) == (1, 1)
    dumped = codec.dump_cochain(z2_cochain)
    assert dumped["values"][-1] == {"coset": [1, 1], "c": [0.0, 1.0]}
    assert codec.load_cochain(dumped).values == z2_cochain.values


def test_torus_element_and_multiplier(z2_lattice):
    k = KaehlerStructure.from_siegel(SiegelPoint.standard(1))
    theta = quantum_theta(k, z2_lattice, 2.0)
    element = codec.load_torus_element(codec.dump_torus_element(theta.element))
    assert element.terms == theta.element.terms

    multiplier = theta_multiplier(theta)
    restored = codec.load_multiplier(codec.dump_multiplier(multiplier), theta.element.form)
    assert np.array_equal(restored.basis, multiplier.basis)
    for n in ((1, 0), (-1, 2)):
        a, b = lift(restored, n), lift(multiplier, n)
        assert abs(a.c - b.c) < 1e-15
        assert np.allclose(a.x.w, b.x.w, atol=1e-15)


def test_extended_lattice_dump_is_loadable(z2_extended):
    dumped = codec.dump_extended_lattice(z2_extended)
    assert dumped["generators"][0] == {"v": ["1/2", "0"], "a": [1], "l": [0]}
    restored = codec.load_extended_lattice(dumped)
    assert np.array_equal(restored.vectors, z2_extended.vectors)
    assert kernel_d0(restored).representatives == kernel_d0(z2_extended).representatives


def test_cochain_keyed_by_representative(z2_extended, z2_cochain):
    obj = {"values": [{"rep": [0, 0], "c": 1}, {"rep": [-1, 0], "c": 1},
                      {"rep": [0, -1], "c": 1}, {"rep": [-1, -1], "c": [0, 1]}]}
    assert codec.load_cochain(obj, z2_extended).values == z2_cochain.values
    dumped = codec.dump_cochain(z2_cochain, z2_extended)
    assert dumped["values"][-1] == {"coset": [1, 1], "c": [0.0, 1.0], "rep": [-1, -1]}
    assert codec.load_cochain(dumped, z2_extended).values == z2_cochain.values


def test_bad_representative_keys(z2_extended):
    with pytest.raises(ScenarioError, match="need an extended lattice"):
        codec.load_cochain({"values": [{"rep": [1, 0], "c": 1}]})
    with pytest.raises(ScenarioError, match="maps to coset"):
        codec.load_cochain({"values": [{"rep": [1, 0], "coset": [0, 0], "c": 1}]}, z2_extended)


def test_theta_ab_keeps_its_twist(z2_extended, z2_cochain, kaehler_i):
    theta = theta_ab(z2_extended, z2_cochain, kaehler_i, (0,), (1,), 3.0)
    dumped = json.loads(json.dumps(codec.dump_torus_element(theta)))
    assert "twist" in dumped
    restored = codec.load_torus_element(dumped)
    assert restored.terms == theta.terms
    pairs = [((1, 0), (0, 1)), ((1, 1), (1, 1)), ((0, 1), (1, 0)), ((2, -1), (1, 3)), ((-1, 0), (1, 1))]
    for g, h in pairs:
        assert abs(restored.form.alpha(g, h) - theta.form.alpha(g, h)) < 1e-12
