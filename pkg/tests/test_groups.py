import cmath

import numpy as np
import pytest

from kwmspec import DomainError, character_value, cyclic_group, haar_weight, integer_group
from kwmspec.groups import GroupDescriptor

TWO_PI = 2.0 * np.pi


def test_integer_group_basics():
    g = integer_group(16)
    assert g.is_integer
    assert g.element(-5) == -5
    assert g.negate(3) == -3
    assert g.subtract(7, 2) == 5
    assert g.zero() == 0
    thetas = g.grid_thetas()
    assert len(thetas) == 16
    assert thetas[0] == 0.0
    assert np.allclose(np.diff(thetas), TWO_PI / 16)


def test_integer_group_requires_even_grid():
    with pytest.raises(DomainError):
        integer_group(15)
    with pytest.raises(DomainError):
        integer_group(0)


def test_cyclic_group_canonicalization():
    g = cyclic_group(4, 3)
    assert g.order == 12
    assert g.element((5, -1)) == (1, 2)
    assert g.negate((1, 2)) == (3, 1)
    assert g.subtract((0, 0), (1, 2)) == (3, 1)
    assert len(g.elements()) == 12
    assert g.elements()[0] == (0, 0)
    # single-modulus groups accept bare integers
    g1 = cyclic_group(6)
    assert g1.element(7) == (1,)


def test_require_element_rejects_out_of_range():
    g = cyclic_group(4)
    with pytest.raises(DomainError):
        g.require_element((4,))
    with pytest.raises(DomainError):
        g.require_element((-1,))
    assert g.require_element((3,)) == (3,)


def test_character_table_small_cyclic_group():
    # independent table straight from the definition
    g = cyclic_group(4)
    for m in range(4):
        for a in range(4):
            expected = cmath.exp(2j * cmath.pi * m * a / 4)
            got = character_value(g, (m,), (a,))
            assert abs(got - expected) <= 1e-15


def test_character_multiplicativity_thousand_triples():
    rng = np.random.default_rng(7)
    g2 = cyclic_group(5, 7)
    gz = integer_group(32)
    for _ in range(500):
        m = tuple(int(x) for x in rng.integers(0, (5, 7)))
        a = tuple(int(x) for x in rng.integers(-20, 20, size=2))
        b = tuple(int(x) for x in rng.integers(-20, 20, size=2))
        lhs = character_value(g2, m, tuple(x + y for x, y in zip(a, b)))
        rhs = character_value(g2, m, a) * character_value(g2, m, b)
        assert abs(lhs - rhs) <= 1e-12
    for _ in range(500):
        theta = float(rng.uniform(0, TWO_PI))
        a = int(rng.integers(-50, 50))
        b = int(rng.integers(-50, 50))
        lhs = character_value(gz, theta, a + b)
        rhs = character_value(gz, theta, a) * character_value(gz, theta, b)
        assert abs(lhs - rhs) <= 1e-12


def test_character_conjugate_dual_inverts():
    g = integer_group(8)
    theta = 1.234
    for a in (-3, 1, 5):
        assert abs(character_value(g, g.conjugate_dual(theta), a)
                   - character_value(g, theta, a).conjugate()) <= 1e-13


def test_haar_weight_interval_additivity():
    g = integer_group(8)
    whole = haar_weight(g, [(0.0, TWO_PI)])
    assert abs(whole - 1.0) <= 1e-15
    parts = haar_weight(g, [(0.0, 1.0), (1.0, 2.5)])
    assert abs(parts - haar_weight(g, [(0.0, 2.5)])) <= 1e-15
    with pytest.raises(DomainError):
        haar_weight(g, [(0.0, 2.0), (1.5, 3.0)])  # overlap


def test_haar_weight_finite_counts_points():
    g = cyclic_group(4)
    assert haar_weight(g, [(0,), (2,)]) == 0.5
    assert haar_weight(g, []) == 0.0
    with pytest.raises(DomainError):
        haar_weight(g, [(1,), (1,)])


def test_serialization_roundtrip():
    for g in (integer_group(64), cyclic_group(3, 5)):
        assert GroupDescriptor.from_dict(g.to_dict()) == g


def test_dual_index_matches_enumeration_order():
    g = cyclic_group(3, 2)
    for i, m in enumerate(g.dual_points()):
        assert g.dual_index(m) == i
