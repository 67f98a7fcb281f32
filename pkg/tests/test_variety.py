"""Variety models: dimensions, relation counts, quadratic deficiency."""

import json
import math
from fractions import Fraction

import pytest

from mindeg.errors import InconsistentModel
from mindeg.numerics import exact_rank
from mindeg.polytope import LatticePolytope, simplex
from mindeg.variety import (QuadraticForm, VarietyModel, epsilon,
                            is_minimal_degree, scroll_model,
                            segre_veronese_model, toric_model,
                            veronese_cone_model, veronese_model,
                            veronese_reembedding)

F = Fraction


def test_veronese_surface():
    m = veronese_model(2, 2)
    assert (m.n, m.m, m.e) == (5, 2, 3)
    assert m.dim_r2 == 15 and m.i2_count == 6
    assert epsilon(m) == 0 and is_minimal_degree(m)
    assert m.degree == 4


def test_twisted_cubic():
    m = veronese_model(1, 3)
    assert (m.n, m.m, m.e) == (3, 1, 2)
    assert m.i2_count == 3 and epsilon(m) == 0
    assert m.degree == 3


def test_projective_space_has_no_relations():
    m = veronese_model(3, 1)
    assert m.i2_count == 0 and epsilon(m) == 0 and m.degree == 1


def test_veronese_deficiency_values():
    # closed form: C(n+2d,2d) - (n+1) C(n+d,d) + C(n+1,2)
    for n, d in [(2, 3), (3, 2), (2, 2), (2, 4), (4, 2)]:
        m = veronese_model(n, d)
        want = (math.comb(n + 2 * d, 2 * d)
                - (n + 1) * math.comb(n + d, d) + math.comb(n + 1, 2))
        assert epsilon(m) == want
    assert epsilon(veronese_model(2, 3)) == 1
    assert epsilon(veronese_model(3, 2)) == 1
    assert epsilon(veronese_model(2, 4)) == 3


def test_veronese_cone():
    m = veronese_cone_model(5)
    assert (m.n, m.m, m.e) == (5, 2, 3)
    assert m.i2_count == 6 and epsilon(m) == 0 and m.degree == 4
    m7 = veronese_cone_model(7)
    assert (m7.m, m7.e) == (4, 3)
    assert m7.i2_count == 6 and epsilon(m7) == 0 and m7.degree == 4
    with pytest.raises(ValueError):
        veronese_cone_model(4)


def test_scrolls():
    s = scroll_model([1, 2])
    assert (s.n, s.m, s.e) == (4, 2, 2)
    assert s.i2_count == 3 and epsilon(s) == 0 and s.degree == 3
    s = scroll_model([2, 2])
    assert (s.n, s.m, s.e) == (5, 2, 3)
    assert s.i2_count == 6 and epsilon(s) == 0 and s.degree == 4
    # leading zero degrees are cone directions contributing a free variable
    s = scroll_model([0, 2])
    assert (s.n, s.m, s.e) == (3, 2, 1)
    assert s.i2_count == 1 and epsilon(s) == 0 and s.degree == 2
    with pytest.raises(ValueError):
        scroll_model([2, 1])
    with pytest.raises(ValueError):
        scroll_model([0, 0])


def test_scroll_matches_segre():
    s = scroll_model([1, 1])
    sv = segre_veronese_model([1, 1], [1, 1])
    assert (s.n, s.m, s.i2_count) == (sv.n, sv.m, sv.i2_count) == (3, 2, 1)
    assert s.degree == sv.degree == 2


def test_segre_veronese_examples():
    m = segre_veronese_model([1, 2], [1, 1])
    assert is_minimal_degree(m)
    m = segre_veronese_model([2, 2], [1, 1])
    assert not is_minimal_degree(m)
    m = segre_veronese_model([1, 1], [2, 1])
    assert is_minimal_degree(m)
    m = segre_veronese_model([1, 1], [2, 2])
    assert not is_minimal_degree(m)


def test_toric_sparse_support():
    # support of the Motzkin form: deficiency one with no relations at all
    Q = LatticePolytope(2, [(0, 0), (2, 1), (1, 2), (1, 1)])
    m = toric_model(Q)
    assert (m.n, m.m, m.e) == (3, 2, 1)
    assert m.dim_r2 == 10 and m.i2_count == 0
    assert epsilon(m) == 1


def test_pair_count_identity():
    for m in [veronese_model(2, 2), scroll_model([1, 2]),
              veronese_cone_model(5),
              toric_model(LatticePolytope(2, [(0, 0), (2, 1), (1, 2), (1, 1)]))]:
        assert m.dim_r2 + m.i2_count == math.comb(m.n + 2, 2)


def test_relations_are_independent():
    for m in [veronese_model(2, 2), veronese_model(1, 3),
              scroll_model([1, 2]), veronese_cone_model(5)]:
        rows = m.i2_rows()
        assert exact_rank([r[:] for r in rows]) == m.i2_count


def test_toric_binomials():
    m = veronese_model(1, 3)
    rels = m.i2_pairs()
    assert len(rels) == 3
    for (i, j), (k, l) in rels:
        a = tuple(x + y for x, y in zip(m.r1_basis[i], m.r1_basis[j]))
        b = tuple(x + y for x, y in zip(m.r1_basis[k], m.r1_basis[l]))
        assert a == b and (i, j) != (k, l)


def test_pair_vector_toric_is_unit():
    m = veronese_model(2, 2)
    v = m.pair_vector(0, 3)
    assert len(v) == 1
    ((idx, c),) = v.items()
    assert c == 1
    s = tuple(a + b for a, b in zip(m.r1_basis[0], m.r1_basis[3]))
    assert m.r2_basis[idx] == s


def test_pair_vector_determinantal_reduces():
    m = veronese_cone_model(5)
    # x0 x3 = x1^2 modulo the minors
    v = m.pair_vector(0, 3)
    assert {m.r2_basis[k]: c for k, c in v.items()} == {(1, 1): F(1)}


def test_lower_dimensional_toric_input():
    Q = LatticePolytope(3, [(0, 0, 1), (2, 0, 1), (0, 2, 1)])
    m = toric_model(Q)
    assert (m.n, m.m, m.e) == (5, 2, 3)
    assert epsilon(m) == 0


def test_reembedding_matches_dilate():
    Q = simplex(2, 1)
    assert veronese_reembedding(Q, 3) == simplex(2, 3)
    with pytest.raises(ValueError):
        veronese_reembedding(Q, 0)


def test_epsilon_detects_malformed_model():
    # a fabricated relation that is not a quadric of the variety skews the
    # two counts differently
    m = VarietyModel("bogus", 1, ["x0", "x1", "x2"],
                     relations=[{(0, 2): F(1), (1, 1): F(-1)},
                                {(0, 1): F(1)}])
    with pytest.raises(InconsistentModel):
        epsilon(m)


def test_quadratic_form_validation():
    m = veronese_model(1, 2)
    f = QuadraticForm(m, [F(1)] * m.dim_r2)
    assert f.to_json()["coefficients"] == ["1"] * m.dim_r2
    with pytest.raises(InconsistentModel):
        QuadraticForm(m, [F(1)])


def test_model_json_roundtrip_toric():
    m = veronese_model(2, 2)
    obj = json.loads(json.dumps(m.to_json(), sort_keys=True))
    m2 = VarietyModel.from_json(obj)
    assert (m2.n, m2.m, m2.dim_r2, m2.i2_count) == (m.n, m.m, m.dim_r2,
                                                    m.i2_count)
    assert m2.is_toric and epsilon(m2) == 0


def test_model_json_roundtrip_determinantal():
    m = scroll_model([1, 2])
    obj = json.loads(json.dumps(m.to_json(), sort_keys=True))
    m2 = VarietyModel.from_json(obj)
    assert not m2.is_toric
    assert (m2.n, m2.m, m2.dim_r2, m2.i2_count) == (m.n, m.m, m.dim_r2,
                                                    m.i2_count)
    assert epsilon(m2) == 0


def test_big_model_json_omits_relations():
    m = veronese_model(5, 4)
    assert m.i2_count > 2000
    assert "i2_basis" not in m.to_json()
