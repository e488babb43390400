import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from modricci.errors import InvalidSpec, ConfigParseError
from modricci.models import KINDS, ModelSpec, build_model, catalog_spec, coerce_fields, list_models

from conftest import model_of


def test_catalog_has_seven_entries():
    rows = list_models()
    assert len(rows) == 7
    assert [r["kind"] for r in rows] == list(KINDS)


def test_euclidean_warp_is_identity():
    m = model_of("Euclidean", dimension=3)
    s = np.linspace(0.01, 3, 20)
    assert np.allclose(m.f(s), s)
    assert np.allclose(m.df(s), 1.0)
    assert np.allclose(m.d2f(s), 0.0)
    assert m.cut_radius == math.inf


def test_sphere_cut_radius():
    m = model_of("Sphere", dimension=2, curvature=1.0)
    assert m.cut_radius == pytest.approx(math.pi)


def test_gaussian_soliton_potential_and_gradient():
    m = model_of("GaussianSoliton")
    x = m.point_at(2.0, np.array([1.0, 0.0]))
    assert np.allclose(x, [2.0, 0.0])
    assert m.potential_at(x) == pytest.approx(2.0)
    assert m.vector_field_norm(x) == pytest.approx(2.0)


def test_singular_field_profile():
    m = model_of("SingularFieldModel", K=1.0, alpha=0.5)
    x = m.point_at(4.0, np.array([1.0, 0.0, 0.0]))
    assert m.vector_field_norm(x) == pytest.approx(0.5)


def test_metric_is_symmetric_positive(catalog_model):
    m = catalog_model
    e = np.zeros(m.n)
    e[-1] = 1.0
    x = m.point_at(0.4, e)
    g = m.metric(x)
    assert np.allclose(g, g.T)
    assert np.all(np.linalg.eigvalsh(g) > 0)


def test_point_at_distance(catalog_model):
    m = catalog_model
    e = np.ones(m.n) / math.sqrt(m.n)
    x = m.point_at(0.7, e)
    assert m.distance_to_origin(x) == pytest.approx(0.7, rel=1e-12)


def test_spec_text_round_trip():
    spec = catalog_spec("WarpedCustom")
    assert ModelSpec.from_text(spec.to_text()) == spec


@given(st.sampled_from(KINDS))
def test_spec_dict_round_trip(kind):
    spec = catalog_spec(kind)
    assert ModelSpec.from_dict(spec.to_dict()) == spec


def test_invalid_specs():
    with pytest.raises(InvalidSpec):
        build_model(ModelSpec("Sphere", 3, curvature=-1.0))
    with pytest.raises(InvalidSpec):
        build_model(ModelSpec("CigarSoliton", 3, K=1.0))
    with pytest.raises(InvalidSpec):
        coerce_fields({"dimension": "two"})
    with pytest.raises(InvalidSpec):
        ModelSpec.from_dict({"kind": "Euclidean", "dimension": 3, "colour": 1})
