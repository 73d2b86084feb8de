import numpy as np
import pytest

from nlfront.errors import InvalidParameter, NotKPP
from nlfront.reactions import ReactionSpec, linearize, make_reaction, read_tabulated_reaction


def test_logistic_constants(logistic):
    assert logistic.f0 == pytest.approx(1.0)
    assert logistic.f1 == pytest.approx(-1.0)
    assert logistic.K0 == pytest.approx(1.0, abs=1e-3)
    assert logistic.lipschitz(1.0) == pytest.approx(1.0)
    assert linearize(logistic) == logistic.f0
    u = np.linspace(0, 1, 11)
    np.testing.assert_allclose(logistic(u), u * (1 - u))


def test_cubic_kpp_derivatives():
    f = make_reaction(ReactionSpec("cubic_kpp", {"r": 1.0, "a": 0.5}))
    assert f.f0 == pytest.approx(1.0)
    assert f.f1 == pytest.approx(-1.5)
    u = np.linspace(0, 2, 201)
    h = 1e-6
    np.testing.assert_allclose(f.fprime(u), (f.f(u + h) - f.f(u - h)) / (2 * h), atol=1e-7)


def test_bound_is_max_of_data_and_saturation(logistic):
    assert logistic.bound(0.4) == pytest.approx(logistic.K0)
    assert logistic.bound(1.7) == 1.7


def test_non_kpp_rejected():
    # bistable-type cubic: f(u)/u increases near 0
    with pytest.raises(NotKPP):
        make_reaction(ReactionSpec("cubic_kpp", {"r": 1.0, "a": 3.0}))
    with pytest.raises(InvalidParameter):
        make_reaction(ReactionSpec("logistic", {"r": -1.0}))
    with pytest.raises(InvalidParameter):
        make_reaction(ReactionSpec("quadratic"))


def test_tabulated_reaction(tmp_path):
    u = np.linspace(0, 2, 401)
    path = tmp_path / "f.txt"
    np.savetxt(path, np.column_stack([u, u * (1 - u)]))
    f = make_reaction(ReactionSpec("tabulated", {}, read_tabulated_reaction(path)))
    assert f.f0 == pytest.approx(1.0, abs=1e-6)
    assert f.f1 == pytest.approx(-1.0, abs=1e-6)
    bad = tmp_path / "bad.txt"
    np.savetxt(bad, np.column_stack([u, -u * (1 - u)]))
    with pytest.raises(NotKPP):
        make_reaction(ReactionSpec("tabulated", {}, read_tabulated_reaction(bad)))
