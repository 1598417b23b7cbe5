import json

import numpy as np
import pytest

from helpers import rand_fn
from ncgeom.calculus import (
    Calculus,
    SmallModulusError,
    d_one_form,
    d_one_form_by_components,
    dagger,
    differential,
    one_form,
    one_form_from_json,
    one_form_to_json,
    star,
    tensor,
    tensor2_from_json,
    tensor2_to_json,
    wedge,
)
from ncgeom.cyclic import CyclicFunction


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_small_moduli_rejected(N):
    with pytest.raises(SmallModulusError):
        Calculus.of((N,))


def test_differential_is_a_backward_difference():
    f = CyclicFunction(np.arange(6.0) ** 2)
    d = differential(f)
    assert np.allclose(d["p"].values, (f - f.shift(-1)).values)
    assert np.allclose(d["pt"].values, (f - f.shift(1)).values)
    assert np.allclose(d["p"].values.real, [-25, 1, 3, 5, 7, 9])


def test_constants_are_closed():
    assert differential(CyclicFunction.constant(7, 3.0)).max_abs() == 0


def test_leibniz_rule():
    rng = np.random.default_rng(1)
    f, h = rand_fn(rng, 8), rand_fn(rng, 8)
    lhs = differential(f * h)
    rhs = differential(f).rmul(h) + differential(h).lmul(f)
    assert (lhs - rhs).max_abs() < 1e-13


def test_d_squared_vanishes():
    rng = np.random.default_rng(2)
    assert d_one_form(differential(rand_fn(rng, 9))).max_abs() < 1e-13


def test_two_formulas_for_d_agree():
    rng = np.random.default_rng(3)
    w = one_form(rand_fn(rng, 7), rand_fn(rng, 7))
    assert (d_one_form(w) - d_one_form_by_components(w)).max_abs() < 1e-13


def test_wedge_is_antisymmetric_on_generators():
    calc = Calculus.of((6,))
    tp, tpt = calc.theta("p"), calc.theta("pt")
    assert wedge(tp, tp).max_abs() == 0
    assert (wedge(tpt, tp) + wedge(tp, tpt)).max_abs() == 0


def test_generators_commute_past_functions_by_translation():
    calc = Calculus.of((5,))
    f = CyclicFunction([1, 2, 3, 4, 5])
    moved = calc.theta("p").rmul(f)
    assert np.allclose(moved["p"].values, f.shift(-1).values)


def test_star_and_dagger_are_involutions():
    rng = np.random.default_rng(4)
    N = 6
    w = one_form(rand_fn(rng, N), rand_fn(rng, N))
    assert (star(star(w)) - w).max_abs() < 1e-14
    t = tensor(w, one_form(rand_fn(rng, N), rand_fn(rng, N)))
    assert (dagger(dagger(t)) - t).max_abs() < 1e-14


def test_star_reverses_products():
    rng = np.random.default_rng(5)
    N = 7
    f = rand_fn(rng, N)
    w = one_form(rand_fn(rng, N), rand_fn(rng, N))
    assert (star(w.lmul(f)) - star(w).rmul(f.conj())).max_abs() < 1e-13


def test_json_round_trips():
    rng = np.random.default_rng(6)
    w = one_form(rand_fn(rng, 5), rand_fn(rng, 5))
    back = one_form_from_json(json.loads(json.dumps(one_form_to_json(w))))
    assert (back - w).max_abs() == 0
    t = tensor(w, w)
    back = tensor2_from_json(json.loads(json.dumps(tensor2_to_json(t))))
    assert (back - t).max_abs() == 0
