import numpy as np
import pytest

from helpers import neg_fn, rand_fn
from ncgeom.connection import Connection
from ncgeom.curvature import (
    CASE_SIGN,
    BlowUp,
    Lift,
    case_connection,
    case_diagnostics,
    continuous_limit_compare,
    continuum_scalar,
    einstein,
    inverse_metric,
    rho_coefficients,
    riemann_closed,
    riemann_direct,
    ricci,
    ricci_closed,
    scalar,
    scalar_closed,
    scalar_closed_case,
    symmetric_scalar,
    window_scalar,
)
from ncgeom.cyclic import CyclicFunction
from ncgeom.metric import Metric, constant_metric, contract_self, contractions, ellipse_metric, symmetric_metric
from ncgeom.solver import case_c_connection


def test_flat_connection_has_zero_curvature():
    c = Connection.flat(7)
    assert max(v.max_abs() for v in riemann_direct(c).values()) == 0
    m = constant_metric(7)
    assert scalar(c, m, Lift.standard(7)).max_abs() == 0


def test_riemann_two_ways():
    rng = np.random.default_rng(0)
    c = Connection(*(rand_fn(rng, 8) for _ in range(4)))
    d, k = riemann_direct(c), riemann_closed(c)
    assert max((d[g] - k[g]).max_abs() for g in d) < 1e-13


def test_rho_coefficients_shape():
    rng = np.random.default_rng(1)
    co = rho_coefficients(Connection(*(rand_fn(rng, 6) for _ in range(4))))
    assert set(co) == {"p", "pt"} and all(len(v) == 2 for v in co.values())


def test_ricci_and_scalar_two_ways():
    rng = np.random.default_rng(2)
    N = 9
    c = Connection(*(rand_fn(rng, N) for _ in range(4)))
    m = Metric(rand_fn(rng, N), rand_fn(rng, N))
    lift = Lift(rand_fn(rng, N))
    assert (ricci(c, m, lift) - ricci_closed(c, m, lift)).max_abs() < 1e-12
    assert (scalar(c, m, lift) - scalar_closed(c, m, lift)).max_abs() < 1e-11


def test_einstein_trace():
    rng = np.random.default_rng(3)
    N = 7
    c = Connection(*(rand_fn(rng, N) for _ in range(4)))
    m = Metric(neg_fn(rng, N), neg_fn(rng, N))
    lift = Lift.standard(N)
    first, _ = contractions(m)
    E = einstein(c, m, lift)
    R = scalar(c, m, lift)
    # trace(Ric) - (R / first) trace(g) = R - R = 0
    assert contract_self(m, E).max_abs() < 1e-12 * max(1.0, R.max_abs())


@pytest.mark.parametrize("case", ["a", "b", "c"])
@pytest.mark.parametrize("gamma", [1.0, 0.7, 1.8])
def test_case_formulas_match_pipeline(case, gamma):
    rng = np.random.default_rng(4)
    G = neg_fn(rng, 10)
    m = symmetric_metric(G, gamma)
    lift = Lift(CyclicFunction(rng.normal(size=10)))
    rep = scalar_closed_case(m, gamma, case, lift)
    assert (rep.scalar - scalar(rep.connection, m, lift)).max_abs() < 1e-12
    assert (rep.diagnostics["ricci_case"] - rep.ricci).max_abs() < 1e-12


@pytest.mark.parametrize("case", ["a", "b", "c"])
def test_symmetric_stencil(case):
    G = CyclicFunction(-(2 + np.cos(2 * np.pi * np.arange(12) / 12)))
    rep = scalar_closed_case(symmetric_metric(G), 1.0, case)
    assert (rep.scalar - symmetric_scalar(G, CASE_SIGN[case])).max_abs() < 1e-13


def test_even_family_case_formula():
    m = constant_metric(8, -1.5)
    sol = case_c_connection(m, 0.5 + 0.4j, 0.0)
    B = (sol.connection.B_p, sol.connection.B_pt)
    lift = Lift(CyclicFunction(np.linspace(-1, 1, 8)))
    rep = scalar_closed_case(m, 1.0, "even-extra", lift, B)
    assert (rep.scalar - scalar(case_connection(m, 1.0, "even-extra", B), m, lift)).max_abs() < 1e-12
    assert {"V_plus", "V_minus", "T_plus", "T_minus"} <= set(rep.diagnostics)


def test_case_input_validation():
    m = ellipse_metric(2, 1, 10)
    with pytest.raises(ValueError):
        scalar_closed_case(m, 0.7, "a")  # X_p is 1, not 0.7
    with pytest.raises(ValueError):
        scalar_closed_case(m, 1.0, "z")
    with pytest.raises(ValueError):
        scalar_closed_case(constant_metric(6, 1.0), 1.0, "a")
    with pytest.raises(ValueError):
        case_connection(m, 1.0, "even-extra")


def test_diagnostics_vanish_on_constant_metric():
    d = case_diagnostics(CyclicFunction.constant(6, -1.0), 1.0)
    assert all(d[k].max_abs() < 1e-15 for k in ("Z_plus", "Z_minus", "S_plus", "S_minus"))


def test_continuum_expression():
    # g = 2 + t: G = -(2 + t), G' = -1, G'' = 0 -> sign * (0 - 1) / G^3
    val = continuum_scalar(lambda t: 2 + t, np.array([0.0]), -1, lambda t: np.ones_like(t), lambda t: 0 * t)
    assert abs(val[0] - (-1) * (-1) / (-2.0) ** 3) < 1e-15


def test_continuum_rows_converge():
    rows = continuous_limit_compare(lambda t: 2 + np.cos(2 * np.pi * t), [20, 40, 80])
    errs = [r.max_error for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert rows[0].order is None and rows[2].order > 1.5


def test_inverse_flat_target_gives_constant():
    G = inverse_metric(np.zeros(30))
    assert np.allclose(G, -1.0)


def test_inverse_round_trip():
    rng = np.random.default_rng(6)
    R = rng.uniform(-0.03, 0.03, 40)
    G = inverse_metric(R, seeds=(-1.0, -1.2, -0.9), sign=1)
    assert len(G) == 43
    assert np.max(np.abs(window_scalar(G, 1) - R)) < 1e-10


def test_inverse_blow_up_keeps_partial():
    with pytest.raises(BlowUp) as info:
        inverse_metric(np.full(200, -0.05))
    assert len(info.value.partial) > 50


def test_inverse_validation():
    with pytest.raises(ValueError):
        inverse_metric(np.zeros(5), seeds=(-1, -1))
    with pytest.raises(ValueError):
        inverse_metric(np.zeros(5), seeds=(-1, 0, -1))
    with pytest.raises(ValueError):
        inverse_metric(np.zeros(5), steps=6)
