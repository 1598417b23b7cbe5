"""Acceptance suite: eight criteria, one PASS/FAIL line each.

Run with pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import cmath
import itertools
import math
import time

import numpy as np
import pytest

from ncgeom.connection import (
    CLOSED_SLOTS,
    Connection,
    cotorsion_closed,
    cotorsion_residual,
    max_residual,
    metric_compat_residual_closed,
    metric_compat_residual_direct,
    torsion_residual,
)
from ncgeom.curvature import (
    BlowUp,
    Lift,
    case_connection,
    continuous_limit_compare,
    inverse_metric,
    riemann_closed,
    riemann_direct,
    ricci,
    ricci_closed,
    scalar,
    scalar_closed,
    scalar_closed_case,
    window_scalar,
)
from ncgeom.cyclic import CyclicFunction
from ncgeom.metric import Metric, constant_metric, contractions, metric_from_x, symmetric_metric
from ncgeom.solver import (
    DEFAULT_KAPPAS,
    case_c_connection,
    enumerate_connections,
    nonconstant_x,
    star_filter,
    x_profile,
    z2_compat_residual,
)
from ncgeom.torus import (
    alternating_family,
    build_product_connection,
    max_abs,
    solve_constant_symmetric,
    torus_cotorsion_residual,
    torus_compat_residual,
)

RESULTS = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    return ok


def circle_metric(N, l, phi):
    return metric_from_x(nonconstant_x(N, l, phi), CyclicFunction.constant(N, -1.0))


def case_two_gammas(N):
    # 0.7 has no IInonconst; 1 (N even) and e^{i pi/N} (gamma^N = -1, N odd) do
    return (1.0, 0.7, cmath.exp(1j * math.pi / N))


def circle_plugback():
    """Every branch, every sample: (case, N, torsion, compat, cotorsion) plus count problems."""
    rows, problems = [], []
    for N in range(5, 13):
        for gamma in case_two_gammas(N):
            m = constant_metric(N, -1.0, gamma)
            sols = enumerate_connections(m)
            want = 3 + (2 * len(DEFAULT_KAPPAS) if abs(gamma**N - (-1) ** N) < 1e-12 else 0)
            if len(sols) != want:
                problems.append((N, gamma, len(sols), want))
            rows += [(s, m) for s in sols]
        for l in range(1, N):
            for phi in (0.37, 1.1):
                m = circle_metric(N, l, phi)
                sols = enumerate_connections(m)
                want = 2 + (len(DEFAULT_KAPPAS) if (N + l) % 2 == 0 else 0)
                if len(sols) != want:
                    problems.append((N, l, phi, len(sols), want))
                rows += [(s, m) for s in sols]
    out = []
    for s, m in rows:
        c = s.connection
        out.append((s.params.case, m.N, max_residual(torsion_residual(c)), s.residual,
                    max(max_residual(cotorsion_residual(c, m)), max_residual(cotorsion_closed(c, m)))))
    return out, problems


def check_1():
    t = time.perf_counter()
    rows, problems = circle_plugback()
    elapsed = time.perf_counter() - t
    tors = max(r[2] for r in rows)
    comp = max(r[3] for r in rows)
    cot = max(r[4] for r in rows)
    cases = sorted({r[0] for r in rows})
    ok = not problems and tors <= 1e-13 and comp <= 1e-10 and cot <= 1e-10 and elapsed < 5
    return record(1, ok, f"{len(rows)} connections, cases {cases}, torsion {tors:.1e}, compat {comp:.1e}, "
                         f"cotorsion {cot:.1e}, count problems {problems}, {elapsed:.2f} s")


def _random_fn(rng, N):
    return CyclicFunction(rng.normal(size=N) + 1j * rng.normal(size=N))


def check_2():
    rng = np.random.default_rng(20240601)
    riem = compat = ric = scal = case = 0.0
    for _ in range(100):
        N = int(rng.integers(5, 11))
        c = Connection(*(_random_fn(rng, N) for _ in range(4)))
        m = Metric(_random_fn(rng, N), _random_fn(rng, N))
        lift = Lift(_random_fn(rng, N))
        rd, rc = riemann_direct(c), riemann_closed(c)
        riem = max(riem, max((rd[g] - rc[g]).max_abs() for g in rd))
        direct = metric_compat_residual_direct(c, m)
        closed = metric_compat_residual_closed(c, m)
        mapped = set(CLOSED_SLOTS.values())
        compat = max(compat, max((closed[k] - direct[s]).max_abs() for k, s in CLOSED_SLOTS.items()),
                     max((v.max_abs() for k, v in direct.coeffs.items() if k not in mapped), default=0.0))
        ric = max(ric, (ricci(c, m, lift) - ricci_closed(c, m, lift)).max_abs())
        scal = max(scal, (scalar(c, m, lift) - scalar_closed(c, m, lift)).max_abs())
        # case formulas against the generic pipeline on real negative metrics
        G = CyclicFunction(-rng.uniform(0.5, 2.0, N))
        gamma = float(rng.uniform(0.5, 2.0))
        name = "abc"[int(rng.integers(3))]
        mm = symmetric_metric(G, gamma)
        rep = scalar_closed_case(mm, gamma, name, lift)
        case = max(case, (rep.scalar - scalar(rep.connection, mm, lift)).max_abs(),
                   (rep.diagnostics["ricci_case"] - rep.ricci).max_abs())
    worst = max(riem, compat, ric, scal, case)
    return record(2, worst <= 1e-11, f"Riemann {riem:.1e}, compatibility {compat:.1e}, Ricci {ric:.1e}, "
                                     f"scalar {scal:.1e}, case formulas {case:.1e} (100 trials each)")


def check_3():
    errs = {}
    rng = np.random.default_rng(3)
    second = 0.0
    for N in range(5, 13):
        m = Metric(_random_fn(rng, N), _random_fn(rng, N))
        second = max(second, (contractions(m)[1] - 2).max_abs())
    errs["second contraction"] = second
    c_err = prod_err = 0.0
    for N in range(5, 13):
        for l in range(1, N):
            for phi in (0.37, 1.1):
                X = nonconstant_x(N, l, phi)
                c = x_profile(circle_metric(N, l, phi)).c
                c_err = max(c_err, abs(c - 2 * math.cos(math.pi * l / N)))
                prod_err = max(prod_err, abs(X.product() - (-1) ** l))
    errs["c value"] = c_err
    errs["period product"] = prod_err
    z2 = 0.0
    for z in (0.3 + 0.2j, -1.7, 2.5j):
        for G0 in (-1.0, 0.4 - 2j):
            z2 = max(z2, *map(abs, z2_compat_residual(G0, G0, z, 1 / z)))
            z2 = max(z2, *map(abs, z2_compat_residual(G0, -G0, z, -1 / z)))
    errs["Z_2 examples"] = z2
    cert = solve_constant_symmetric()
    target = {"A": 1, "B": 1, "C1": 1, "C2": 1, "W": 0}
    errs["torus constant solution"] = max(abs(cert.solution[k] - v) for k, v in target.items())
    errs["torus constant residual"] = cert.full_residual
    ok = all(v <= 1e-13 for v in errs.values()) and len(cert.solution) == 5
    return record(3, ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items())
                  + f", scan minima {len(cert.scan_minima)}")


def check_4():
    detail, ok = [], True
    for N in (5, 7, 9, 11):
        for value in (-1.0, -2.5):
            m = constant_metric(N, value, 1.0)
            sols = enumerate_connections(m)
            kept = star_filter(sols, m)
            good = (len(sols) == 3 and len(kept) == 1
                    and all((getattr(kept[0].connection, k) - 1).max_abs() <= 1e-13
                            for k in ("A_p", "A_pt", "B_p", "B_pt")))
            ok &= good
            detail.append(f"N={N}:{len(sols)}->{len(kept)}")
    return record(4, ok, " ".join(detail))


def check_5():
    worst = 0.0
    for N in range(5, 13):
        for value in (-1.0, -3.0):
            m = constant_metric(N, value, 1.0)
            lift = Lift.standard(N)
            cases = [("a", None), ("b", None), ("c", None)]
            if N % 2 == 0:
                for k in DEFAULT_KAPPAS:
                    for kp, kpt in ((k, 0.0), (0.0, k)):
                        sol = case_c_connection(m, kp, kpt)
                        cases.append(("even-extra", (sol.connection.B_p, sol.connection.B_pt)))
            for name, B in cases:
                rep = scalar_closed_case(m, 1.0, name, lift, B)
                generic = scalar(case_connection(m, 1.0, name, B), m, lift)
                worst = max(worst, rep.scalar.max_abs(), generic.max_abs())
    return record(5, worst <= 1e-12, f"max |R| {worst:.1e} over cases a, b, c and even-N extra family")


def _profile(t):
    return 2 + np.cos(2 * np.pi * t)


def check_6():
    t = time.perf_counter()
    rows = continuous_limit_compare(
        _profile, [50, 100, 200], -1,
        lambda t: -2 * np.pi * np.sin(2 * np.pi * t), lambda t: -4 * np.pi**2 * np.cos(2 * np.pi * t))
    elapsed = time.perf_counter() - t
    errs = [r.max_error for r in rows]
    orders = [r.order for r in rows[1:]]
    ok = errs[0] > errs[1] > errs[2] and min(orders) >= 1 and elapsed < 2
    return record(6, ok, f"errors {[f'{e:.3g}' for e in errs]}, orders {[f'{o:.2f}' for o in orders]}, "
                         f"{elapsed * 1000:.1f} ms")


def _alternation_run(G):
    s = np.sign(np.diff(np.real(G)))
    best = run = 0
    for a, b in zip(s[:-1], s[1:]):
        run = run + 1 if a * b < 0 else 0
        best = max(best, run)
    return best


def check_7():
    rng = np.random.default_rng(7)
    worst = 0.0
    targets = [np.zeros(50), np.full(50, 0.1)] + [rng.uniform(-0.05, 0.05, 50) for _ in range(20)]
    for R in targets:
        G = inverse_metric(R, (-1.0, -1.0, -1.0))
        worst = max(worst, float(np.max(np.abs(window_scalar(G) - R))))
    alternations = _alternation_run(inverse_metric(np.full(50, 0.1)))
    try:
        inverse_metric(np.full(200, -0.05))
        blow = None
    except BlowUp as e:
        blow = len(e.partial) - 3
    ok = worst <= 1e-10 and alternations >= 6 and blow is not None
    return record(7, ok, f"round trip {worst:.1e} over {len(targets)} targets, R=+0.1 alternating run "
                         f"{alternations}, R=-0.05 blow-up after {blow} steps")


def check_8():
    detail, worst = [], 0.0
    for N, M in ((5, 6), (6, 9)):
        combos = 0
        circle = {}
        for K in (N, M):
            circle[K] = [(s.connection, m) for l in range(1, K) for phi in (0.37, 1.1)
                         for m in [circle_metric(K, l, phi)] for s in enumerate_connections(m)]
        for a, b in zip(circle[N], itertools.islice(itertools.cycle(circle[M]), max(len(circle[N]), len(circle[M])))):
            conn, metric = build_product_connection(a, b)
            worst = max(worst, max_abs(torus_compat_residual(conn, metric)),
                        max_abs(torus_cotorsion_residual(conn, metric)))
            combos += 1
        for b, a in zip(circle[M], itertools.cycle(circle[N])):
            conn, metric = build_product_connection(a, b)
            worst = max(worst, max_abs(torus_compat_residual(conn, metric)),
                        max_abs(torus_cotorsion_residual(conn, metric)))
            combos += 1
        detail.append(f"({N},{M}) {combos} composites")
    ident = 0.0
    reports = {}
    for branch in (1, -1):
        rep = alternating_family(6, 6, branch)
        ident = max(ident, *rep.identities.values())
        reports[branch] = (rep.compat_max, rep.cotorsion_max, len(rep.compat), len(rep.cotorsion))
    ok = worst <= 1e-10 and ident <= 1e-13 and all(r[2:] == (36, 16) for r in reports.values())
    full = "; ".join(f"branch {b:+d}: compat {r[0]:.1e}, cotorsion {r[1]:.1e}" for b, r in reports.items())
    return record(8, ok, f"{', '.join(detail)}, worst product residual {worst:.1e}, "
                         f"alternating identities {ident:.1e}, full system recorded ({full})")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i + 1}" for i in range(len(CHECKS))])
def test_criterion(check):
    assert check(), RESULTS.get(CHECKS.index(check) + 1)


if __name__ == "__main__":
    for check in CHECKS:
        check()
