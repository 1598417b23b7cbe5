"""Riemann, Ricci, scalar and Einstein curvature on Z_N.

Two routes are provided for every quantity: a generic pipeline that applies
the definitions to tensors (``riemann_direct``, ``ricci``, ``scalar``,
``einstein``) and closed coefficient formulas (``rho_closed``,
``ricci_closed``, ``scalar_closed``, ``scalar_closed_case``).  Tests compare
the two.

Also here: the continuum comparison for the scalar stencil and the inverse
problem of rebuilding a metric from a prescribed scalar curvature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import INVERSE, Calculus, Tensor, d_tensor_front, tensor, wedge_front
from .connection import Connection, nabla_basis
from .cyclic import ZERO_TOL, CyclicFunction, ModulusMismatch
from .metric import Metric, contract_front, contract_self, contractions, symmetric_metric, x_ratio
from .solver import connection_from_B

BLOWUP_THRESHOLD = 1e8
CASES = ("a", "b", "c", "even-extra")
CASE_SIGN = {"a": -1, "b": 1, "c": 1}


class BlowUp(ArithmeticError):
    """The inverse recursion drove 1/G past the threshold; ``partial`` holds
    the sequence computed so far."""

    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


@dataclass(frozen=True)
class Lift:
    """Splitting of the wedge product:
    theta_p ^ theta_p~  ->  (1 + beta) theta_p (x) theta_p~ + beta theta_p~ (x) theta_p."""

    beta: CyclicFunction

    @classmethod
    def standard(cls, N):
        return cls(CyclicFunction.constant(N, -0.5))

    @classmethod
    def constant(cls, N, beta):
        return cls(CyclicFunction.constant(N, beta))

    def apply_front(self, t: Tensor) -> Tensor:
        """(lift (x) id) on Omega^2 (x) Omega^1."""
        if t.kind != (2, 1):
            raise ValueError("lift acts on kind (2, 1)")
        out = Tensor(t.calc, (1, 1, 1))
        for (a, b, e), v in t.coeffs.items():
            if (a, b) != ("p", "pt"):
                raise ValueError(f"unexpected two-form word {(a, b)}")
            out = out + Tensor(
                t.calc,
                (1, 1, 1),
                {("p", "pt", e): v * (1 + self.beta), ("pt", "p", e): v * self.beta},
            )
        return out


def _check(c: Connection, m: Metric | None = None, lift: Lift | None = None):
    shapes = {c.calc.shape}
    if m is not None:
        shapes.add(m.calc.shape)
    if lift is not None:
        shapes.add(lift.beta.shape)
    if len(shapes) != 1:
        raise ModulusMismatch(f"inputs live on different lattices: {sorted(shapes)}")


def _shift(g):
    return 1 if g == "p" else -1


# -- Riemann -----------------------------------------------------------------

def riemann_direct(c: Connection) -> dict:
    """(d (x) id - id ^ nabla) nabla theta_g for each generator, as kind (2, 1)."""
    calc = c.calc
    nb = nabla_basis(c)
    out = {}
    for g in calc.gens:
        t = nb[g]
        wedge_part = Tensor(calc, (2, 1))
        for (a, b), coeff in t.coeffs.items():
            wedge_part = wedge_part + wedge_front(tensor(calc.theta(a).lmul(coeff), nb[b]))
        out[g] = d_tensor_front(t) - wedge_part
    return out


def rho_coefficients(c: Connection) -> dict:
    """{g: (M_g, N_g)} with rho_g = M_g theta_g + N_g theta_g^-1."""
    out = {}
    for g in ("p", "pt"):
        h, k = INVERSE[g], _shift(g)
        A, B = c.A(g), c.B(g)
        Ah, Bh = c.A(h), c.B(h)
        M = B * A.shift(k) - A * B.shift(-k) - (Bh.shift(-k) - 1) * (B - 1)
        Nc = Ah.shift(-k) * (1 - B) + B * (B.shift(k) - 1)
        out[g] = (M, Nc)
    return out


def rho_closed(c: Connection):
    """(rho_p, rho_p~) as one-forms."""
    calc = c.calc
    co = rho_coefficients(c)
    return tuple(
        Tensor(calc, (1,), {(g,): co[g][0], (INVERSE[g],): co[g][1]}) for g in ("p", "pt")
    )


def riemann_closed(c: Connection) -> dict:
    """theta_g ^ theta_g^-1 (x) rho_g written on the canonical two-form theta_p ^ theta_p~."""
    calc = c.calc
    out = {}
    for g, rho in zip(("p", "pt"), rho_closed(c)):
        sign = 1 if g == "p" else -1
        out[g] = Tensor(calc, (2, 1), {("p", "pt", e): sign * v for (e,), v in rho.coeffs.items()})
    return out


# -- Ricci / scalar / Einstein ------------------------------------------------

def lifted_riemann(c: Connection, lift: Lift) -> dict:
    return {g: lift.apply_front(r) for g, r in riemann_direct(c).items()}


def ricci(c: Connection, m: Metric, lift: Lift) -> Tensor:
    """Contract the metric's first leg with the first slot of the lifted
    curvature of its second leg."""
    _check(c, m, lift)
    rt = lifted_riemann(c, lift)
    out = Tensor(m.calc, (1, 1))
    for (a, b), G in m.tensor().coeffs.items():
        out = out + contract_front(m, m.calc.theta(a).lmul(G), rt[b])
    return out


def ricci_closed(c: Connection, m: Metric, lift: Lift) -> Tensor:
    """-(R_p~ beta / X_p~) theta_p (x) rho_p~ + ((1 + R_p beta) / X_p) theta_p~ (x) rho_p."""
    _check(c, m, lift)
    calc = m.calc
    beta = lift.beta
    rho_p, rho_pt = rho_closed(c)
    left_pt = -(beta.shift(-1) / x_ratio(m, "pt"))
    left_p = (1 + beta.shift(1)) / x_ratio(m, "p")
    return tensor(calc.theta("p").lmul(left_pt), rho_pt) + tensor(calc.theta("pt").lmul(left_p), rho_p)


def scalar(c: Connection, m: Metric, lift: Lift) -> CyclicFunction:
    """Full contraction of the Ricci tensor."""
    return contract_self(m, ricci(c, m, lift))


def scalar_closed(c: Connection, m: Metric, lift: Lift) -> CyclicFunction:
    """-(1/X_p~) R_p~(beta M_p~ / G_p~) + (1/X_p) R_p((1 + beta) M_p / G_p)."""
    _check(c, m, lift)
    co = rho_coefficients(c)
    beta = lift.beta
    first = -(1 / x_ratio(m, "pt")) * (beta * co["pt"][0] / m.G_pt).shift(-1)
    second = (1 / x_ratio(m, "p")) * ((1 + beta) * co["p"][0] / m.G_p).shift(1)
    return first + second


def einstein(c: Connection, m: Metric, lift: Lift) -> Tensor:
    """Ricci - (scalar / first metric contraction) g."""
    ric = ricci(c, m, lift)
    first, _ = contractions(m)
    if not first.nonvanishing(ZERO_TOL):
        raise ZeroDivisionError("first metric contraction vanishes")
    return ric - m.tensor().lmul(contract_self(m, ric) / first)


# -- closed forms for the symmetric-type metric -------------------------------

@dataclass
class CurvatureReport:
    rho_p: Tensor
    rho_pt: Tensor
    M_p: CyclicFunction
    M_pt: CyclicFunction
    N_p: CyclicFunction
    N_pt: CyclicFunction
    ricci: Tensor
    scalar: CyclicFunction
    einstein: Tensor
    connection: Connection | None = None
    diagnostics: dict = field(default_factory=dict)


def case_connection(m: Metric, gamma: float, case: str, B_extra=None) -> Connection:
    """The connection of each closed-form case for a metric with X_p = gamma.

    ``B_extra`` is the pair (B_p, B_p~) for the even-N family.
    """
    N = m.N
    one = CyclicFunction.constant(N, 1.0)
    if case == "a":
        B = (one, one)
    elif case == "b":
        B = (one, one * (-1.0 / gamma))
    elif case == "c":
        B = (one * (-gamma), one)
    elif case == "even-extra":
        if B_extra is None:
            raise ValueError("case even-extra needs B_extra = (B_p, B_p~)")
        B = B_extra
    else:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    return connection_from_B(m, *B)


def case_diagnostics(G: CyclicFunction, gamma: float, B=None) -> dict:
    """The named intermediate profiles of the case formulas."""
    r = G.shift(1) / G  # G(n+1)/G(n)
    l = G.shift(-1) / G  # G(n-1)/G(n)
    out = {
        "Z_plus": r - 1 / l,
        "Z_minus": 1 / r - l,
        "S_plus": (gamma + 1) / gamma**2 * (r - gamma**2),
        "S_minus": gamma * (gamma + 1) * (l - 1 / gamma**2),
    }
    out["W_plus"] = out["Z_plus"] / G
    out["W_minus"] = out["Z_minus"] / G
    if B is not None:
        Bp, Bpt = B
        q = Bpt / Bp
        out["V_plus"] = q * r - (1 / q) / l
        out["V_minus"] = q * (G.shift(1) / G.shift(2)) - (1 / q) * (G / G.shift(1))
        out["T_minus"] = (Bpt - 1) * (l + 1 / Bpt)
        out["T_plus"] = (Bp - 1) * (G.shift(2) / G.shift(1) + 1 / Bp)
    return out


def case_scalar(G: CyclicFunction, gamma: float, case: str, beta: CyclicFunction, B=None) -> CyclicFunction:
    """Scalar curvature of each case written through the Z, W, V profiles."""
    d = case_diagnostics(G, gamma, B)
    bm, bp = beta.shift(-1), 1 + beta.shift(1)
    if case == "a":
        return gamma**2 * bm * d["W_plus"] + (bp / gamma) * d["W_minus"].shift(1)
    if case in ("b", "c"):
        return -gamma * bm * d["W_plus"] - bp * d["W_minus"].shift(1)
    if case == "even-extra":
        return bm * d["V_plus"] / G + bp * d["V_minus"] / G.shift(1)
    raise ValueError(f"unknown case {case!r}")


def case_ricci(G: CyclicFunction, gamma: float, case: str, beta: CyclicFunction, B=None) -> Tensor:
    d = case_diagnostics(G, gamma, B)
    calc = Calculus.of(G.shape)
    bm, bp = beta.shift(-1), 1 + beta.shift(1)
    if case == "a":
        co = {("p", "pt"): gamma * bm * d["Z_plus"], ("pt", "p"): (bp / gamma) * d["Z_minus"].shift(1)}
    elif case == "b":
        co = {
            ("p", "pt"): -bm * d["Z_plus"],
            ("pt", "p"): -bp * d["Z_minus"].shift(1),
            ("p", "p"): bm * d["S_minus"],
        }
    elif case == "c":
        co = {
            ("p", "pt"): -bm * d["Z_plus"],
            ("pt", "p"): -bp * d["Z_minus"].shift(1),
            ("pt", "pt"): -bp * d["S_plus"].shift(1),
        }
    elif case == "even-extra":
        co = {
            ("p", "pt"): bm * d["V_plus"],
            ("pt", "p"): bp * d["V_minus"],
            ("p", "p"): -bm * d["T_minus"],
            ("pt", "pt"): bp * d["T_plus"],
        }
    else:
        raise ValueError(f"unknown case {case!r}")
    return Tensor(calc, (1, 1), co)


def symmetric_scalar(G: CyclicFunction, sign: int) -> CyclicFunction:
    """sign/2 [(G(n+1)^3 + G(n)^3) / (G(n+1)^2 G(n)^2) - 1/G(n-1) - 1/G(n+2)]:
    gamma = 1, beta = -1/2; sign -1 for case a, +1 for b and c."""
    G1 = G.shift(1)
    return (sign * 0.5) * ((G1**3 + G**3) / (G1**2 * G**2) - 1 / G.shift(-1) - 1 / G.shift(2))


def scalar_closed_case(m: Metric, gamma: float, case: str, lift: Lift | None = None, B_extra=None) -> CurvatureReport:
    """Curvature report for G_p = G < 0 real with X_p = gamma > 0.

    The scalar is taken from the case formula; Ricci, rho and Einstein come
    from the generic pipeline on the matching connection.  The case
    intermediates (Z, S, W and, for even-extra, V, T) are in ``diagnostics``
    along with the case-formula Ricci.
    """
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    if not (np.isreal(gamma) and gamma > 0):
        raise ValueError(f"gamma must be a positive real, got {gamma}")
    G = m.G_p
    if not (G.is_real() and np.all(G.values.real < 0)):
        raise ValueError("G_p must be real and negative")
    if not (x_ratio(m, "p") - gamma).max_abs() <= 1e-10 * max(1.0, abs(gamma)):
        raise ValueError("metric does not have constant X_p = gamma")
    lift = lift or Lift.standard(m.N)
    _check(Connection.flat(m.N), m, lift)
    conn = case_connection(m, gamma, case, B_extra)
    co = rho_coefficients(conn)
    rho_p, rho_pt = rho_closed(conn)
    B = (conn.B_p, conn.B_pt) if case == "even-extra" else None
    diags = case_diagnostics(G, gamma, B)
    diags["ricci_case"] = case_ricci(G, gamma, case, lift.beta, B)
    return CurvatureReport(
        rho_p=rho_p,
        rho_pt=rho_pt,
        M_p=co["p"][0],
        M_pt=co["pt"][0],
        N_p=co["p"][1],
        N_pt=co["pt"][1],
        ricci=ricci(conn, m, lift),
        scalar=case_scalar(G, gamma, case, lift.beta, B),
        einstein=einstein(conn, m, lift),
        connection=conn,
        diagnostics=diags,
    )


# -- continuum comparison ---------------------------------------------------

@dataclass(frozen=True)
class LimitRow:
    N: int
    max_error: float
    order: float | None


def _derivatives(f, t, h=1e-4):
    f0 = f(t)
    d1 = (f(t + h) - f(t - h)) / (2 * h)
    d2 = (f(t + h) - 2 * f0 + f(t - h)) / h**2
    return f0, d1, d2


def continuum_scalar(g, t, sign: int, dg=None, d2g=None):
    """sign (G'' G - G'^2) / G^3 for G = -g; derivatives by central
    differences unless supplied."""
    t = np.asarray(t, dtype=float)
    if dg is None or d2g is None:
        g0, g1, g2 = _derivatives(g, t)
    else:
        g0, g1, g2 = g(t), dg(t), d2g(t)
    G0, G1, G2 = -g0, -g1, -g2
    return sign * (G2 * G0 - G1**2) / G0**3


def continuous_limit_compare(g, N_list, sign: int = -1, dg=None, d2g=None) -> list:
    """Sample G(n) = -g(n/N), rescale the discrete scalar by N^2 and compare
    with the continuum expression at (n + 1/2)/N.

    The N^2 scaling and the midpoint are derived choices: the stencil spans
    n-1..n+2 symmetrically about n + 1/2 and is a second difference.
    """
    rows = []
    prev = None
    for N in N_list:
        n = np.arange(N)
        G = CyclicFunction(-np.asarray(g(n / N), dtype=float))
        disc = N**2 * symmetric_scalar(G, sign).values.real
        cont = continuum_scalar(g, (n + 0.5) / N, sign, dg, d2g)
        err = float(np.max(np.abs(disc - cont)))
        order = None
        if prev is not None and err > 0 and prev[1] > 0:
            order = float(np.log(prev[1] / err) / np.log(N / prev[0]))
        rows.append(LimitRow(N, err, order))
        prev = (N, err)
    return rows


# -- inverse problem --------------------------------------------------------

def inverse_metric(R_target, seeds=(-1.0, -1.0, -1.0), steps=None, sign: int = -1,
                   threshold: float = BLOWUP_THRESHOLD) -> np.ndarray:
    """Rebuild G on a window of Z from three seeds and a target scalar.

    Index convention: output[j] = G(j); R_target[j] is imposed at n = j + 1,
    so each step fixes G(j + 3).  Returns ``steps + 3`` values.
    """
    R = np.asarray(R_target, dtype=complex).ravel()
    steps = len(R) if steps is None else int(steps)
    if steps > len(R):
        raise ValueError(f"{steps} steps need {steps} target values, got {len(R)}")
    if len(seeds) != 3:
        raise ValueError("exactly three seed values are needed")
    G = [complex(s) for s in seeds]
    if min(abs(s) for s in G) <= ZERO_TOL:
        raise ValueError("seed values must be non-zero")
    for j in range(steps):
        Gm, G0, G1 = G[j], G[j + 1], G[j + 2]
        inv = (G1**3 + G0**3) / (G1**2 * G0**2) - 1 / Gm - 2 * R[j] / sign
        if abs(inv) > threshold or abs(inv) <= ZERO_TOL:
            raise BlowUp(f"|1/G| = {abs(inv):.3e} at step {j}", np.array(G))
        G.append(1 / inv)
    return np.array(G)


def window_scalar(G, sign: int = -1) -> np.ndarray:
    """The symmetric-case stencil on a window: entry j is the scalar at n = j + 1."""
    G = np.asarray(G, dtype=complex)
    Gm, G0, G1, G2 = G[:-3], G[1:-2], G[2:-1], G[3:]
    return sign * 0.5 * ((G1**3 + G0**3) / (G1**2 * G0**2) - 1 / Gm - 1 / G2)


def symmetric_case_metric(G: CyclicFunction, gamma: float = 1.0) -> Metric:
    """The metric the case formulas refer to: G_p = G with X_p = gamma."""
    return symmetric_metric(G, gamma)
