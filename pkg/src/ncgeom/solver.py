"""Classification of torsion-free, metric-compatible connections on Z_N.

Everything is driven by the metric ratio X_p = R_p(G_p) / G_p~.  A compatible
connection exists only if X_p + 1 / R_p(X_p) is a constant c; the branches
then depend on whether X_p is constant and on the product of X_p over the
period.  Every connection produced here is checked by plugging it back into
the six compatibility equations before it is returned.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .connection import Connection, max_residual, metric_compat_residual_closed, star_compat_residual
from .cyclic import DEFAULT_TOL, ZERO_TOL, CyclicFunction
from .metric import DegenerateMetric, Metric, classify, x_ratio

POLE_TOL = 1e-6
DEFAULT_KAPPAS = (0.3, 0.5 + 0.4j, -1.7j)


class PoleError(ValueError):
    pass


@dataclass(frozen=True)
class XProfile:
    X_p: CyclicFunction
    X_pt: CyclicFunction
    c: complex | None
    # 1 + X_g formed from the metric sum R_g G_g + G_g^-1, exact where X_g is near -1
    one_plus_p: CyclicFunction | None = None
    one_plus_pt: CyclicFunction | None = None

    def one_plus(self, g) -> CyclicFunction:
        stored = self.one_plus_p if g == "p" else self.one_plus_pt
        if stored is not None:
            return stored
        return 1.0 + (self.X_p if g == "p" else self.X_pt)

    @property
    def is_constant(self) -> bool:
        return self.X_p.is_constant()

    @property
    def gamma(self) -> complex:
        return self.X_p.mean()


def x_profile(m: Metric, tol: float = DEFAULT_TOL) -> XProfile:
    X_p, X_pt = x_ratio(m, "p"), x_ratio(m, "pt")
    inv = 1.0 / X_p.shift(1)
    cf = X_p + inv
    # read c where both terms are small, so neither carries a large rounding error
    size = np.abs(X_p.values) + np.abs(inv.values)
    best = int(np.argmin(size))
    c = cf[best]
    # the two terms cancel near a pole of X, so compare relative to their size
    if np.any(np.abs(cf.values - c) > tol * np.maximum(1.0, size)):
        c = None
    one_p = (m.G_p.shift(1) + m.G_pt) / m.G_pt
    one_pt = (m.G_pt.shift(-1) + m.G_p) / m.G_p
    return XProfile(X_p, X_pt, c, one_p, one_pt)


def nonconstant_x(N: int, l: int, phi: complex) -> CyclicFunction:
    """f(n) = cos(pi l/N) + sin(pi l/N) cot(phi - pi l (n+1)/N).

    Satisfies (c - f(n)) f(n+1) = 1 with c = 2 cos(pi l/N).  ``phi`` may be
    complex (non-real metrics).  l = 0 and l = N give the constants 1, -1.
    """
    if not 0 <= l < 2 * N:
        raise ValueError(f"l={l} outside 0..{2 * N - 1}")
    a = math.pi * l / N
    # cot has period pi: reduce l (n+1) mod N in exact integers before scaling
    arg = phi - math.pi * ((l * (np.arange(N) + 1)) % N) / N
    s = np.sin(arg)
    if np.min(np.abs(s)) < POLE_TOL:
        raise PoleError(f"phi={phi} lies within {POLE_TOL} of a cotangent pole for l={l}")
    return CyclicFunction(math.cos(a) + math.sin(a) * np.cos(arg) / s)


def recurrence_solution(N: int, gamma: complex, H: complex) -> CyclicFunction:
    """Non-constant periodic solution written through gamma and H:
    f(n) = (H g^-n - H^-1 g^n) / (H g^(-n-1) - H^-1 g^(n+1))."""
    n = np.arange(N)
    num = H * gamma ** (-n) - gamma**n / H
    den = H * gamma ** (-n - 1) - gamma ** (n + 1) / H
    return CyclicFunction(num / den)


@dataclass(frozen=True)
class FamilyParams:
    """Where a connection sits in the classification.

    ``x_kind`` is ``"constant"`` (with ``gamma``) or ``"nonconstant"`` (with
    ``l``/``phi`` when they could be recovered from X).  ``case`` is one of
    Ia, Ib, Ic, IIzero, IIa, IIb, IInonconst.
    """

    x_kind: str
    case: str
    gamma: complex | None = None
    l: int | None = None
    phi: complex | None = None
    kappa_p: complex | None = None
    kappa_pt: complex | None = None

    @property
    def H(self):
        return None if self.phi is None else cmath.exp(1j * self.phi)

    def to_json(self) -> dict:
        if self.x_kind == "constant":
            xk = {"constant": _pair(self.gamma)}
        else:
            xk = {"nonconstant": {"l": self.l, "phi": _pair(self.phi)}}
        out = {"x_kind": xk, "case": self.case}
        if self.kappa_p is not None:
            out["kappa_p"] = _pair(self.kappa_p)
            out["kappa_pt"] = _pair(self.kappa_pt)
        return out

    @classmethod
    def from_json(cls, obj):
        xk = obj["x_kind"]
        kw = {}
        if "constant" in xk:
            kw.update(x_kind="constant", gamma=complex(*xk["constant"]))
        else:
            nc = xk["nonconstant"]
            phi = nc.get("phi")
            kw.update(x_kind="nonconstant", l=nc.get("l"), phi=None if phi is None else complex(*phi))
        if "kappa_p" in obj:
            kw.update(kappa_p=complex(*obj["kappa_p"]), kappa_pt=complex(*obj.get("kappa_pt", (0, 0))))
        return cls(case=obj["case"], **kw)


def _pair(z):
    if z is None:
        return None
    z = complex(z)
    return [z.real, z.imag]


@dataclass(frozen=True)
class Solution:
    connection: Connection
    params: FamilyParams
    residual: float

    def __iter__(self):
        return iter((self.connection, self.params))


@dataclass
class Classification:
    """Connections found for a metric, plus notes on excluded branches."""

    solutions: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    xprofile: XProfile | None = None

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def __getitem__(self, i):
        return self.solutions[i]

    def by_case(self, case):
        return [s for s in self.solutions if s.params.case == case]


# -- building blocks -------------------------------------------------------

def _shift_inv(g):
    return -1 if g == "p" else 1


def _B_first(xp: XProfile, g):
    """B_g = -R_{g^-1} X_g (b_g = -1 - R_{g^-1} X_g)."""
    X = xp.X_p if g == "p" else xp.X_pt
    return -X.shift(_shift_inv(g))


def _B_second(xp: XProfile, g, yhom):
    """b_g = (c+2) R X_g / (1 + R X_g + (c+2) y_hom) - R X_g - 1, R = R_{g^-1}.

    Returns B_g = 1 + b_g, computed as
    B_g = R X_g (1 + R_g X_{g^-1} - (c+2) y_hom) / (1 + R X_g + (c+2) y_hom),
    using c - R_{g^-1} X_g = R_g X_{g^-1} pointwise.  Both 1 + X terms come
    straight from metric sums, so nothing cancels near X = -1.
    """
    h = "pt" if g == "p" else "p"
    k = _shift_inv(g)
    RX = (xp.X_p if g == "p" else xp.X_pt).shift(k)
    c2y = (xp.c + 2) * yhom
    return RX * (xp.one_plus(h).shift(-k) - c2y) / (xp.one_plus(g).shift(k) + c2y)


def y_hom(X_p: CyclicFunction, kappa: complex) -> CyclicFunction:
    """kappa (-1)^n prod_{k<n} X_p(k), the homogeneous solution (both generators)."""
    N = X_p.modulus
    prods = np.concatenate(([1.0 + 0j], np.cumprod(X_p.values)[:-1]))
    return CyclicFunction(kappa * (-1.0) ** np.arange(N) * prods)


def y_particular(xp: XProfile, g) -> CyclicFunction:
    """y_g^0 = (1 + R_{g^-1} X_g) / (c + 2)."""
    return xp.one_plus(g).shift(_shift_inv(g)) * (1.0 / (xp.c + 2))


def connection_from_B(m: Metric, B_p: CyclicFunction, B_pt: CyclicFunction) -> Connection:
    """A_g = R_{g^-1} G_g / (G_g R_{g^-1} B_{g^-1})."""
    A_p = m.G_p.shift(-1) / (m.G_p * B_pt.shift(-1))
    A_pt = m.G_pt.shift(1) / (m.G_pt * B_p.shift(1))
    return Connection(A_p, A_pt, B_p, B_pt)


def kappa_constraint(X: CyclicFunction, c: complex) -> complex:
    """kappa_p kappa_p~ = (X(N-1)/X(0) - 1) / (c+2)^2."""
    if abs(c + 2) <= ZERO_TOL:
        raise ValueError("kappa constraint is undefined for c = -2 (only X = -1 exists there)")
    return (X[X.modulus - 1] / X[0] - 1.0) / (c + 2) ** 2


def kappa_constraint_closed(gamma: complex, H: complex) -> complex:
    """-H^2 (gamma-1)^2 / ((gamma+1)^2 (H^2-1)^2)."""
    return -(H**2) * (gamma - 1) ** 2 / ((gamma + 1) ** 2 * (H**2 - 1) ** 2)


def star_kappas(K: complex, phase: float = 0.0):
    """kappa pair with kappa_p~ = -conj(kappa_p) and product K (needs K real < 0)."""
    if abs(K.imag) > DEFAULT_TOL or K.real >= 0:
        raise ValueError(f"star-compatible kappas need a real negative product, got {K}")
    r = math.sqrt(-K.real)
    kp = r * cmath.exp(1j * phase)
    return kp, -kp.conjugate()


def _recover_l_phi(xp: XProfile):
    """Best-effort (l, phi) for a non-constant real-c profile."""
    N = xp.X_p.modulus
    c = xp.c
    if abs(c.imag) > 1e-9 or abs(c.real) >= 2:
        return None, None
    a = math.acos(c.real / 2)
    l = int(round(a * N / math.pi))
    if abs(l * math.pi / N - a) > 1e-8:
        return None, None
    # X(0) = cos a + sin a cot(phi - a); pick the branch reproducing X exactly
    cot0 = (xp.X_p[0] - math.cos(a)) / math.sin(a)
    phi = a + cmath.atan(1 / cot0)
    for cand_l, cand_phi in ((l, phi), (2 * N - l, -phi)):
        try:
            f = nonconstant_x(N, cand_l, cand_phi)
        except PoleError:
            continue
        if np.max(np.abs(f.values - xp.X_p.values)) < 1e-8:
            phi_out = cand_phi.real if abs(cand_phi.imag) < 1e-12 else cand_phi
            return cand_l, phi_out
    return None, None


# -- enumeration -------------------------------------------------------------

def enumerate_connections(m: Metric, kappas=DEFAULT_KAPPAS, tol: float = DEFAULT_TOL) -> Classification:
    """All torsion-free metric-compatible connections for ``m``.

    One-parameter branches (case Ic and the constant-X IInonconst family) are
    sampled at the supplied ``kappas`` (values of kappa_p, or of kappa_p~ on
    the mirrored constant-X branch).
    """
    xp = x_profile(m, tol)
    out = Classification(xprofile=xp)
    if xp.c is None:
        out.diagnostics.append(
            "no compatible connection: X_p + 1/R_p(X_p) is not constant "
            "(both metric contractions must be constant)"
        )
        return out
    N = m.N
    c = xp.c
    candidates = []  # (params, B_p, B_pt)
    if xp.is_constant:
        gamma = xp.gamma
        base = FamilyParams("constant", "IIzero", gamma=gamma)
        one = CyclicFunction.constant(N, 1.0)
        candidates.append((base, one, one))
        if abs(gamma + 1) > tol:
            candidates.append((replace(base, case="IIa"), one, one * (-1 / gamma)))
            candidates.append((replace(base, case="IIb"), one * (-gamma), one))
            if abs(gamma**N - (-1) ** N) <= tol:
                for k in kappas:
                    for kp, kpt in ((k, 0.0), (0.0, k)):
                        p = replace(base, case="IInonconst", kappa_p=complex(kp), kappa_pt=complex(kpt))
                        candidates.append((p, *_case_c_b(xp, kp, kpt, out.diagnostics)))
    else:
        if abs(c + 2) <= tol:
            out.diagnostics.append("c = -2 admits only X = -1; non-constant X is inconsistent")
            return out
        l, phi = _recover_l_phi(xp)
        base = FamilyParams("nonconstant", "Ia", l=l, phi=phi)
        zero = CyclicFunction.constant(N, 0.0)
        try:
            candidates.append((base, _B_first(xp, "p"), _B_second(xp, "pt", zero)))
        except ZeroDivisionError:
            out.diagnostics.append("Ia excluded: 1 + X_p vanishes somewhere")
        try:
            candidates.append((replace(base, case="Ib"), _B_second(xp, "p", zero), _B_first(xp, "pt")))
        except ZeroDivisionError:
            out.diagnostics.append("Ib excluded: 1 + X_p~ vanishes somewhere")
        if abs(xp.X_p.product() - (-1) ** N) <= 1e-8:
            K = kappa_constraint(xp.X_p, c)
            for k in kappas:
                if abs(k) <= ZERO_TOL:
                    continue
                p = replace(base, case="Ic", kappa_p=complex(k), kappa_pt=K / k)
                candidates.append((p, *_case_c_b(xp, k, K / k, out.diagnostics, constrained=True)))
        else:
            out.diagnostics.append("Ic absent: product of X_p over the period is not (-1)^N")
    for params, B_p, B_pt in candidates:
        if B_p is None:
            continue
        sol = _finish(m, params, B_p, B_pt, tol, out.diagnostics)
        if sol is not None:
            out.solutions.append(sol)
    if not out.solutions:
        out.diagnostics.append("all branches excluded")
    return out


def _constrained_partner(xp: XProfile, yp: CyclicFunction) -> CyclicFunction:
    """y_hom for p~ from (c+2)^2 y_p y_p~ = R_p~(X_p) / X_p - 1, imposed pointwise.

    Equivalent to the product constraint on the kappas, but consistent with
    the local metric data instead of a period-long cumulative product.
    """
    X = xp.X_p
    return (X.shift(-1) - X) / (X * yp * (xp.c + 2) ** 2)


def _case_c_b(xp, kappa_p, kappa_pt, diagnostics, constrained=False):
    yp = y_hom(xp.X_p, kappa_p)
    ypt = _constrained_partner(xp, yp) if constrained else y_hom(xp.X_p, kappa_pt)
    for g, y in (("p", yp), ("pt", ypt)):
        if not (y + y_particular(xp, g)).nonvanishing():
            diagnostics.append(f"kappa=({kappa_p}, {kappa_pt}) excluded: y_{g} vanishes somewhere")
            return None, None
    try:
        return _B_second(xp, "p", yp), _B_second(xp, "pt", ypt)
    except ZeroDivisionError:
        diagnostics.append(f"kappa=({kappa_p}, {kappa_pt}) excluded: singular B")
        return None, None


def _finish(m, params, B_p, B_pt, tol, diagnostics):
    try:
        conn = connection_from_B(m, B_p, B_pt)
    except ZeroDivisionError:
        diagnostics.append(f"{params.case} excluded: B vanishes, A is singular")
        return None
    res = max_residual(metric_compat_residual_closed(conn, m))
    if res > tol:
        diagnostics.append(f"{params.case} rejected: compatibility residual {res:.3e} > {tol:.1e}")
        return None
    return Solution(conn, params, res)


def case_c_connection(m: Metric, kappa_p: complex, kappa_pt: complex | None = None, tol=DEFAULT_TOL) -> Solution:
    """Sample the Ic family (or, for constant X, the IInonconst family).

    ``kappa_pt`` defaults to the value fixed by the product constraint.
    """
    xp = x_profile(m, tol)
    if xp.c is None:
        raise ValueError("metric admits no compatible connection")
    constrained = kappa_pt is None and not xp.is_constant
    if kappa_pt is None:
        K = kappa_constraint(xp.X_p, xp.c)
        if abs(kappa_p) <= ZERO_TOL:
            raise ValueError("kappa_p must be non-zero to fix kappa_p~ from the constraint")
        kappa_pt = K / kappa_p
    diags = []
    B_p, B_pt = _case_c_b(xp, kappa_p, kappa_pt, diags, constrained)
    if B_p is None:
        raise ValueError(diags[-1])
    kind = "constant" if xp.is_constant else "nonconstant"
    case = "IInonconst" if xp.is_constant else "Ic"
    l, phi = (None, None) if xp.is_constant else _recover_l_phi(xp)
    params = FamilyParams(kind, case, gamma=xp.gamma if xp.is_constant else None, l=l, phi=phi,
                          kappa_p=complex(kappa_p), kappa_pt=complex(kappa_pt))
    sol = _finish(m, params, B_p, B_pt, tol, diags)
    if sol is None:
        raise ValueError(diags[-1])
    return sol


def star_filter(sols, m: Metric, tol: float = DEFAULT_TOL) -> list:
    """Keep the star-compatible connections (real metrics only)."""
    if not classify(m, tol).is_real:
        raise ValueError("star compatibility is only analysed for real metrics")
    return [s for s in sols if max_residual(star_compat_residual(s.connection)) <= tol]


def star_phase_relation(B_g: CyclicFunction, RX: CyclicFunction, X: CyclicFunction, c: complex, yhom: CyclicFunction):
    """Residual of exp(i rho) = -(r + b e^{i varphi}) / (b + r e^{i varphi}) where
    B_g - 1 = r e^{i rho}, (c+2) y_hom = r e^{i varphi}, b = 1 + R_{g^-1} X_g."""
    r = np.sqrt(1 - RX.values / X.values)
    b = 1 + RX.values
    e_rho = (B_g.values - 1) / r
    e_var = (c + 2) * yhom.values / r
    return CyclicFunction(e_rho + (r + b * e_var) / (b + r * e_var))


def z2_compat_residual(G0: complex, G1: complex, S0: complex, S1: complex):
    """Compatibility equations for Z_2 with sigma = S theta_p (x) theta_p."""
    if abs(G0) <= ZERO_TOL or abs(G1) <= ZERO_TOL:
        raise DegenerateMetric("Z_2 metric values must be non-zero")
    r0 = G0 - G1 + G0 * (S0 - 1) + G0 * S0 * (S1 - 1)
    r1 = G1 - G0 + G1 * (S1 - 1) + G1 * S1 * (S0 - 1)
    return complex(r0), complex(r1)
