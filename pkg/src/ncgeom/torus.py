"""Metrics and connections on the product Z_N x Z_M.

Generators p, p~ move along the first axis and s, s~ along the second.  The
braiding has the circle terms on each axis, a coupling ``W_g`` from one
axis' symmetric two-tensor into the other's, and ``C_ab`` on mixed words.

Residuals come in two flavours: the explicit scalar equations (36 for
compatibility, 16 for cotorsion) and the generic tensor engine.  Each
explicit equation equals one slot of the engine's output; ``compat_slot``
and ``cotorsion_slot`` say which.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import INVERSE, Calculus, Tensor
from .connection import Braided, cotorsion_residual, metric_compat_residual_direct, torsion_residual
from .cyclic import GridFunction, ModulusMismatch
from .metric import Metric

GENS = ("p", "pt", "s", "st")
AXIS = {"p": 0, "pt": 0, "s": 1, "st": 1}
MIXED = tuple((a, b) for a in GENS for b in GENS if AXIS[a] != AXIS[b])
C_KEYS = {pair: "C_" + "".join(pair) for pair in MIXED}


def perpendicular(g):
    return ("s", "st") if AXIS[g] == 0 else ("p", "pt")


class TorusMetric(Metric):
    """G_p theta_p (x) theta_p~ + G_p~ theta_p~ (x) theta_p + the same on the s axis."""

    def __init__(self, G_p, G_pt, G_s, G_st):
        super().__init__(G_p, G_pt, s=G_s, st=G_st)

    @property
    def moduli(self):
        return self.calc.shape

    @classmethod
    def constant(cls, N, M, value=-1.0):
        f = GridFunction.constant((N, M), value)
        return cls(f, f, f, f)

    def to_json(self):
        N, M = self.moduli
        return {"N": N, "M": M, **{f"G_{g}": self.G[g].to_json()["values"] for g in GENS}}

    @classmethod
    def from_json(cls, obj):
        return cls(*(_grid(obj, f"G_{g}") for g in GENS))


def _grid(obj, key):
    return GridFunction.from_json({"N": obj["N"], "M": obj["M"], "values": obj[key]})


@dataclass(frozen=True)
class TorusConnection(Braided):
    """A, B, W indexed by generator; C indexed by mixed ordered pairs."""

    A: dict
    B: dict
    W: dict
    C: dict

    def __post_init__(self):
        fns = [*self.A.values(), *self.B.values(), *self.W.values(), *self.C.values()]
        if {len(self.A), len(self.B), len(self.W)} != {4} or set(self.C) != set(MIXED):
            raise ValueError("need A, B, W for p, pt, s, st and C for every mixed pair")
        if len({f.shape for f in fns}) != 1:
            raise ModulusMismatch("torus connection coefficients have different moduli")
        Calculus.of(fns[0].shape)

    @property
    def calc(self):
        return Calculus.of(self.A["p"].shape)

    def sigma_table(self):
        calc = self.calc
        out = {}
        for g in GENS:
            gi = INVERSE[g]
            h, hi = perpendicular(g)
            out[(g, g)] = Tensor(calc, (1, 1), {(g, g): self.A[g]})
            sym = {(g, gi): self.B[g] - 1, (gi, g): self.B[g], (h, hi): self.W[g], (hi, h): self.W[g]}
            out[(g, gi)] = Tensor(calc, (1, 1), sym)
        for (a, b), f in self.C.items():
            out[(a, b)] = Tensor(calc, (1, 1), {(a, b): f - 1, (b, a): f})
        return out

    @classmethod
    def uniform(cls, N, M, A=1.0, B=1.0, W=0.0, C=1.0):
        f = lambda v: GridFunction.constant((N, M), v)  # noqa: E731
        return cls(
            {g: f(A) for g in GENS},
            {g: f(B) for g in GENS},
            {g: f(W) for g in GENS},
            {k: f(C) for k in MIXED},
        )

    def to_json(self):
        N, M = self.calc.shape
        out = {"N": N, "M": M}
        for name, d in (("A", self.A), ("B", self.B), ("W", self.W)):
            for g in GENS:
                out[f"{name}_{g}"] = d[g].to_json()["values"]
        for pair, key in C_KEYS.items():
            out[key] = self.C[pair].to_json()["values"]
        return out

    @classmethod
    def from_json(cls, obj):
        return cls(
            {g: _grid(obj, f"A_{g}") for g in GENS},
            {g: _grid(obj, f"B_{g}") for g in GENS},
            {g: _grid(obj, f"W_{g}") for g in GENS},
            {pair: _grid(obj, key) for pair, key in C_KEYS.items()},
        )


def _step(calc, g):
    return np.array(calc.gens[g])


# -- explicit equation systems ----------------------------------------------

def _compat_labels():
    labels = []
    for t in (1, 2, 3):
        labels += [(t, g, None) for g in GENS]
    for t in (4, 5, 6):
        labels += [(t, g, h) for g in GENS for h in perpendicular(g)]
    return labels


COMPAT_LABELS = _compat_labels()


def _cot_labels():
    labels = [(1, g, None) for g in GENS]
    labels += [(2, g, h) for g in ("p", "s") for h in perpendicular(g)]
    labels += [(3, g, h) for g in GENS for h in perpendicular(g)]
    return labels


COTORSION_LABELS = _cot_labels()


def _compat_one(c: TorusConnection, m: TorusMetric, t, g, h):
    calc = m.calc
    G, A, B, W, C = m.G, c.A, c.B, c.W, c.C
    gi = INVERSE[g]
    Rg, Rgi = _step(calc, g), _step(calc, gi)
    if t in (2, 3):
        h = perpendicular(g)[0]
    if h is not None:
        hi = INVERSE[h]
        Rh, Rhi = _step(calc, h), _step(calc, hi)
    if t == 1:
        return G[g] * A[g] * B[gi].shift(Rgi) - G[g].shift(Rgi)
    if t == 2:
        return (
            G[g] * (B[g] - 1) * (B[gi].shift(Rgi) - 1)
            + G[gi] * B[gi] * A[g].shift(Rg)
            + G[h] * W[h] * (C[(hi, g)].shift(Rhi) - 1)
            + G[hi] * W[hi] * (C[(h, g)].shift(Rh) - 1)
            - G[gi].shift(Rgi)
        )
    if t == 3:
        return (
            G[g] * (B[g] - 1) * A[gi].shift(Rgi)
            + G[gi] * B[gi] * (B[g].shift(Rg) - 1)
            + G[h] * W[h] * (C[(hi, gi)].shift(Rhi) - 1)
            + G[hi] * W[hi] * (C[(h, gi)].shift(Rh) - 1)
        )
    if t == 4:
        return (
            G[g] * (B[g] - 1) * (C[(gi, h)].shift(Rgi) - 1)
            + G[gi] * B[gi] * (C[(g, h)].shift(Rg) - 1)
            + G[h] * W[h] * (B[hi].shift(Rhi) - 1)
            + G[hi] * W[hi] * A[h].shift(Rh)
        )
    if t == 5:
        return G[g] * (C[(g, h)] - 1) * C[(gi, h)].shift(Rgi) + G[h] * C[(h, g)] * W[hi].shift(Rhi)
    if t == 6:
        return (
            G[g] * (C[(g, h)] - 1) * W[gi].shift(Rgi)
            + G[h] * C[(h, g)] * C[(hi, g)].shift(Rhi)
            - G[h].shift(Rgi)
        )
    raise ValueError(f"unknown equation type {t}")


def torus_compat_residual(c: TorusConnection, m: TorusMetric) -> list:
    """The 36 compatibility equations as (label, residual) pairs, in the order
    type 1-3 per generator, then type 4-6 per ordered perpendicular pair.

    Labels are (type, g, h); h is None for types 1-3.
    """
    _check(c, m)
    return [(lab, _compat_one(c, m, *lab)) for lab in COMPAT_LABELS]


def _cot_one(c: TorusConnection, m: TorusMetric, t, g, h):
    calc = m.calc
    G, A, B, W, C = m.G, c.A, c.B, c.W, c.C
    gi = INVERSE[g]
    Rg, Rgi = _step(calc, g), _step(calc, gi)
    if t == 1:
        return G[g].shift(Rg) + G[gi] * (B[g].shift(Rg) - 1) - G[g] * A[gi].shift(Rgi)
    hi = INVERSE[h]
    Rhi = _step(calc, hi)
    if t == 2:
        return G[g] * (C[(gi, h)].shift(Rgi) - 1) - G[gi] * (C[(g, h)].shift(Rg) - 1)
    if t == 3:
        return G[g].shift(Rhi) + G[h] * W[hi].shift(Rhi) - G[g] * C[(gi, h)].shift(Rgi)
    raise ValueError(f"unknown cotorsion family {t}")


def torus_cotorsion_residual(c: TorusConnection, m: TorusMetric) -> list:
    """The 16 cotorsion equations as (label, residual) pairs: family 1 per
    generator, family 2 for g in {p, s} (the g^-1 rows are the same equation
    negated), family 3 per ordered perpendicular pair."""
    _check(c, m)
    return [(lab, _cot_one(c, m, *lab)) for lab in COTORSION_LABELS]


def _check(c, m):
    if c.calc.shape != m.calc.shape:
        raise ModulusMismatch(f"connection on {c.calc.shape}, metric on {m.calc.shape}")


def max_abs(rows) -> float:
    return max(f.max_abs() for _, f in rows)


def format_label(label) -> str:
    t, g, h = label
    return f"type{t}:{g}" + (f",{h}" if h else "")


# -- generic-engine cross checks ---------------------------------------------

def torus_compat_direct(c: TorusConnection, m: TorusMetric) -> Tensor:
    return metric_compat_residual_direct(c, m)


def torus_cotorsion_direct(c: TorusConnection, m: TorusMetric) -> Tensor:
    return cotorsion_residual(c, m)


def torus_torsion(c: TorusConnection) -> dict:
    return torsion_residual(c)


def compat_slot(label):
    """Slot of the direct compatibility tensor that equals this equation."""
    t, g, h = label
    gi = INVERSE[g]
    hi = INVERSE[h] if h else None
    return {1: (g, g, gi), 2: (g, gi, g), 3: (g, gi, gi), 4: (g, gi, h), 5: (g, h, gi), 6: (g, h, hi)}[t]


def cotorsion_slot(label):
    """(sign, slot) with equation == sign * direct cotorsion slot; the first
    two letters of the slot are the canonical two-form."""
    t, g, h = label
    gi = INVERSE[g]
    calc_order = {k: i for i, k in enumerate(GENS)}
    a, b, last, base = {1: (g, gi, gi, 1), 2: (g, gi, h, -1), 3: (g, h, gi, 1)}[t]
    if calc_order[a] > calc_order[b]:
        return -base, (b, a, last)
    return base, (a, b, last)


# -- special solutions --------------------------------------------------------

def build_product_connection(sol_N, sol_M, tol: float = 1e-10):
    """Torus connection and metric from two circle (Connection, Metric) pairs,
    each extended constantly along the other axis, with W = 0 and C = 1."""
    from .connection import max_residual, metric_compat_residual_closed

    (cN, mN), (cM, mM) = sol_N, sol_M
    for c, m in ((cN, mN), (cM, mM)):
        res = max_residual(metric_compat_residual_closed(c, m))
        if res > tol:
            raise ValueError(f"circle solution fails its compatibility residuals ({res:.3e} > {tol:.1e})")
    N, M = mN.N, mM.N
    rows = lambda f: GridFunction.from_rows(f, M)  # noqa: E731
    cols = lambda f: GridFunction.from_cols(f, N)  # noqa: E731
    A = {"p": rows(cN.A_p), "pt": rows(cN.A_pt), "s": cols(cM.A_p), "st": cols(cM.A_pt)}
    B = {"p": rows(cN.B_p), "pt": rows(cN.B_pt), "s": cols(cM.B_p), "st": cols(cM.B_pt)}
    zero = GridFunction.constant((N, M), 0.0)
    one = GridFunction.constant((N, M), 1.0)
    conn = TorusConnection(A, B, {g: zero for g in GENS}, {k: one for k in MIXED})
    metric = TorusMetric(rows(mN.G_p), rows(mN.G_pt), cols(mM.G_p), cols(mM.G_pt))
    return conn, metric


def constant_system(A, B, C1, C2, W):
    """The six equations for a constant metric with all A, B, W equal and
    C split into the two classes C1 (same orientation) and C2 (opposite).
    Returns a list so symbolic and array arguments both work."""
    return [
        B * A - 1,
        C1 * W + B * A + B**2 - 2 * B + C2 * W - 2 * W,
        B * A - A + C1 * W - 2 * W - B + B**2 + C2 * W,
        C1 * W - C2 + C1 * C2,
        C2 * W + C1 * C2 - 1 - W,
        A * W - 2 * B + B * W - C2 - W + C1 * B + C2 * B + 1,
    ]


def symmetric_connection(N, M, A, B, C1, C2, W) -> TorusConnection:
    """Constant connection with C1 on (p,s), (s,p), (p~,s~), (s~,p~) and C2 on the rest."""
    f = lambda v: GridFunction.constant((N, M), v)  # noqa: E731
    same = {("p", "s"), ("s", "p"), ("pt", "st"), ("st", "pt")}
    return TorusConnection(
        {g: f(A) for g in GENS},
        {g: f(B) for g in GENS},
        {g: f(W) for g in GENS},
        {k: f(C1 if k in same else C2) for k in MIXED},
    )


@dataclass
class ConstantCertificate:
    solution: dict
    groebner: list
    scan_minima: list
    system_residual: float
    full_residual: float


def solve_constant_symmetric(scan_step: float = 0.05, box: float = 3.0, N: int = 6, M: int = 6,
                             scan_threshold: float = 0.25) -> ConstantCertificate:
    """Solve the six-equation constant system and certify the answer.

    Exact part: a lex Groebner basis over Q, whose variety is the single point.
    Numerical part: A = 1/B from the first equation, a grid over
    (B, C1, C2, W) in [-box, box]^4, and least-squares refinement of every
    grid cell whose residual norm is below ``scan_threshold``.
    """
    import sympy as sp
    from scipy.optimize import least_squares

    sA, sB, sC1, sC2, sW = sp.symbols("A B C1 C2 W")
    gb = sp.groebner(list(constant_system(sA, sB, sC1, sC2, sW)), sA, sB, sC1, sC2, sW, order="lex")
    sols = sp.solve(list(gb.exprs), [sA, sB, sC1, sC2, sW], dict=True)
    if len(sols) != 1:
        raise ArithmeticError(f"expected a unique solution, found {sols}")
    sol = {str(k): complex(v) for k, v in sols[0].items()}

    grid = np.arange(-box, box + scan_step / 2, scan_step)
    C1, C2, W = (a.ravel() for a in np.meshgrid(grid, grid, grid, indexing="ij"))
    # equations 4 and 5 do not involve A or B: prune the grid once
    part = (C1 * W - C2 + C1 * C2) ** 2 + (C2 * W + C1 * C2 - 1 - W) ** 2
    keep = part < scan_threshold**2
    C1, C2, W, part = C1[keep], C2[keep], W[keep], part[keep]
    starts = []
    for b in grid:
        if abs(b) < scan_step / 2:
            continue
        r = constant_system(1 / b, b, C1, C2, W)
        norm = np.sqrt(part + r[1] ** 2 + r[2] ** 2 + r[5] ** 2)
        for i in np.nonzero(norm < scan_threshold)[0]:
            starts.append((norm[i], b, C1[i], C2[i], W[i]))
    starts.sort()
    minima = []
    for _, b, c1, c2, w in starts[:50]:
        fit = least_squares(lambda x: np.array(constant_system(*x)), [1 / b, b, c1, c2, w], xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if np.max(np.abs(fit.fun)) < 1e-12:
            minima.append(tuple(float(v) for v in fit.x))
    vals = [sol[k] for k in ("A", "B", "C1", "C2", "W")]
    conn = symmetric_connection(N, M, *vals)
    metric = TorusMetric.constant(N, M)
    full = max(max_abs(torus_compat_residual(conn, metric)), max_abs(torus_cotorsion_residual(conn, metric)))
    return ConstantCertificate(
        solution=sol,
        groebner=[str(e) for e in gb.exprs],
        scan_minima=minima,
        system_residual=float(np.max(np.abs(constant_system(*vals)))),
        full_residual=full,
    )


@dataclass
class FamilyReport:
    connection: TorusConnection
    metric: TorusMetric
    identities: dict
    compat: list
    cotorsion: list

    @property
    def compat_max(self):
        return max_abs(self.compat)

    @property
    def cotorsion_max(self):
        return max_abs(self.cotorsion)


def _complete(B: dict, W: dict, metric: TorusMetric) -> TorusConnection:
    """A from cotorsion family 1 and C from family 3, given B and W."""
    calc = metric.calc
    G = metric.G
    A, C = {}, {}
    for g in GENS:
        gi = INVERSE[g]
        Rg = _step(calc, g)
        # G_g R_{g^-1} A_{g^-1} = R_g G_g + G_{g^-1} (R_g B_g - 1)
        A[gi] = ((G[g].shift(Rg) + G[gi] * (B[g].shift(Rg) - 1)) / G[g]).shift(Rg)
        for h in perpendicular(g):
            hi = INVERSE[h]
            Rhi = _step(calc, hi)
            # G_g R_{g^-1} C_{g^-1 h} = R_{h^-1} G_g + G_h R_{h^-1} W_{h^-1}
            C[(gi, h)] = ((G[g].shift(Rhi) + G[h] * W[hi].shift(Rhi)) / G[g]).shift(Rg)
    return TorusConnection(A, B, W, C)


def alternating_family(N: int, M: int, branch: int = 1, axes=("p", "s"), value=-1.0) -> FamilyReport:
    """Constant metric, B_g(n, m) = (1 + branch (-1)^(n+m) i sqrt 3) / 2 on every
    generator, W = -1 - sqrt(3/2) on the axis of ``axes[0]`` and
    sqrt(3/2) - 1 on the other.  A and C are completed from cotorsion; the
    full residual systems are reported, not asserted."""
    if N % 2 or M % 2:
        raise ValueError(f"the alternating family needs N and M even, got ({N}, {M})")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    if len(axes) != 2 or {AXIS[a] for a in axes} != {0, 1}:
        raise ValueError(f"axes must name one generator per axis, got {axes}")
    n, m = np.meshgrid(np.arange(N), np.arange(M), indexing="ij")
    Bv = GridFunction(0.5 * (1 + branch * (-1.0) ** (n + m) * 1j * np.sqrt(3)))
    w_big, w_small = -1 - np.sqrt(1.5), np.sqrt(1.5) - 1
    first = AXIS[axes[0]]
    W = {g: GridFunction.constant((N, M), w_big if AXIS[g] == first else w_small) for g in GENS}
    B = {g: Bv for g in GENS}
    metric = TorusMetric.constant(N, M, value)
    conn = _complete(B, W, metric)
    g, h = axes
    one = GridFunction.constant((N, M), 1.0)
    identities = {
        "cube": ((1 - Bv) ** 3 - Bv**3).max_abs(),
        "unit_modulus": (Bv.conj() * Bv - one).max_abs(),
        "shift_inverse_first_axis": (Bv.shift(_step(metric.calc, "p")) * Bv - one).max_abs(),
        "shift_inverse_second_axis": (Bv.shift(_step(metric.calc, "s")) * Bv - one).max_abs(),
        "B_plus_inverse": (B[g] + 1 / B[h] - one).max_abs(),
        "W_product": (2 * W[g] * W[h] + one).max_abs(),
        "W_sum": (2 + W[g] + W[h]).max_abs(),
    }
    return FamilyReport(conn, metric, identities, torus_compat_residual(conn, metric),
                        torus_cotorsion_residual(conn, metric))


def minus_two_family(N: int, M: int, axes=("p", "s"), B_w_axis=1.0, B_zero_axis=(1.0, -1.0),
                     value=-1.0) -> FamilyReport:
    """W = -2 on the axis of ``axes[0]`` and W = 0 on the other.

    B is ``B_w_axis`` on both generators of the W = -2 axis and
    ``B_zero_axis`` = (B_h, B_h~) on the other, h = ``axes[1]``.  The default
    (1, -1) solves the full system; B = (1, 1) there leaves the type-4
    equations at |G| * 4.  Residuals reported, not asserted.
    """
    if len(axes) != 2 or {AXIS[a] for a in axes} != {0, 1}:
        raise ValueError(f"axes must name one generator per axis, got {axes}")
    g, h = axes
    f = lambda v: GridFunction.constant((N, M), v)  # noqa: E731
    W = {k: f(-2.0 if AXIS[k] == AXIS[g] else 0.0) for k in GENS}
    B = {g: f(B_w_axis), INVERSE[g]: f(B_w_axis), h: f(B_zero_axis[0]), INVERSE[h]: f(B_zero_axis[1])}
    metric = TorusMetric.constant(N, M, value)
    conn = _complete(B, W, metric)
    identities = {"W_fifth": (W[g] * (2 + W[g] + W[h])).max_abs()}
    return FamilyReport(conn, metric, identities, torus_compat_residual(conn, metric),
                        torus_cotorsion_residual(conn, metric))
