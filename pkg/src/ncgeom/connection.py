"""Torsion-free bimodule connections on Z_N and their residual checks.

For the inner calculus every bimodule connection has the form
``nabla(w) = theta (x) w - sigma(w (x) theta)`` (the extra bimodule map
vanishes for N > 4), so a connection is fully specified by its braiding
``sigma``.  Torsion-freeness fixes ``sigma`` up to four functions
A_p, A_p~, B_p, B_p~.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import (
    INVERSE,
    Calculus,
    Tensor,
    d_one_form,
    d_tensor_front,
    dagger,
    star,
    tensor,
    wedge_front,
)
from .cyclic import CyclicFunction, ModulusMismatch
from .metric import Metric


class Braided:
    """Anything with a ``sigma`` table: {(g, h): sigma(theta_g (x) theta_h)}."""

    calc: Calculus

    def sigma_table(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class GeneralSigma(Braided):
    """Bimodule map on Omega^1 (x) Omega^1 for Z_N, N > 4.

    Degree matching allows only the diagonal words theta_g (x) theta_g and a
    2x2 block ``M`` on span{theta_p (x) theta_p~, theta_p~ (x) theta_p}.
    Column j of M is the image of the j-th word of that span.
    """

    A_p: CyclicFunction
    A_pt: CyclicFunction
    M: tuple  # ((M00, M01), (M10, M11))

    @property
    def calc(self):
        return Calculus.of(self.A_p.shape)

    def sigma_table(self):
        calc = self.calc
        (m00, m01), (m10, m11) = self.M
        return {
            ("p", "p"): Tensor(calc, (1, 1), {("p", "p"): self.A_p}),
            ("pt", "pt"): Tensor(calc, (1, 1), {("pt", "pt"): self.A_pt}),
            ("p", "pt"): Tensor(calc, (1, 1), {("p", "pt"): m00, ("pt", "p"): m10}),
            ("pt", "p"): Tensor(calc, (1, 1), {("p", "pt"): m01, ("pt", "p"): m11}),
        }


@dataclass(frozen=True)
class Connection(Braided):
    """sigma(theta_g (x) theta_g) = A_g theta_g (x) theta_g and
    sigma(theta_g (x) theta_g^-1) = B_g (theta_p theta_p~ + theta_p~ theta_p) - theta_g theta_g^-1."""

    A_p: CyclicFunction
    A_pt: CyclicFunction
    B_p: CyclicFunction
    B_pt: CyclicFunction

    def __post_init__(self):
        if len({self.A_p.shape, self.A_pt.shape, self.B_p.shape, self.B_pt.shape}) != 1:
            raise ModulusMismatch("connection coefficients have different moduli")
        Calculus.of(self.A_p.shape)

    @property
    def calc(self):
        return Calculus.of(self.A_p.shape)

    @property
    def N(self):
        return self.A_p.modulus

    def A(self, g):
        return self.A_p if g == "p" else self.A_pt

    def B(self, g):
        return self.B_p if g == "p" else self.B_pt

    def general(self) -> GeneralSigma:
        return GeneralSigma(
            self.A_p, self.A_pt, ((self.B_p - 1, self.B_pt), (self.B_p, self.B_pt - 1))
        )

    def sigma_table(self):
        return self.general().sigma_table()

    @classmethod
    def flat(cls, N):
        one = CyclicFunction.constant(N, 1.0)
        return cls(one, one, one, one)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            **{k: getattr(self, k).to_json()["values"] for k in ("A_p", "A_pt", "B_p", "B_pt")},
        }

    @classmethod
    def from_json(cls, obj):
        N = obj["N"]
        return cls(
            *(CyclicFunction.from_json({"N": N, "values": obj[k]}) for k in ("A_p", "A_pt", "B_p", "B_pt"))
        )


def sigma_apply(c: Braided, t: Tensor) -> Tensor:
    """sigma on Omega^1 (x) Omega^1, left-linear on the normalized form."""
    if t.kind != (1, 1):
        raise ValueError("sigma acts on kind (1, 1)")
    if c.calc.shape != t.calc.shape:
        raise ModulusMismatch(f"shapes {c.calc.shape} and {t.calc.shape}")
    table = c.sigma_table()
    out = Tensor(t.calc, (1, 1))
    for key, coeff in t.coeffs.items():
        out = out + table[key].lmul(coeff)
    return out


def sigma_front(c: Braided, t: Tensor) -> Tensor:
    """(sigma (x) id) on three one-form slots."""
    table = c.sigma_table()
    calc = t.calc
    out = Tensor(calc, (1, 1, 1))
    for key, coeff in t.coeffs.items():
        out = out + tensor(table[key[:2]].lmul(coeff), calc.theta(key[2]))
    return out


def nabla_one_form(c: Braided, w: Tensor) -> Tensor:
    """nabla w = theta (x) w - sigma(w (x) theta)."""
    th = w.calc.inner()
    return tensor(th, w) - sigma_apply(c, tensor(w, th))


def nabla_basis(c: Braided) -> dict:
    calc = c.calc
    return {g: nabla_one_form(c, calc.theta(g)) for g in calc.gens}


def nabla_tensor2(c: Braided, t: Tensor, _basis=None) -> Tensor:
    """nabla(w (x) v) = nabla w (x) v + (sigma (x) id)(w (x) nabla v), summed over
    the left-normalized words c_ab theta_a (x) theta_b."""
    from .calculus import differential

    calc = t.calc
    nb = _basis or nabla_basis(c)
    out = Tensor(calc, (1, 1, 1))
    for (a, b), coeff in t.coeffs.items():
        tb = calc.theta(b)
        out = out + tensor(tensor(differential(coeff), calc.theta(a)), tb)
        out = out + tensor(nb[a].lmul(coeff), tb)
        out = out + sigma_front(c, tensor(calc.theta(a).lmul(coeff), nb[b]))
    return out


def torsion_residual(s: Braided) -> dict:
    """wedge(theta_g (x) theta) + wedge(sigma(theta_g (x) theta)) per generator."""
    calc = s.calc
    th = calc.inner()
    out = {}
    for g in calc.gens:
        t = tensor(calc.theta(g), th)
        out[g] = wedge_front(t) + wedge_front(sigma_apply(s, t))
    return out


def torsion_direct(c: Braided) -> dict:
    """T(theta_g) = wedge(nabla theta_g) - d theta_g, by definition."""
    calc = c.calc
    return {g: wedge_front(nabla_one_form(c, calc.theta(g))) - d_one_form(calc.theta(g)) for g in calc.gens}


def star_compat_residual(c: Connection) -> dict:
    """Residuals of R_g(conj A_g) R_{g^-1}(A_{g^-1}) = 1 and
    |B_g - 1|^2 + conj(B_g) B_{g^-1} = 1 for g in {p, p~}."""
    out = {}
    for g, k in (("p", 1), ("pt", -1)):
        h = INVERSE[g]
        out[f"A_{g}"] = c.A(g).conj().shift(k) * c.A(h).shift(-k) - 1
        Bg = c.B(g)
        out[f"B_{g}"] = (Bg - 1) * (Bg - 1).conj() + Bg.conj() * c.B(h) - 1
    return out


def star_compat_direct(c: Braided) -> dict:
    """nabla(w^*) - sigma(dagger(nabla w)) on the basis one-forms."""
    calc = c.calc
    return {
        g: nabla_one_form(c, star(calc.theta(g))) - sigma_apply(c, dagger(nabla_one_form(c, calc.theta(g))))
        for g in calc.gens
    }


# Closed-form compatibility residuals, with the slot of the direct Tensor3
# residual each one equals.  For generator g (k = +-1 its shift):
#   eq1_g -> (g, g, g^-1)     eq2_g -> (g, g^-1, g^-1)     eq3_g -> (g^-1, g, g^-1)
CLOSED_SLOTS = {
    "eq1_p": ("p", "p", "pt"),
    "eq2_p": ("p", "pt", "pt"),
    "eq3_p": ("pt", "p", "pt"),
    "eq1_pt": ("pt", "pt", "p"),
    "eq2_pt": ("pt", "p", "p"),
    "eq3_pt": ("p", "pt", "p"),
}


def metric_compat_residual_closed(c: Connection, m: Metric) -> dict:
    """The six scalar compatibility equations, as LHS - RHS functions."""
    if c.calc.shape != m.calc.shape:
        raise ModulusMismatch("connection and metric moduli differ")
    out = {}
    for g, k in (("p", 1), ("pt", -1)):
        h = INVERSE[g]
        Gg, Gh = m.G[g], m.G[h]
        Ag, Ah, Bg, Bh = c.A(g), c.A(h), c.B(g), c.B(h)
        out[f"eq1_{g}"] = Gg * Bh.shift(-k) * Ag - Gg.shift(-k)
        out[f"eq2_{g}"] = Gh * (Bg.shift(k) - 1) * Bh + Gg * (Bg - 1) * Ah.shift(-k)
        out[f"eq3_{g}"] = Gh * (Bg.shift(k) - 1) * (Bh - 1) + Gg * Bg * Ah.shift(-k) - Gg.shift(k)
    return out


def metric_compat_residual_direct(c: Braided, m: Metric) -> Tensor:
    """(nabla (x) id) g + (sigma (x) id)(id (x) nabla) g as an element of the
    triple tensor product."""
    return nabla_tensor2(c, m.tensor())


def cotorsion_residual(c: Braided, m: Metric) -> Tensor:
    """coT = (d (x) id - id ^ nabla) g in Omega^2 (x) Omega^1."""
    g = m.tensor()
    nb = nabla_basis(c)
    calc = g.calc
    wedge_part = Tensor(calc, (2, 1))
    for (a, b), coeff in g.coeffs.items():
        wedge_part = wedge_part + wedge_front(tensor(calc.theta(a).lmul(coeff), nb[b]))
    return d_tensor_front(g) - wedge_part


def cotorsion_closed(c: Connection, m: Metric) -> dict:
    """R_g G_g + G_g^-1 (R_g B_g - 1) - G_g R_g^-1 A_g^-1 for g in {p, p~}."""
    out = {}
    for g, k in (("p", 1), ("pt", -1)):
        h = INVERSE[g]
        out[g] = m.G[g].shift(k) + m.G[h] * (c.B(g).shift(k) - 1) - m.G[g] * c.A(h).shift(-k)
    return out


def max_residual(res) -> float:
    if isinstance(res, Tensor):
        return res.max_abs()
    if isinstance(res, dict):
        return max((max_residual(v) for v in res.values()), default=0.0)
    if isinstance(res, (list, tuple)):
        return max((max_residual(v) for v in res), default=0.0)
    return res.max_abs() if hasattr(res, "max_abs") else float(np.abs(res))
