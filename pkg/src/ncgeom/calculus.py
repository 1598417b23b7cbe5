"""Minimal bicovariant first-order calculus on Z_N and Z_N x Z_M.

Forms and tensors are stored as dictionaries from basis words to coefficient
functions placed on the *left* of the basis element.  The only commutation
rule needed is ``f theta_g = theta_g R_g(f)``, i.e. a function moved from the
right of a basis word of total degree ``D`` to its left becomes
``f.shift(-D)``.

A tensor has a *kind*, a tuple of slot degrees: ``(1,)`` is a one-form,
``(1, 1)`` an element of Omega^1 (x) Omega^1, ``(2,)`` a two-form and
``(2, 1)`` an element of Omega^2 (x) Omega^1.  A degree-2 slot occupies two
letters of the key, kept in canonical generator order (antisymmetry).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .cyclic import DEFAULT_TOL, CyclicFunction, GridFunction, ModulusMismatch


class SmallModulusError(ValueError):
    """Raised for Z_N with N <= 4, where the Z_N classification does not apply
    (p^2 = p~^2 for N = 4, non-trivial alpha for N = 3, p = p~ for N = 2)."""


INVERSE = {"p": "pt", "pt": "p", "s": "st", "st": "s"}
LABELS = {"p": "p", "pt": "p~", "s": "s", "st": "s~"}


class Calculus:
    """The lattice together with its generator set H = {p, p~} (and {s, s~})."""

    def __init__(self, shape):
        shape = tuple(int(x) for x in shape)
        if any(n <= 4 for n in shape):
            raise SmallModulusError(
                f"moduli {shape}: the minimal-calculus results require every modulus > 4"
            )
        self.shape = shape
        if len(shape) == 1:
            self.gens = {"p": (1,), "pt": (-1,)}
            self.fclass = CyclicFunction
        elif len(shape) == 2:
            self.gens = {"p": (1, 0), "pt": (-1, 0), "s": (0, 1), "st": (0, -1)}
            self.fclass = GridFunction
        else:
            raise ValueError("only Z_N and Z_N x Z_M are supported")
        self.order = {g: i for i, g in enumerate(self.gens)}

    @staticmethod
    @lru_cache(maxsize=None)
    def of(shape) -> "Calculus":
        return Calculus(tuple(shape))

    def degree(self, word) -> np.ndarray:
        d = np.zeros(len(self.shape), dtype=int)
        for g in word:
            d += self.gens[g]
        return d

    def zero(self):
        return self.fclass(np.zeros(self.shape))

    def one(self):
        return self.fclass(np.ones(self.shape))

    def theta(self, g) -> "Tensor":
        return Tensor(self, (1,), {(g,): self.one()})

    def inner(self) -> "Tensor":
        """theta = -(sum of theta_h over H); d f = [theta, f]."""
        return Tensor(self, (1,), {(g,): -self.one() for g in self.gens})

    def __repr__(self):
        return f"Calculus{self.shape}"


def calculus_of(f) -> Calculus:
    return Calculus.of(f.shape)


def _canonical_pair(calc, a, b):
    """(sign, key) for theta_a ^ theta_b in canonical order; sign 0 if a == b."""
    if a == b:
        return 0, None
    if calc.order[a] < calc.order[b]:
        return 1, (a, b)
    return -1, (b, a)


class Tensor:
    """Left-normalized element of a tensor product of Omega^1 / Omega^2 slots."""

    __slots__ = ("calc", "kind", "coeffs")

    def __init__(self, calc: Calculus, kind, coeffs=None):
        self.calc = calc
        self.kind = tuple(kind)
        self.coeffs = dict(coeffs or {})

    @property
    def rank(self) -> int:
        return sum(self.kind)

    def __getitem__(self, key):
        if isinstance(key, str):
            key = (key,)
        return self.coeffs.get(tuple(key), self.calc.zero())

    def keys(self):
        return self.coeffs.keys()

    def _check(self, other):
        if not isinstance(other, Tensor):
            raise TypeError(f"expected Tensor, got {type(other).__name__}")
        if other.calc.shape != self.calc.shape:
            raise ModulusMismatch(f"shapes {self.calc.shape} and {other.calc.shape}")
        if other.kind != self.kind:
            raise ValueError(f"kinds {self.kind} and {other.kind} differ")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return Tensor(self.calc, self.kind, out)

    def __neg__(self):
        return Tensor(self.calc, self.kind, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def lmul(self, f) -> "Tensor":
        """f * T, f a lattice function or scalar."""
        return Tensor(self.calc, self.kind, {k: f * v for k, v in self.coeffs.items()})

    def rmul(self, f) -> "Tensor":
        """T * f, commuting f to the left of every basis word."""
        if np.isscalar(f):
            return self.lmul(f)
        return Tensor(
            self.calc,
            self.kind,
            {k: v * f.shift(-self.calc.degree(k)) for k, v in self.coeffs.items()},
        )

    def max_abs(self) -> float:
        return max((v.max_abs() for v in self.coeffs.values()), default=0.0)

    def is_zero(self, tol=DEFAULT_TOL) -> bool:
        return self.max_abs() <= tol

    def approx_eq(self, other, tol=DEFAULT_TOL) -> bool:
        return (self - other).max_abs() <= tol

    def __repr__(self):
        parts = [f"{k}: {np.array2string(v.values, precision=4)}" for k, v in sorted(self.coeffs.items())]
        return f"Tensor(kind={self.kind}, {{{', '.join(parts)}}})"


# Convenience names for the spaces used throughout.
def OneForm(calc, coeffs) -> Tensor:
    return Tensor(calc, (1,), {(g,): f for g, f in coeffs.items()})


def one_form(coeff_p, coeff_pt) -> Tensor:
    """omega = coeff_p theta_p + coeff_pt theta_p~ on Z_N."""
    calc = calculus_of(coeff_p)
    if coeff_pt.shape != coeff_p.shape:
        raise ModulusMismatch("coefficient moduli differ")
    return Tensor(calc, (1,), {("p",): coeff_p, ("pt",): coeff_pt})


def tensor2(calc, coeffs) -> Tensor:
    return Tensor(calc, (1, 1), coeffs)


def tensor(a: Tensor, b: Tensor) -> Tensor:
    """a (x)_A b, with b's coefficients commuted to the far left."""
    if a.calc.shape != b.calc.shape:
        raise ModulusMismatch(f"shapes {a.calc.shape} and {b.calc.shape}")
    calc = a.calc
    out = {}
    for ka, va in a.coeffs.items():
        deg = calc.degree(ka)
        for kb, vb in b.coeffs.items():
            key = ka + kb
            val = va * vb.shift(-deg)
            out[key] = out[key] + val if key in out else val
    return Tensor(calc, a.kind + b.kind, out)


def wedge_front(t: Tensor) -> Tensor:
    """Apply the wedge product to the first two degree-1 slots of ``t``."""
    if t.kind[:2] != (1, 1):
        raise ValueError(f"cannot wedge the front of kind {t.kind}")
    calc = t.calc
    out = {}
    for k, v in t.coeffs.items():
        sign, pair = _canonical_pair(calc, k[0], k[1])
        if not sign:
            continue
        key = pair + k[2:]
        val = v if sign > 0 else -v
        out[key] = out[key] + val if key in out else val
    return Tensor(calc, (2,) + t.kind[2:], out)


def wedge(a: Tensor, b: Tensor) -> Tensor:
    if a.kind != (1,) or b.kind != (1,):
        raise ValueError("wedge expects two one-forms")
    return wedge_front(tensor(a, b))


def differential(f) -> Tensor:
    """d f = [theta, f] = -[theta_p + theta_p~, f]."""
    th = Calculus.of(f.shape).inner()
    return th.rmul(f) - th.lmul(f)


def d_one_form(w: Tensor) -> Tensor:
    """d omega = theta ^ omega + omega ^ theta."""
    th = w.calc.inner()
    return wedge(th, w) + wedge(w, th)


def d_one_form_by_components(w: Tensor) -> Tensor:
    """d omega = sum_g d(omega_g) ^ theta_g, using d theta_g = 0."""
    out = Tensor(w.calc, (2,))
    for g in w.calc.gens:
        out = out + wedge(differential(w[g]), w.calc.theta(g))
    return out


def d_tensor_front(t: Tensor) -> Tensor:
    """(d (x) id) on Omega^1 (x) Omega^1: sum d(c_ab theta_a) (x) theta_b."""
    if t.kind != (1, 1):
        raise ValueError("d (x) id expects kind (1, 1)")
    calc = t.calc
    out = Tensor(calc, (2, 1))
    for (a, b), c in t.coeffs.items():
        out = out + tensor(d_one_form(calc.theta(a).lmul(c)), calc.theta(b))
    return out


def star(w: Tensor) -> Tensor:
    """(f theta_g)^* = theta_g^* conj(f) = -R_g(conj f) theta_{g^-1}."""
    if w.kind != (1,):
        raise ValueError("star is defined on one-forms")
    calc = w.calc
    return Tensor(
        calc,
        (1,),
        {(INVERSE[g],): -(v.conj().shift(calc.gens[g])) for (g,), v in w.coeffs.items()},
    )


def dagger(t: Tensor) -> Tensor:
    """(omega (x) eta)^dagger = eta^* (x) omega^* on Omega^1 (x) Omega^1."""
    if t.kind != (1, 1):
        raise ValueError("dagger is implemented on kind (1, 1)")
    calc = t.calc
    out = {}
    for (a, b), v in t.coeffs.items():
        # (c theta_a theta_b)^dag = theta_{b^-1} theta_{a^-1} conj(c): two signs cancel
        key = (INVERSE[b], INVERSE[a])
        val = v.conj().shift(calc.degree((a, b)))
        out[key] = out[key] + val if key in out else val
    return Tensor(calc, (1, 1), out)


def basis_tensor2(calc, a, b) -> Tensor:
    return Tensor(calc, (1, 1), {(a, b): calc.one()})


def one_form_to_json(w: Tensor) -> dict:
    return {
        "N": w.calc.shape[0],
        "coeff_p": w["p"].to_json()["values"],
        "coeff_pt": w["pt"].to_json()["values"],
    }


def one_form_from_json(obj) -> Tensor:
    p = CyclicFunction.from_json({"N": obj["N"], "values": obj["coeff_p"]})
    pt = CyclicFunction.from_json({"N": obj["N"], "values": obj["coeff_pt"]})
    return one_form(p, pt)


_SLOT_NAMES = {("p", "p"): "pp", ("p", "pt"): "ppt", ("pt", "p"): "ptp", ("pt", "pt"): "ptpt"}


def tensor2_to_json(t: Tensor) -> dict:
    return {
        "N": t.calc.shape[0],
        "coeffs": {name: t[key].to_json()["values"] for key, name in _SLOT_NAMES.items()},
    }


def tensor2_from_json(obj) -> Tensor:
    N = obj["N"]
    calc = Calculus.of((N,))
    coeffs = {
        key: CyclicFunction.from_json({"N": N, "values": obj["coeffs"][name]})
        for key, name in _SLOT_NAMES.items()
        if name in obj["coeffs"]
    }
    return Tensor(calc, (1, 1), coeffs)
