"""Bimodule metrics g = G_p theta_p (x) theta_p~ + G_p~ theta_p~ (x) theta_p.

The pairing is (theta_a, theta_b) = delta_{a^-1, b} / R_{a^-1}(G_{a^-1}),
extended as a bimodule map.  The same code serves the torus, where the
metric carries one coefficient function per generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import INVERSE, Calculus, Tensor, tensor
from .cyclic import DEFAULT_TOL, ZERO_TOL, CyclicFunction, ModulusMismatch


class DegenerateMetric(ValueError):
    pass


class Metric:
    """Nondegenerate metric on the minimal calculus.

    ``G`` maps each generator name to its coefficient function; on Z_N these
    are ``G["p"]`` and ``G["pt"]``.
    """

    def __init__(self, G_p=None, G_pt=None, **extra):
        G = {"p": G_p, "pt": G_pt, **extra}
        shapes = {f.shape for f in G.values()}
        if len(shapes) != 1:
            raise ModulusMismatch(f"metric components have shapes {sorted(shapes)}")
        self.calc = Calculus.of(next(iter(shapes)))
        if set(G) != set(self.calc.gens):
            raise ValueError(f"metric needs components for {sorted(self.calc.gens)}")
        for g, f in G.items():
            if not f.nonvanishing(ZERO_TOL):
                raise DegenerateMetric(f"G_{g} vanishes somewhere")
        self.G = G

    @property
    def G_p(self):
        return self.G["p"]

    @property
    def G_pt(self):
        return self.G["pt"]

    @property
    def N(self) -> int:
        return self.calc.shape[0]

    def tensor(self) -> Tensor:
        """The metric as an element of Omega^1 (x) Omega^1."""
        return Tensor(self.calc, (1, 1), {(g, INVERSE[g]): f for g, f in self.G.items()})

    def basis_pairing(self, a, b):
        """(theta_a, theta_b) as a function (zero unless b = a^-1)."""
        if b != INVERSE[a]:
            return self.calc.zero()
        return 1.0 / self.G[b].shift(self.calc.gens[b])

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "G_p": self.G_p.to_json()["values"],
            "G_pt": self.G_pt.to_json()["values"],
        }

    @classmethod
    def from_json(cls, obj):
        N = obj["N"]
        return cls(
            CyclicFunction.from_json({"N": N, "values": obj["G_p"]}),
            CyclicFunction.from_json({"N": N, "values": obj["G_pt"]}),
        )

    def __repr__(self):
        return f"Metric({', '.join(f'G_{g}={f!r}' for g, f in self.G.items())})"


def pairing(m: Metric, w: Tensor, v: Tensor):
    """(omega, eta) for one-forms, bilinear over the algebra."""
    if w.kind != (1,) or v.kind != (1,):
        raise ValueError("pairing expects two one-forms")
    out = m.calc.zero()
    for (a,), wa in w.coeffs.items():
        b = INVERSE[a]
        if (b,) in v.coeffs:
            # (wa theta_a, vb theta_b) = wa (theta_a vb, theta_b) = wa R_{a^-1}(vb) (theta_a, theta_b)
            out = out + wa * v.coeffs[(b,)].shift(-np.array(m.calc.gens[a])) * m.basis_pairing(a, b)
    return out


def contract_front(m: Metric, w: Tensor, t: Tensor) -> Tensor:
    """(omega, t_(1)) t_(2) (x) ... : pair a one-form with the first slot of t."""
    if t.kind[0] != 1:
        raise ValueError("first slot must be a one-form")
    calc = m.calc
    out = {}
    for (a,), wa in w.coeffs.items():
        b = INVERSE[a]
        shift = -np.array(calc.gens[a])
        pab = m.basis_pairing(a, b)
        for key, c in t.coeffs.items():
            if key[0] != b:
                continue
            rest = key[1:]
            val = wa * c.shift(shift) * pab
            out[rest] = out[rest] + val if rest in out else val
    return Tensor(calc, t.kind[1:], out)


def contract_self(m: Metric, t: Tensor):
    """(t_(1), t_(2)) for t in Omega^1 (x) Omega^1."""
    if t.kind != (1, 1):
        raise ValueError("contract_self expects kind (1, 1)")
    out = m.calc.zero()
    for (a, b), c in t.coeffs.items():
        if b == INVERSE[a]:
            out = out + c * m.basis_pairing(a, b)
    return out


def contractions(m: Metric):
    """((g1, g2), (g2, g1)); the second is identically 2 on Z_N."""
    first = contract_self(m, m.tensor())
    second = m.calc.zero()
    for g, f in m.G.items():
        h = INVERSE[g]
        # g1 (x) g2 = (G_g theta_g) (x) theta_h; (theta_h, G_g theta_g) = R_{h^-1}(G_g) (theta_h, theta_g)
        second = second + f.shift(-np.array(m.calc.gens[h])) * m.basis_pairing(h, g)
    return first, second


def nondegeneracy_residuals(m: Metric, w: Tensor):
    """Both identities (w, g1) g2 = w = g1 (g2, w), returned as residual one-forms."""
    g = m.tensor()
    left = Tensor(m.calc, (1,))
    right = Tensor(m.calc, (1,))
    for (a, b), G in g.coeffs.items():
        left = left + m.calc.theta(b).lmul(pairing(m, w, m.calc.theta(a).lmul(G)))
        right = right + m.calc.theta(a).lmul(G).rmul(pairing(m, m.calc.theta(b), w))
    return left - w, right - w


def x_ratio(m: Metric, g: str):
    """X_g = R_g(G_g) / G_{g^-1}."""
    return m.G[g].shift(m.calc.gens[g]) / m.G[INVERSE[g]]


@dataclass(frozen=True)
class MetricFlags:
    is_real: bool
    is_negative: bool
    is_wedge_compatible: bool
    is_left_invariant: bool


def classify(m: Metric, tol: float = DEFAULT_TOL) -> MetricFlags:
    comps = list(m.G.values())
    real = all(f.is_real(tol) for f in comps)
    negative = real and all(np.all(f.values.real < 0) for f in comps)
    wedge_ok = all(
        np.max(np.abs(m.G[g].values - m.G[h].values)) <= tol for g, h in INVERSE.items() if g in m.G
    )
    invariant = all(f.is_constant(tol) for f in comps)
    return MetricFlags(real, negative, wedge_ok, invariant)


def constant_metric(N: int, value=-1.0, gamma=1.0) -> Metric:
    """Constant G_p = value with X_p = gamma, i.e. G_p~ = value / gamma."""
    return Metric(CyclicFunction.constant(N, value), CyclicFunction.constant(N, value / gamma))


def symmetric_metric(G: CyclicFunction, gamma=1.0) -> Metric:
    """G_p = G and G_p~ = R_p(G) / gamma, so that X_p is the constant gamma.

    gamma = 1 is the left-right symmetric metric used for the curvature
    formulas; any real negative G gives a Hilbert-module metric.
    """
    return Metric(G, G.shift(1) / gamma)


def metric_from_x(X: CyclicFunction, G_p_seed: CyclicFunction) -> Metric:
    """The metric with G_p = seed whose X_p-profile equals X:
    G_p~(n) = G_p(n + 1) / X(n)."""
    if not X.nonvanishing():
        raise DegenerateMetric("X vanishes somewhere")
    return Metric(G_p_seed, G_p_seed.shift(1) / X)


def polygon_sides(a: float, b: float, N: int) -> np.ndarray:
    """Chord lengths |P_{k+1} - P_k| of the N-gon inscribed in an ellipse."""
    if N <= 4:
        Calculus.of((N,))  # raises SmallModulusError
    if a <= ZERO_TOL or b <= ZERO_TOL:
        raise ValueError(f"degenerate ellipse axes a={a}, b={b}")
    k = np.arange(N + 1)
    x, y = a * np.cos(2 * np.pi * k / N), b * np.sin(2 * np.pi * k / N)
    return np.hypot(np.diff(x), np.diff(y))


def ellipse_profile(a: float, b: float, N: int, continuum_scale: bool = False) -> CyclicFunction:
    """G(k) = -(chord length)^2, optionally multiplied by (N / 2 pi)^2."""
    G = -polygon_sides(a, b, N) ** 2
    if continuum_scale:
        G = G * (N / (2 * np.pi)) ** 2
    return CyclicFunction(G)


def ellipse_metric(a: float, b: float, N: int, continuum_scale: bool = False) -> Metric:
    """Left-right symmetric metric (X_p = 1) built from the ellipse polygon."""
    return symmetric_metric(ellipse_profile(a, b, N, continuum_scale))
