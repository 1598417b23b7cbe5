"""Complex-valued functions on Z_N and on the grid Z_N x Z_M.

Every coefficient function in the package (metric components, connection
coefficients, curvature profiles) is one of these.  Values are stored as an
immutable complex numpy array; all arithmetic is pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_TOL = 1e-12
DEFAULT_TOL = 1e-10


class ModulusMismatch(ValueError):
    pass


class VanishingDivisor(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class Deviation:
    """Outcome of :func:`approx_eq`: max |f - g| and where it is attained."""

    ok: bool
    max_dev: float
    argmax: tuple

    def __bool__(self):
        return self.ok


class LatticeFunction:
    """Base class for functions on a finite abelian lattice Z_N (x Z_M)."""

    ndim = 0

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=complex)
        if arr.ndim != self.ndim:
            raise ValueError(
                f"{type(self).__name__} expects a {self.ndim}-d array, got shape {arr.shape}"
            )
        if min(arr.shape) < 2:
            raise ValueError("every modulus must be >= 2")
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def shape(self) -> tuple:
        return self._values.shape

    def _new(self, arr):
        out = object.__new__(type(self))
        arr = np.asarray(arr, dtype=complex)
        arr.setflags(write=False)
        out._values = arr
        return out

    # -- construction helpers -------------------------------------------
    @classmethod
    def constant(cls, shape, value=1.0):
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        return cls(np.full(shape, value, dtype=complex))

    @classmethod
    def indicator(cls, shape, point):
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        arr = np.zeros(shape, dtype=complex)
        arr[point] = 1.0
        return cls(arr)

    # -- group action -----------------------------------------------------
    def shift(self, k) -> "LatticeFunction":
        """Right translation: ``f.shift(k)(n) == f(n + k)``."""
        k = np.atleast_1d(k)
        if len(k) != self.ndim:
            raise ValueError(f"shift vector {tuple(k)} does not match dimension {self.ndim}")
        if not np.any(k % np.array(self.shape)):
            return self
        return self._new(np.roll(self._values, tuple(int(-x) for x in k), axis=tuple(range(self.ndim))))

    def conj(self):
        return self._new(np.conj(self._values))

    # -- arithmetic -------------------------------------------------------
    def _other(self, other):
        if isinstance(other, LatticeFunction):
            if type(other) is not type(self) or other.shape != self.shape:
                raise ModulusMismatch(f"cannot combine shapes {self.shape} and {other.shape}")
            return other._values
        if np.isscalar(other):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._new(self._values + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._new(self._values - o)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._new(o - self._values)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._new(self._values * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if np.min(np.abs(o)) <= ZERO_TOL:
            raise VanishingDivisor("division by a function with a (near) zero value")
        return self._new(self._values / o)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if not self.nonvanishing():
            raise VanishingDivisor("division by a function with a (near) zero value")
        return self._new(o / self._values)

    def __neg__(self):
        return self._new(-self._values)

    def __pow__(self, k):
        return self._new(self._values**k)

    def __getitem__(self, idx):
        return complex(self._values[idx])

    def __len__(self):
        return self._values.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, LatticeFunction)
            and type(other) is type(self)
            and other.shape == self.shape
            and np.array_equal(other._values, self._values)
        )

    __hash__ = None

    # -- queries ----------------------------------------------------------
    def max_abs(self) -> float:
        return float(np.max(np.abs(self._values)))

    def nonvanishing(self, tol=ZERO_TOL) -> bool:
        return bool(np.min(np.abs(self._values)) > tol)

    def is_real(self, tol=DEFAULT_TOL) -> bool:
        return bool(np.max(np.abs(self._values.imag)) <= tol)

    def is_constant(self, tol=DEFAULT_TOL) -> bool:
        return bool(np.max(np.abs(self._values - self._values.mean())) <= tol)

    def mean(self) -> complex:
        return complex(self._values.mean())

    def __repr__(self):
        return f"{type(self).__name__}({np.array2string(self._values, precision=6)})"


class CyclicFunction(LatticeFunction):
    """A function Z_N -> C, indexed by the residues 0..N-1."""

    ndim = 1
    __slots__ = ()

    @property
    def modulus(self) -> int:
        return self._values.shape[0]

    def product(self) -> complex:
        return complex(np.prod(self._values))

    def to_json(self) -> dict:
        return {"N": self.modulus, "values": _pairs(self._values)}

    @classmethod
    def from_json(cls, obj):
        vals = _unpairs(obj["values"])
        if len(vals) != obj["N"]:
            raise ValueError(f"expected {obj['N']} values, got {len(vals)}")
        return cls(vals)


class GridFunction(LatticeFunction):
    """A function Z_N x Z_M -> C; rows are Z_N residues, columns Z_M."""

    ndim = 2
    __slots__ = ()

    @property
    def moduli(self) -> tuple:
        return self._values.shape

    @classmethod
    def from_rows(cls, f: CyclicFunction, M: int):
        """Extend a function of the first coordinate constantly along the second."""
        return cls(np.repeat(f.values[:, None], M, axis=1))

    @classmethod
    def from_cols(cls, f: CyclicFunction, N: int):
        return cls(np.repeat(f.values[None, :], N, axis=0))

    def to_json(self) -> dict:
        N, M = self.moduli
        return {"N": N, "M": M, "values": [_pairs(row) for row in self._values]}

    @classmethod
    def from_json(cls, obj):
        arr = np.array([_unpairs(row) for row in obj["values"]])
        if arr.shape != (obj["N"], obj["M"]):
            raise ValueError(f"expected grid {(obj['N'], obj['M'])}, got {arr.shape}")
        return cls(arr)


def _pairs(arr):
    return [[float(z.real), float(z.imag)] for z in arr]


def _unpairs(pairs):
    return np.array([complex(re, im) for re, im in pairs])


def translate(f: LatticeFunction, k) -> LatticeFunction:
    return f.shift(k)


_OPS = {
    "add": lambda f, g: f + g,
    "sub": lambda f, g: f - g,
    "mul": lambda f, g: f * g,
    "div": lambda f, g: f / g,
    "conj": lambda f, g: f.conj(),
    "scale": lambda f, g: f * g,
}


def pointwise(f, g, op: str):
    """Apply a named pointwise operation; ``g`` is ignored for ``conj`` and is
    a scalar for ``scale``."""
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return fn(f, g)


def approx_eq(f: LatticeFunction, g: LatticeFunction, tol: float = DEFAULT_TOL) -> Deviation:
    if f.shape != g.shape:
        raise ModulusMismatch(f"cannot compare shapes {f.shape} and {g.shape}")
    diff = np.abs(f.values - g.values)
    idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
    dev = float(diff[idx])
    return Deviation(dev <= tol, dev, tuple(int(i) for i in idx))
