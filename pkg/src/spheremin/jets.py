"""Truncated bivariate Taylor arithmetic (jets) in two chart variables u, v.

A :class:`Jet2` of order ``N`` carries every partial derivative
``d^(i+j) f / du^i dv^j`` with ``i + j <= N`` evaluated at one base point.
Coefficients are stored as *raw* partials, not divided by ``i! j!``;
the binomial factors of the Leibniz rule are folded into a precomputed
product table.

Coefficients live in the last axis of ``coeffs``.  Leading axes are batch
axes, so a vector-valued function is a single ``Jet2`` of shape ``(dim,)``
and arithmetic broadcasts over them like numpy arrays.

Index layout for order 2::

    k :   0      1      2      3      4      5
    (i,j): (0,0) (1,0) (0,1) (2,0) (1,1) (0,2)
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, SingularityError, UsageError

MAX_ORDER = 4


@lru_cache(maxsize=None)
def multi_indices(order: int) -> tuple[tuple[int, int], ...]:
    """Multi-indices ``(i, j)`` with ``i + j <= order`` in storage order."""
    return tuple((d - j, j) for d in range(order + 1) for j in range(d + 1))


@lru_cache(maxsize=None)
def _index_map(order: int) -> dict[tuple[int, int], int]:
    return {ij: k for k, ij in enumerate(multi_indices(order))}


def n_coeffs(order: int) -> int:
    return (order + 1) * (order + 2) // 2


@lru_cache(maxsize=None)
def _product_table(order: int):
    """Sparse Leibniz table: out[k] = sum_t C[t] * a[P[t]] * b[Q[t]] for K[t] == k."""
    idx = _index_map(order)
    P, Q, C, K = [], [], [], []
    for k, (i, j) in enumerate(multi_indices(order)):
        for a in range(i + 1):
            for b in range(j + 1):
                P.append(idx[(a, b)])
                Q.append(idx[(i - a, j - b)])
                C.append(math.comb(i, a) * math.comb(j, b))
                K.append(k)
    scatter = np.zeros((len(K), n_coeffs(order)))
    scatter[np.arange(len(K)), K] = 1.0
    return np.array(P), np.array(Q), np.array(C, dtype=float), scatter


@lru_cache(maxsize=None)
def _shift_index(order: int, direction: int) -> np.ndarray:
    """Positions in an order-``order`` jet feeding each coefficient of its derivative."""
    idx = _index_map(order)
    di, dj = (1, 0) if direction == 0 else (0, 1)
    return np.array([idx[(i + di, j + dj)] for i, j in multi_indices(order - 1)])


def _check_order(order: int) -> int:
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= MAX_ORDER:
        raise ConfigurationError(f"jet order must be an integer in [0, {MAX_ORDER}], got {order!r}")
    return int(order)


class Jet2:
    """Immutable truncated Taylor expansion of ``f(u, v)`` (possibly batched).

    Parameters
    ----------
    order : int
        Truncation order in ``[0, 4]``.
    coeffs : array_like
        Shape ``(..., n_coeffs(order))``; raw partial derivatives in the
        storage order given by :func:`multi_indices`.
    """

    __slots__ = ("order", "coeffs")
    __array_ufunc__ = None  # ndarray op Jet2 defers to the reflected Jet2 method

    def __init__(self, order: int, coeffs) -> None:
        order = _check_order(order)
        c = np.array(coeffs, dtype=float)
        if c.ndim == 0 or c.shape[-1] != n_coeffs(order):
            raise UsageError(f"coefficient array for order {order} needs last axis {n_coeffs(order)}")
        if not np.all(np.isfinite(c)):
            raise SingularityError("jet coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def _wrap(cls, order: int, coeffs: np.ndarray) -> "Jet2":
        # trusted fast path for results of internal arithmetic
        obj = object.__new__(cls)
        coeffs.setflags(write=False)
        object.__setattr__(obj, "order", order)
        object.__setattr__(obj, "coeffs", coeffs)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("Jet2 is immutable")

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, order: int) -> "Jet2":
        order = _check_order(order)
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (n_coeffs(order),))
        c[..., 0] = value
        return cls(order, c)

    @classmethod
    def from_dict(cls, order: int, coeffs: dict[tuple[int, int], float]) -> "Jet2":
        order = _check_order(order)
        idx = _index_map(order)
        c = np.zeros(n_coeffs(order))
        for ij, val in coeffs.items():
            if ij not in idx:
                raise UsageError(f"multi-index {ij} exceeds order {order}")
            c[idx[ij]] = val
        return cls(order, c)

    # -- access -------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def value(self):
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v

    def coeff(self, i: int, j: int):
        """Raw partial ``d^(i+j) f / du^i dv^j`` at the base point."""
        try:
            k = _index_map(self.order)[(i, j)]
        except KeyError:
            raise UsageError(f"multi-index ({i}, {j}) exceeds order {self.order}") from None
        v = self.coeffs[..., k]
        return float(v) if v.ndim == 0 else v

    def as_dict(self) -> dict[tuple[int, int], float]:
        if self.shape:
            raise UsageError("as_dict is only defined for scalar jets")
        return {ij: float(c) for ij, c in zip(multi_indices(self.order), self.coeffs)}

    def __getitem__(self, key) -> "Jet2":
        if not isinstance(key, tuple):
            key = (key,)
        return Jet2._wrap(self.order, np.array(self.coeffs[key + (Ellipsis, slice(None))]))

    def __len__(self) -> int:
        if not self.shape:
            raise TypeError("len() of scalar jet")
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self) -> str:
        return f"Jet2(order={self.order}, shape={self.shape}, value={self.value!r})"

    # -- calculus -------------------------------------------------------------
    def truncate(self, order: int) -> "Jet2":
        order = _check_order(order)
        if order > self.order:
            raise UsageError(f"cannot raise jet order {self.order} to {order}")
        return Jet2._wrap(order, np.array(self.coeffs[..., : n_coeffs(order)]))

    def du(self) -> "Jet2":
        """Partial derivative in u; the result has order ``self.order - 1``."""
        return self._shift(0)

    def dv(self) -> "Jet2":
        return self._shift(1)

    def _shift(self, direction: int) -> "Jet2":
        if self.order == 0:
            raise UsageError("cannot differentiate an order-0 jet")
        return Jet2._wrap(self.order - 1, self.coeffs[..., _shift_index(self.order, direction)])

    def sum(self, axis=None) -> "Jet2":
        if axis is None:
            axis = tuple(range(len(self.shape)))
        elif isinstance(axis, int):
            axis = (axis,)
        nd = len(self.shape)
        axis = tuple(a % nd for a in axis)
        return Jet2._wrap(self.order, self.coeffs.sum(axis=axis))

    # -- arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Jet2):
            if other.order != self.order:
                raise UsageError(f"jet order mismatch: {self.order} vs {other.order}")
            return other.coeffs
        other = np.asarray(other, dtype=float)
        c = np.zeros(other.shape + (n_coeffs(self.order),))
        c[..., 0] = other
        return c

    def __add__(self, other) -> "Jet2":
        return Jet2._wrap(self.order, self.coeffs + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        return Jet2._wrap(self.order, self.coeffs - self._coerce(other))

    def __rsub__(self, other) -> "Jet2":
        return Jet2._wrap(self.order, self._coerce(other) - self.coeffs)

    def __neg__(self) -> "Jet2":
        return Jet2._wrap(self.order, -self.coeffs)

    def __pos__(self) -> "Jet2":
        return self

    def __mul__(self, other) -> "Jet2":
        if not isinstance(other, Jet2):
            other = np.asarray(other, dtype=float)
            return Jet2._wrap(self.order, self.coeffs * other[..., None])
        return Jet2._wrap(self.order, _mul(self.order, self.coeffs, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2":
        if not isinstance(other, Jet2):
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise SingularityError("division by zero")
            return Jet2._wrap(self.order, self.coeffs / other[..., None])
        self._coerce(other)
        return self * reciprocal(other)

    def __rtruediv__(self, other) -> "Jet2":
        return reciprocal(self) * other

    def __pow__(self, n: int) -> "Jet2":
        return powi(self, n)


def _mul(order: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    P, Q, C, scatter = _product_table(order)
    return (a[..., P] * b[..., Q] * C) @ scatter


# -- module-level API ---------------------------------------------------------------


def seed_variable(which: str, value: float, order: int) -> Jet2:
    """Coordinate jet for ``u`` or ``v`` at ``value``."""
    order = _check_order(order)
    if which not in ("u", "v"):
        raise UsageError(f"seed direction must be 'u' or 'v', got {which!r}")
    c = np.zeros(n_coeffs(order))
    c[0] = value
    if order >= 1:
        c[1 if which == "u" else 2] = 1.0
    return Jet2(order, c)


def seed_pair(u: float, v: float, order: int) -> tuple[Jet2, Jet2]:
    return seed_variable("u", u, order), seed_variable("v", v, order)


def add(a: Jet2, b: Jet2) -> Jet2:
    return a + b


def sub(a: Jet2, b: Jet2) -> Jet2:
    return a - b


def mul(a: Jet2, b: Jet2) -> Jet2:
    return a * b


def div(a: Jet2, b: Jet2) -> Jet2:
    return a / b


def scale(a: Jet2, c: float) -> Jet2:
    return a * float(c)


def stack(jets: Sequence[Jet2], axis: int = 0) -> Jet2:
    orders = {j.order for j in jets}
    if len(orders) != 1:
        raise UsageError(f"cannot stack jets of orders {sorted(orders)}")
    nd = len(jets[0].shape)
    axis = axis % (nd + 1)
    return Jet2._wrap(orders.pop(), np.stack([j.coeffs for j in jets], axis=axis))


def einsum(subscripts: str, a: Jet2, b: Jet2) -> Jet2:
    """Contract two jets over batch axes, multiplying jets pointwise.

    ``subscripts`` refers to batch axes only, e.g. ``"ic,jc->ij"`` forms the
    jet-valued Gram matrix of two stacks of vector jets.
    """
    if a.order != b.order:
        raise UsageError(f"jet order mismatch: {a.order} vs {b.order}")
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    t = next(ch for ch in "tzyxwTZYXW" if ch not in subscripts)
    P, Q, C, scatter = _product_table(a.order)
    prod = np.einsum(f"{sa}{t},{sb}{t}->{out}{t}", a.coeffs[..., P], b.coeffs[..., Q])
    return Jet2._wrap(a.order, (prod * C) @ scatter)


def compose(a: Jet2, derivs: Sequence) -> Jet2:
    """Chain rule: ``f(a)`` from ``derivs[m] = f^(m)(a.value)``, m = 0..order.

    Uses ``f(a0 + d) = sum_m f^(m)(a0) / m! * d^m`` where ``d`` has zero value;
    since ``d^m`` vanishes for ``m > order`` the sum is exact after truncation.
    """
    order = a.order
    delta = a.coeffs.copy()
    delta[..., 0] = 0.0
    out = np.zeros_like(a.coeffs)
    out[..., 0] = derivs[0]
    power = delta
    for m in range(1, order + 1):
        out = out + (np.asarray(derivs[m]) / math.factorial(m))[..., None] * power
        if m < order:
            power = _mul(order, power, delta)
    return Jet2._wrap(order, out)


def _falling(p: float, m: int) -> float:
    r = 1.0
    for k in range(m):
        r *= p - k
    return r


def powi(a: Jet2, n: int) -> Jet2:
    """Integer power ``a**n``; negative ``n`` requires a nonzero value."""
    n = int(n)
    x0 = np.asarray(a.coeffs[..., 0])
    if n < 0 and np.any(x0 == 0):
        raise SingularityError("negative power of a jet with zero value")
    derivs = [
        _falling(n, m) * x0 ** (n - m) if (n < 0 or m <= n) else np.zeros_like(x0)
        for m in range(a.order + 1)
    ]
    return compose(a, derivs)


def reciprocal(a: Jet2) -> Jet2:
    if np.any(np.asarray(a.coeffs[..., 0]) == 0):
        raise SingularityError("division by a jet with zero value")
    return powi(a, -1)


def sqrt(a: Jet2) -> Jet2:
    x0 = np.asarray(a.coeffs[..., 0])
    if np.any(x0 <= 0):
        raise SingularityError(f"sqrt of nonpositive jet value {x0.min()!r}")
    return compose(a, [_falling(0.5, m) * x0 ** (0.5 - m) for m in range(a.order + 1)])


def sin(a: Jet2) -> Jet2:
    x0 = np.asarray(a.coeffs[..., 0])
    cyc = (np.sin(x0), np.cos(x0), -np.sin(x0), -np.cos(x0))
    return compose(a, [cyc[m % 4] for m in range(a.order + 1)])


def cos(a: Jet2) -> Jet2:
    x0 = np.asarray(a.coeffs[..., 0])
    cyc = (np.cos(x0), -np.sin(x0), -np.cos(x0), np.sin(x0))
    return compose(a, [cyc[m % 4] for m in range(a.order + 1)])


def exp(a: Jet2) -> Jet2:
    e = np.exp(np.asarray(a.coeffs[..., 0]))
    return compose(a, [e] * (a.order + 1))


UNARY: dict[str, Callable[..., Jet2]] = {
    "sin": sin,
    "cos": cos,
    "sqrt": sqrt,
    "exp": exp,
    "powi": powi,
}


def apply_unary(name: str, a: Jet2, *args) -> Jet2:
    """Apply a named elementary function (``sin``, ``cos``, ``sqrt``, ``exp``, ``powi``)."""
    try:
        f = UNARY[name]
    except KeyError:
        raise UsageError(f"unknown unary function {name!r}") from None
    return f(a, *args)


def norm(vec: Jet2) -> Jet2:
    """Euclidean norm of a vector jet along its last batch axis."""
    return sqrt((vec * vec).sum(-1))


def dot(a: Jet2, b: Jet2) -> Jet2:
    return (a * b).sum(-1)


def linear_map(matrix, vec: Jet2) -> Jet2:
    """Apply a constant matrix to a vector jet along its last batch axis."""
    m = np.asarray(matrix, dtype=float)
    return Jet2._wrap(vec.order, np.einsum("ab,...bk->...ak", m, vec.coeffs))
