"""Truncated bivariate Taylor jets (order <= 3) and a finite-difference oracle.

A :class:`Jet3` stores the Taylor expansion of a (possibly array-valued)
quantity in the two surface parameters ``u`` and ``v``.  Coefficients are
kept normalised, ``t[a, b] = d^{a+b} f / du^a dv^b / (a! b!)``, so that
products are plain truncated convolutions.  The leading axis of
:attr:`Jet3.coef` enumerates multi-indices ordered by total degree; all
remaining axes are the value shape, which broadcasts like numpy arrays.
This lets one jet hold a whole grid of points, or a 4-vector per point.

Differentiating a jet of order ``k`` yields a jet of order ``k - 1``;
arithmetic between jets truncates to the smaller order.
"""

from math import factorial

import numpy as np

from .errors import DomainError

MAX_ORDER = 3

#: Multi-indices (a, b) ordered by total degree.
INDICES = tuple((d - b, b) for d in range(MAX_ORDER + 1) for b in range(d + 1))
_POS = {ab: k for k, ab in enumerate(INDICES)}
_SCALE = np.array([factorial(a) * factorial(b) for a, b in INDICES], dtype=float)

# Smallest magnitude accepted for a denominator or a sqrt argument.
_POLE = 1e-300


def ncoef(order):
    return (order + 1) * (order + 2) // 2


def _product_table():
    table = []
    for a, b in INDICES:
        pairs = []
        for i, (a1, b1) in enumerate(INDICES):
            rest = (a - a1, b - b1)
            if rest in _POS:
                pairs.append((i, _POS[rest]))
        table.append(tuple(pairs))
    return tuple(table)


_PRODUCT = _product_table()

# For d/du and d/dv: target slot -> (source slot, factor).
_DU = tuple((_POS[(a + 1, b)], a + 1) for a, b in INDICES if a + b < MAX_ORDER)
_DV = tuple((_POS[(a, b + 1)], b + 1) for a, b in INDICES if a + b < MAX_ORDER)


class Jet3:
    """Order-truncated Taylor jet in (u, v).

    Parameters
    ----------
    coef : array_like
        Normalised Taylor coefficients, shape ``(ncoef(order),) + shape``.
    order : int
        Truncation order, 0..3.
    """

    __slots__ = ("coef", "order")
    # make ndarray <op> Jet3 defer to the reflected Jet3 method
    __array_ufunc__ = None

    def __init__(self, coef, order=MAX_ORDER):
        coef = np.asarray(coef, dtype=float)
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        if coef.shape[0] != ncoef(order):
            raise ValueError(
                f"order {order} needs {ncoef(order)} coefficients, got {coef.shape[0]}")
        self.coef = coef
        self.order = order

    # ----------------------------------------------------------------- creation
    @classmethod
    def constant(cls, value, order=MAX_ORDER):
        value = np.asarray(value, dtype=float)
        coef = np.zeros((ncoef(order),) + value.shape)
        coef[0] = value
        return cls(coef, order)

    @classmethod
    def lift(cls, value, role="constant", order=MAX_ORDER):
        """Jet of a constant or of one of the coordinate functions.

        ``role`` is ``"constant"``, ``"var_u"`` or ``"var_v"``.
        """
        jet = cls.constant(value, order)
        if role == "var_u":
            if order >= 1:
                jet.coef[_POS[(1, 0)]] = 1.0
        elif role == "var_v":
            if order >= 1:
                jet.coef[_POS[(0, 1)]] = 1.0
        elif role != "constant":
            raise ValueError(f"unknown lift role {role!r}")
        return jet

    @classmethod
    def from_partials(cls, partials, order=MAX_ORDER):
        """Build a jet from a mapping ``{(a, b): d^{a+b}f/du^a dv^b}``."""
        shape = np.shape(next(iter(partials.values())))
        coef = np.zeros((ncoef(order),) + shape)
        for (a, b), val in partials.items():
            if a + b <= order:
                coef[_POS[(a, b)]] = np.asarray(val, dtype=float) / _SCALE[_POS[(a, b)]]
        return cls(coef, order)

    # ----------------------------------------------------------------- access
    @property
    def shape(self):
        return self.coef.shape[1:]

    @property
    def value(self):
        return self.coef[0]

    def partial(self, a, b):
        """Partial derivative d^{a+b} f / du^a dv^b at the base point."""
        if a + b > self.order:
            raise ValueError(f"derivative ({a}, {b}) exceeds jet order {self.order}")
        k = _POS[(a, b)]
        return self.coef[k] * _SCALE[k]

    def partials(self):
        return {ab: self.partial(*ab) for ab in INDICES[: ncoef(self.order)]}

    def truncate(self, order):
        order = min(order, self.order)
        return Jet3(self.coef[: ncoef(order)], order)

    def du(self):
        return self._derive(_DU)

    def dv(self):
        return self._derive(_DV)

    def _derive(self, table):
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        order = self.order - 1
        n = ncoef(order)
        coef = np.stack([self.coef[src] * fac for src, fac in table[:n]])
        return Jet3(coef, order)

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet3(self.coef[(slice(None),) + idx], self.order)

    def __len__(self):
        return self.shape[0]

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def sum(self, axis=0):
        axis = axis if axis < 0 else axis + 1
        return Jet3(self.coef.sum(axis=axis), self.order)

    def __repr__(self):
        return f"Jet3(order={self.order}, shape={self.shape}, value={self.value!r})"

    # ----------------------------------------------------------------- arithmetic
    def __neg__(self):
        return Jet3(-self.coef, self.order)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet3):
            order = min(self.order, other.order)
            n = ncoef(order)
            return Jet3(self.coef[:n] + other.coef[:n], order)
        other = np.asarray(other, dtype=float)
        coef = self.coef + np.zeros_like(other)
        coef = coef.copy()
        coef[0] = coef[0] + other
        return Jet3(coef, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet3):
            order = min(self.order, other.order)
            return Jet3(_convolve(self.coef, other.coef, order), order)
        return Jet3(self.coef * np.asarray(other, dtype=float), self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        if np.any(np.abs(other) <= _POLE):
            raise DomainError("division by zero")
        return Jet3(self.coef / other, self.order)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, n):
        return pow_int(self, n)


def _convolve(a, b, order):
    out = []
    for pairs in _PRODUCT[: ncoef(order)]:
        i, j = pairs[0]
        acc = a[i] * b[j]
        for i, j in pairs[1:]:
            acc = acc + a[i] * b[j]
        out.append(acc)
    return np.stack(np.broadcast_arrays(*out))


def compose(g, derivs):
    """Taylor composition ``f(g)`` given ``f^{(k)}(g0)`` for k = 0..order.

    Horner evaluation of ``sum_k f^{(k)}(g0)/k! * (g - g0)^k``; exact up to
    the truncation order because ``g - g0`` has no constant term.
    """
    order = g.order
    delta = Jet3(g.coef.copy(), order)
    delta.coef[0] = 0.0
    acc = Jet3.constant(derivs[order] / factorial(order), order)
    for k in range(order - 1, -1, -1):
        acc = acc * delta + derivs[k] / factorial(k)
    return acc


# --------------------------------------------------------------------- unary ops
def reciprocal(x):
    if not isinstance(x, Jet3):
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x) <= _POLE):
            raise DomainError("division by zero")
        return 1.0 / x
    x0 = x.value
    if np.any(np.abs(x0) <= _POLE):
        raise DomainError("division by zero (pole of the jet)")
    r = 1.0 / x0
    return compose(x, [r, -r**2, 2 * r**3, -6 * r**4])


def sin(x):
    if not isinstance(x, Jet3):
        return np.sin(x)
    s, c = np.sin(x.value), np.cos(x.value)
    return compose(x, [s, c, -s, -c])


def cos(x):
    if not isinstance(x, Jet3):
        return np.cos(x)
    s, c = np.sin(x.value), np.cos(x.value)
    return compose(x, [c, -s, -c, s])


def exp(x):
    if not isinstance(x, Jet3):
        return np.exp(x)
    e = np.exp(x.value)
    return compose(x, [e, e, e, e])


def sqrt(x):
    if not isinstance(x, Jet3):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise DomainError("sqrt of a negative number")
        return np.sqrt(x)
    x0 = x.value
    if np.any(x0 <= _POLE):
        raise DomainError("sqrt jet at a non-positive argument")
    y = np.sqrt(x0)
    return compose(x, [y, 0.5 / y, -0.25 / y**3, 0.375 / y**5])


def acos(x):
    if not isinstance(x, Jet3):
        return np.arccos(x)
    x0 = x.value
    w = 1.0 - x0**2
    if np.any(w <= _POLE):
        raise DomainError("acos jet at |x| >= 1")
    s = np.sqrt(w)
    return compose(x, [np.arccos(x0), -1 / s, -x0 / s**3, -(1 + 2 * x0**2) / s**5])


def _atan0(w):
    # atan of a jet whose constant term is zero
    return compose(w, [np.zeros_like(w.value), np.ones_like(w.value), np.zeros_like(w.value),
                       -2 * np.ones_like(w.value)])


def atan2(y, x):
    """Jet of ``atan2(y, x)``, principal value at the base point.

    Uses ``atan2(y, x) = atan2(y0, x0) + atan((x0 y - y0 x) / (x0 x + y0 y))``,
    which is branch-free near the base point.
    """
    if not isinstance(y, Jet3) and not isinstance(x, Jet3):
        y, x = np.asarray(y, dtype=float), np.asarray(x, dtype=float)
        if np.any((y == 0) & (x == 0)):
            raise DomainError("atan2(0, 0)")
        return np.arctan2(y, x)
    order = min(j.order for j in (x, y) if isinstance(j, Jet3))
    if not isinstance(y, Jet3):
        y = Jet3.constant(y, order)
    if not isinstance(x, Jet3):
        x = Jet3.constant(x, order)
    x0, y0 = x.value, y.value
    if np.any(x0**2 + y0**2 <= _POLE):
        raise DomainError("atan2 jet at (0, 0)")
    w = (x0 * y - y0 * x) / (x0 * x + y0 * y)
    w.coef[0] = 0.0
    return _atan0(w) + np.arctan2(y0, x0)


def pow_int(x, n):
    if int(n) != n:
        raise ValueError(f"only integer powers are supported, got {n!r}")
    n = int(n)
    if not isinstance(x, Jet3):
        x = np.asarray(x, dtype=float)
        if n < 0:
            return reciprocal(x) ** (-n)
        return x**n
    if n < 0:
        return reciprocal(pow_int(x, -n))
    result = Jet3.constant(np.ones(x.shape), x.order)
    base = x
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def stack(items, axis=0):
    """Stack jets (or arrays) along a new value axis."""
    if not any(isinstance(it, Jet3) for it in items):
        return np.stack(np.broadcast_arrays(*[np.asarray(it, dtype=float) for it in items]),
                        axis=axis)
    order = min(it.order for it in items if isinstance(it, Jet3))
    coefs = []
    for it in items:
        if not isinstance(it, Jet3):
            it = Jet3.constant(it, order)
        coefs.append(it.coef[: ncoef(order)])
    coefs = np.broadcast_arrays(*coefs)
    axis = axis if axis < 0 else axis + 1
    return Jet3(np.stack(coefs, axis=axis), order)


def value(x):
    """Base-point value of a jet, or the array itself."""
    return x.value if isinstance(x, Jet3) else np.asarray(x, dtype=float)


_UNARY = {"neg": lambda a: -a, "sin": sin, "cos": cos, "exp": exp, "sqrt": sqrt}
_BINARY = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "atan2": atan2,
}


def jet_apply(op, args):
    """Apply a named operation to a list of jets.

    ``op`` is one of add, sub, mul, div, neg, sin, cos, exp, sqrt, pow_int,
    atan2.  ``pow_int`` takes ``[jet, n]``.
    """
    if op in _UNARY:
        (a,) = args
        return _UNARY[op](a)
    if op in _BINARY:
        a, b = args
        return _BINARY[op](a, b)
    if op == "pow_int":
        a, n = args
        return pow_int(a, n)
    raise ValueError(f"unknown jet operation {op!r}")


# --------------------------------------------------------------------- FD oracle
#: Default central-difference steps by derivative order.
FD_STEPS = {1: 1e-6, 2: 1e-4, 3: 1e-3}

_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}


def fd_oracle(f, p, multi_index, step=None):
    """Central-difference estimate of a mixed partial derivative.

    Parameters
    ----------
    f : callable
        ``f(u, v) -> float`` (or array, if ``p`` holds arrays).
    p : (u, v)
        Base point.
    multi_index : (a, b)
        Derivative orders in u and v, ``a + b <= 3``.
    step : float, optional
        Finite-difference step; defaults to :data:`FD_STEPS` by total order.

    Notes
    -----
    The stencil is the tensor product of second-order accurate 1-D central
    stencils, so the error is O(step**2) plus round-off ~ eps / step**(a+b).
    """
    a, b = multi_index
    if a < 0 or b < 0 or a + b > MAX_ORDER:
        raise ValueError(f"unsupported multi-index {multi_index!r}")
    u, v = p
    if a + b == 0:
        return f(u, v)
    h = FD_STEPS[a + b] if step is None else step
    total = 0.0
    for i, wu in _STENCILS[a]:
        for j, wv in _STENCILS[b]:
            total = total + wu * wv * f(u + i * h, v + j * h)
    return total / h ** (a + b)
