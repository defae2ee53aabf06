"""Piecewise-linear exponent expressions over (h, m) = (log_T H, log_T M).

A bound of the shape  prod (1 + u_i)^{c_i} * T^a H^b M^c  becomes, after
taking log_T and dropping constants, a tree of ``Sum``/``Max``/``Scale``
nodes over affine ``LinForm`` leaves.  (1 + u) maps to Max(0, log_T u).
Every tree with non-negative scale factors is convex, and expands to a
max of affine forms (:meth:`PwlExpr.expand`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction as F
from typing import Callable, Iterable

from .exactmath import Q, fmt

ZERO = F(0)


@dataclass(frozen=True, order=True)
class LinForm:
    """const + h*h_var + m*m_var with exact coefficients."""

    const: F = ZERO
    h: F = ZERO
    m: F = ZERO

    def __post_init__(self):
        object.__setattr__(self, "const", Q(self.const))
        object.__setattr__(self, "h", Q(self.h))
        object.__setattr__(self, "m", Q(self.m))

    def __call__(self, h, m) -> F:
        return self.const + self.h * h + self.m * m

    def __add__(self, other: "LinForm") -> "LinForm":
        return LinForm(self.const + other.const, self.h + other.h, self.m + other.m)

    def __sub__(self, other: "LinForm") -> "LinForm":
        return LinForm(self.const - other.const, self.h - other.h, self.m - other.m)

    def __neg__(self) -> "LinForm":
        return LinForm(-self.const, -self.h, -self.m)

    def scale(self, k) -> "LinForm":
        k = Q(k)
        return LinForm(k * self.const, k * self.h, k * self.m)

    def substitute(self, h_form: "LinForm", m_form: "LinForm") -> "LinForm":
        """Replace the variables h, m by affine forms in new variables."""
        return LinForm(self.const) + h_form.scale(self.h) + m_form.scale(self.m)

    @property
    def ratio_only(self) -> bool:
        """True when the form depends on (h, m) only through h - m."""
        return self.h == -self.m

    def __str__(self) -> str:
        return f"{fmt(self.const)} + {fmt(self.h)}*h + {fmt(self.m)}*m"

    def as_dict(self) -> dict:
        return {"const": fmt(self.const), "h": fmt(self.h), "m": fmt(self.m)}


def lin(const=0, h=0, m=0) -> "Lin":
    return Lin(LinForm(const, h, m))


def ratio_form(coeff, const=0) -> LinForm:
    """const + coeff*(h - m), i.e. the log of (H/M)^coeff T^const."""
    coeff = Q(coeff)
    return LinForm(const, coeff, -coeff)


class PwlExpr:
    def __call__(self, h, m) -> F:
        raise NotImplementedError

    def expand(self) -> list[LinForm]:
        """Max-plus normal form: the expression equals the max of these forms."""
        raise NotImplementedError

    def map_forms(self, fn: Callable[[LinForm], LinForm]) -> "PwlExpr":
        raise NotImplementedError

    def substitute(self, h_form: LinForm, m_form: LinForm) -> "PwlExpr":
        return self.map_forms(lambda f: f.substitute(h_form, m_form))

    def is_convex(self) -> bool:
        """Structural convexity: no negative Scale factor anywhere."""
        raise NotImplementedError

    def forms(self) -> Iterable[LinForm]:
        raise NotImplementedError


@dataclass(frozen=True)
class Lin(PwlExpr):
    form: LinForm

    def __call__(self, h, m):
        return self.form(h, m)

    def expand(self):
        return [self.form]

    def map_forms(self, fn):
        return Lin(fn(self.form))

    def is_convex(self):
        return True

    def forms(self):
        yield self.form


@dataclass(frozen=True)
class Sum(PwlExpr):
    children: tuple[PwlExpr, ...]

    def __call__(self, h, m):
        return sum((c(h, m) for c in self.children), ZERO)

    def expand(self):
        out = []
        for combo in itertools.product(*(c.expand() for c in self.children)):
            acc = LinForm()
            for f in combo:
                acc = acc + f
            out.append(acc)
        return out

    def map_forms(self, fn):
        return Sum(tuple(c.map_forms(fn) for c in self.children))

    def is_convex(self):
        return all(c.is_convex() for c in self.children)

    def forms(self):
        for c in self.children:
            yield from c.forms()


@dataclass(frozen=True)
class Max(PwlExpr):
    children: tuple[PwlExpr, ...]

    def __call__(self, h, m):
        return max(c(h, m) for c in self.children)

    def expand(self):
        return [f for c in self.children for f in c.expand()]

    def map_forms(self, fn):
        return Max(tuple(c.map_forms(fn) for c in self.children))

    def is_convex(self):
        return all(c.is_convex() for c in self.children)

    def forms(self):
        for c in self.children:
            yield from c.forms()


@dataclass(frozen=True)
class Scale(PwlExpr):
    factor: F
    child: PwlExpr

    def __post_init__(self):
        object.__setattr__(self, "factor", Q(self.factor))

    def __call__(self, h, m):
        return self.factor * self.child(h, m)

    def expand(self):
        if self.factor < 0:
            raise ValueError("negative Scale has no max-plus expansion")
        return [f.scale(self.factor) for f in self.child.expand()]

    def map_forms(self, fn):
        return Scale(self.factor, self.child.map_forms(fn))

    def is_convex(self):
        return self.factor >= 0 and self.child.is_convex()

    def forms(self):
        yield from self.child.forms()


def add(*children: PwlExpr) -> Sum:
    return Sum(tuple(children))


def maximum(*children: PwlExpr) -> Max:
    return Max(tuple(children))


def one_plus(*terms: LinForm) -> Max:
    """log_T of (1 + sum of T^{terms})."""
    return Max((lin(0),) + tuple(Lin(t) for t in terms))


def power(c, child: PwlExpr) -> Scale:
    return Scale(Q(c), child)


def prune_on_halfline(forms: Iterable[LinForm], x0) -> list[LinForm]:
    """Drop forms in x = m - h that never attain the max on [x0, oo).

    Every input form must depend on (h, m) only through h - m.  A form is
    dropped if some other form is >= it at x0 and grows at least as fast.
    Duplicates collapse to one.
    """
    x0 = Q(x0)
    uniq = sorted(set(forms))
    for f in uniq:
        if not f.ratio_only:
            raise ValueError(f"form {f} is not a function of h - m alone")

    def at(f):  # value at x = x0, with h - m = -x0
        return f.const - f.h * x0

    def slope(f):  # d/dx with x = m - h
        return -f.h

    keep = []
    for f in uniq:
        dominated = any(
            g != f and at(g) >= at(f) and slope(g) >= slope(f) for g in uniq
        )
        if not dominated:
            keep.append(f)
    return keep
