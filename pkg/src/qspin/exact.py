"""Exact arithmetic substrate: the coefficient field Q(u, x, y), sparse exact
matrices with tensor-shape bookkeeping, and truncated power series.

Every symbolic value in the package lives in the rational function field
Q(u, x, y).  The variable u is a primitive eighth root of the deformation
parameter (q = u^8), so half- and quarter-powers of q are integer u-powers;
x and y carry spectral-parameter ratios.  Field elements are sympy sparse
fraction-field elements over QQ (gmpy2-backed), which gives canonical forms:
equality is structural.
"""

from __future__ import annotations

import random
from fractions import Fraction

from sympy import QQ
from sympy.polys.fields import field as _make_field

FIELD, U, X, Y = _make_field("u,x,y", QQ)
RING = FIELD.ring
ZERO = FIELD.zero
ONE = FIELD.one

_IU, _IX, _IY = 0, 1, 2  # generator positions in a monomial tuple


class ExactError(Exception):
    pass


class UnluckyPoint(ExactError):
    """A substitution hit a zero of some denominator; retry with a new point."""


class PoleError(ExactError):
    """A series expansion or evaluation ran into a genuine pole."""


def fld(c):
    """Coerce an int / Fraction / QQ element into the field."""
    if isinstance(c, Fraction):
        return FIELD(QQ(c.numerator, c.denominator))
    return FIELD(c)


def upow(k: int):
    return U**k


def qpow(k: int):
    """q^k with q = u^8."""
    return U ** (8 * k)


def neg_q_pow(m: int):
    """(-q)^m as an exact field element."""
    s = -1 if m % 2 else 1
    return s * U ** (8 * m)


def to_fraction(f) -> Fraction:
    """Convert a constant field element to a Fraction."""
    num, den = f.numer, f.denom
    if len(num) > 1 or len(den) > 1:
        raise ExactError("not a constant: %s" % (f,))
    cn = num.coeff(1) if num else QQ(0)
    cd = den.coeff(1)
    val = QQ(cn) / QQ(cd)
    return Fraction(int(val.numerator), int(val.denominator))


# -- monomial substitutions -------------------------------------------------
#
# All spectral-parameter shifts in the recursions are monomial (x -> c*x with
# c a signed u-power, x -> 1/x, x -> x*y, x -> value).  These preserve
# gcd-reduced numerator/denominator pairs, but we rebuild through FIELD.new to
# keep the canonical denominator convention.

def _poly_scale_x(p, sign: int, du: int, shift: int):
    out = {}
    for mono, coef in p.terms():
        eu, ex, ey = mono
        c = coef if (sign == 1 or ex % 2 == 0) else -coef
        out[(eu + du * ex + shift, ex, ey)] = c
    return RING.from_dict(out)


def subst_x_scaled(f, sign: int, du: int):
    """x -> sign * u^du * x (both sides cleared to stay polynomial)."""
    if sign == 1 and du == 0:
        return f
    shift = 0
    if du < 0:
        for p in (f.numer, f.denom):
            for mono in p.monoms():
                shift = max(shift, -du * mono[_IX] - mono[_IU])
    return FIELD.new(_poly_scale_x(f.numer, sign, du, shift),
                     _poly_scale_x(f.denom, sign, du, shift))


def subst_x_inv(f):
    """x -> 1/x."""
    num, den = f.numer, f.denom
    d = 0
    for mono in num.monoms():
        d = max(d, mono[_IX])
    for mono in den.monoms():
        d = max(d, mono[_IX])

    def flip(p):
        out = {}
        for mono, coef in p.terms():
            eu, ex, ey = mono
            out[(eu, d - ex, ey)] = coef
        return RING.from_dict(out)

    return FIELD.new(flip(num), flip(den))


def subst_x_to_xy(f):
    """x -> x*y (used to evaluate an R-matrix at a product of ratios)."""

    def xy(p):
        out = {}
        for mono, coef in p.terms():
            eu, ex, ey = mono
            out[(eu, ex, ey + ex)] = coef
        return RING.from_dict(out)

    return FIELD.new(xy(f.numer), xy(f.denom))


def subst_x_monomial(f, sign: int, du: int):
    """x -> sign * u^du (a pure evaluation; may shift u-exponents negative)."""
    shift = 0
    for p in (f.numer, f.denom):
        for mono in p.monoms():
            if du < 0:
                shift = max(shift, -du * mono[_IX])

    def ev(p):
        out = {}
        for mono, coef in p.terms():
            eu, ex, ey = mono
            c = coef if (sign == 1 or ex % 2 == 0) else -coef
            key = (eu + du * ex + shift, 0, ey)
            out[key] = out.get(key, QQ(0)) + c
        return RING.from_dict({k: v for k, v in out.items() if v})

    den = ev(f.denom)
    if not den:
        raise PoleError("denominator vanishes at the evaluation point")
    return FIELD.new(ev(f.numer), den)


def x_coefficients(f, max_order: int | None = None) -> dict:
    """Split a field element into {x-degree: u-only field element}.

    Requires the denominator to be x-free (true after clearing poles).
    """
    den = f.denom
    for mono in den.monoms():
        if mono[_IX]:
            raise ExactError("denominator depends on x")
    out: dict = {}
    dinv = FIELD.new(RING.one, den)
    for mono, coef in f.numer.terms():
        eu, ex, ey = mono
        if ey:
            raise ExactError("unexpected y in series context")
        if max_order is not None and ex > max_order:
            continue
        term = FIELD.new(RING.from_dict({(eu, 0, 0): coef}), RING.one)
        out[ex] = out.get(ex, ZERO) + term * dinv
    return {k: v for k, v in out.items() if v}


# -- specialization ---------------------------------------------------------

def _eval_poly(p, vals: dict):
    """Evaluate a ring polynomial at Fraction values for a subset of u,x,y."""
    acc = Fraction(0)
    partial = {}
    full = all(k in vals for k in ("u", "x", "y"))
    names = ("u", "x", "y")
    for mono, coef in p.terms():
        c = Fraction(int(coef.numerator), int(coef.denominator))
        rest = [0, 0, 0]
        for i, name in enumerate(names):
            e = mono[i]
            if not e:
                continue
            if name in vals:
                c *= vals[name] ** e
            else:
                rest[i] = e
        if full or not any(rest):
            acc += c
        else:
            key = tuple(rest)
            partial[key] = partial.get(key, QQ(0)) + QQ(c.numerator, c.denominator)
    if full:
        return acc
    if acc:
        partial[(0, 0, 0)] = partial.get((0, 0, 0), QQ(0)) + QQ(acc.numerator, acc.denominator)
    return RING.from_dict({k: v for k, v in partial.items() if v})


def specialize(f, assignment: dict):
    """Substitute exact rational values for a subset of the variables.

    Returns a Fraction when every variable of f is assigned, else a field
    element in the remaining variables.  Raises UnluckyPoint when a
    denominator vanishes.
    """
    if isinstance(f, ExactMatrix):
        return f.map_entries(lambda v: specialize(v, assignment))
    if isinstance(f, Fraction):
        return f
    num = _eval_poly(f.numer, assignment)
    den = _eval_poly(f.denom, assignment)
    if isinstance(den, Fraction):
        if den == 0:
            raise UnluckyPoint("denominator vanished at %s" % (assignment,))
        if isinstance(num, Fraction):
            return num / den
        den = RING.ground_new(QQ(den.numerator, den.denominator))
    elif not den:
        raise UnluckyPoint("denominator vanished at %s" % (assignment,))
    if isinstance(num, Fraction):
        num = RING.ground_new(QQ(num.numerator, num.denominator))
    out = FIELD.new(num, den)
    if out.numer.is_ground and out.denom.is_ground:
        return to_fraction(out)
    return out


def random_point(rng: random.Random, variables=("u", "x", "y")) -> dict:
    """A random exact rational point, bounded away from 0 and roots of unity."""
    pt = {}
    for v in variables:
        num = rng.choice([n for n in range(-9, 10) if abs(n) >= 2])
        den = rng.choice(range(2, 10))
        while abs(num) == den:
            num = rng.choice([n for n in range(-9, 10) if abs(n) >= 2])
        pt[v] = Fraction(num, den)
    return pt


# -- sparse exact matrices ---------------------------------------------------

class ExactMatrix:
    """Sparse matrix over the field (or over Fraction after specialization).

    `shape` optionally records tensor factor dimensions; the flat index of
    (i1, i2) is i1*d2 + i2.
    """

    __slots__ = ("rows", "cols", "data", "shape")

    def __init__(self, rows: int, cols: int, data: dict | None = None, shape=None):
        self.rows = rows
        self.cols = cols
        self.data = data if data is not None else {}
        self.shape = tuple(shape) if shape else None

    # construction helpers
    @classmethod
    def identity(cls, n: int, one=None, shape=None):
        one = ONE if one is None else one
        return cls(n, n, {(i, i): one for i in range(n)}, shape=shape)

    @classmethod
    def from_rows(cls, rows_list, cols, shape=None):
        data = {}
        for i, row in enumerate(rows_list):
            for j, v in row.items():
                if v:
                    data[(i, j)] = v
        return cls(len(rows_list), cols, data, shape=shape)

    @classmethod
    def transposition(cls, d1: int, d2: int, one=None):
        """P: V (dim d1) tensor W (dim d2) -> W tensor V."""
        one = ONE if one is None else one
        data = {}
        for i in range(d1):
            for j in range(d2):
                data[(j * d1 + i, i * d2 + j)] = one
        return cls(d1 * d2, d1 * d2, data, shape=(d2, d1))

    def copy(self):
        return ExactMatrix(self.rows, self.cols, dict(self.data), shape=self.shape)

    def with_shape(self, shape):
        return ExactMatrix(self.rows, self.cols, self.data, shape=shape)

    def set(self, i, j, v):
        if v:
            self.data[(i, j)] = v
        else:
            self.data.pop((i, j), None)

    def get(self, i, j):
        return self.data.get((i, j), 0)

    def row_map(self) -> dict:
        rows: dict = {}
        for (i, j), v in self.data.items():
            rows.setdefault(i, []).append((j, v))
        return rows

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ExactError("dimension mismatch in add")
        data = dict(self.data)
        for k, v in other.data.items():
            s = data.get(k)
            s = v if s is None else s + v
            if s:
                data[k] = s
            else:
                data.pop(k, None)
        return ExactMatrix(self.rows, self.cols, data, shape=self.shape)

    def __neg__(self):
        return ExactMatrix(self.rows, self.cols, {k: -v for k, v in self.data.items()},
                           shape=self.shape)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ExactMatrix):
            if self.cols != other.rows:
                raise ExactError("dimension mismatch in mul")
            brows = other.row_map()
            data: dict = {}
            for (i, k), va in self.data.items():
                br = brows.get(k)
                if not br:
                    continue
                for j, vb in br:
                    key = (i, j)
                    s = data.get(key)
                    p = va * vb
                    data[key] = p if s is None else s + p
            data = {k: v for k, v in data.items() if v}
            return ExactMatrix(self.rows, other.cols, data, shape=self.shape)
        return self.scale(other)

    def scale(self, c):
        if not c:
            return ExactMatrix(self.rows, self.cols, {}, shape=self.shape)
        return ExactMatrix(self.rows, self.cols,
                           {k: c * v for k, v in self.data.items()}, shape=self.shape)

    def kron(self, other):
        d1, d2 = self, other
        shape = ((self.shape or (self.rows,)) + (other.shape or (other.rows,)))
        data = {}
        for (i1, j1), v1 in d1.data.items():
            for (i2, j2), v2 in d2.data.items():
                data[(i1 * d2.rows + i2, j1 * d2.cols + j2)] = v1 * v2
        return ExactMatrix(d1.rows * d2.rows, d1.cols * d2.cols, data, shape=shape)

    def transpose(self):
        return ExactMatrix(self.cols, self.rows,
                           {(j, i): v for (i, j), v in self.data.items()}, shape=self.shape)

    def t1(self):
        """Transpose in the first tensor factor; needs shape (d1, d2)."""
        if not self.shape or len(self.shape) != 2:
            raise ExactError("t1 needs a two-factor tensor shape")
        d1, d2 = self.shape
        if d1 * d2 != self.rows or self.rows != self.cols:
            raise ExactError("tensor shape inconsistent with matrix size")
        data = {}
        for (r, c), v in self.data.items():
            i1, i2 = divmod(r, d2)
            j1, j2 = divmod(c, d2)
            data[(j1 * d2 + i2, i1 * d2 + j2)] = v
        return ExactMatrix(self.rows, self.cols, data, shape=self.shape)

    def apply(self, vec: dict) -> dict:
        out: dict = {}
        brows = self.row_map()
        # iterate columns present in vec
        cols: dict = {}
        for (i, j), v in self.data.items():
            cols.setdefault(j, []).append((i, v))
        for j, vj in vec.items():
            for i, a in cols.get(j, ()):
                s = out.get(i)
                p = a * vj
                out[i] = p if s is None else s + p
        return {k: v for k, v in out.items() if v}

    def map_entries(self, fn):
        data = {}
        for k, v in self.data.items():
            w = fn(v)
            if w:
                data[k] = w
        return ExactMatrix(self.rows, self.cols, data, shape=self.shape)

    def is_zero(self) -> bool:
        return not self.data

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        return (self - other).is_zero()

    def __repr__(self):
        return "ExactMatrix(%dx%d, nnz=%d)" % (self.rows, self.cols, len(self.data))

    def nnz(self):
        return len(self.data)


def act_on_slots(op: ExactMatrix, dims: tuple, slots: tuple) -> ExactMatrix:
    """Embed an operator acting on chosen tensor slots into the full product.

    `op` acts on the product of dims[s] for s in slots (kron index order);
    identity on the rest.
    """
    total = 1
    for d in dims:
        total *= d
    strides = [0] * len(dims)
    acc = 1
    for i in range(len(dims) - 1, -1, -1):
        strides[i] = acc
        acc *= dims[i]
    op_dims = [dims[s] for s in slots]
    rest = [i for i in range(len(dims)) if i not in slots]

    def split_op_index(idx):
        out = []
        for d in reversed(op_dims):
            out.append(idx % d)
            idx //= d
        return list(reversed(out))

    rest_indices = [[]]
    for r in rest:
        rest_indices = [ri + [k] for ri in rest_indices for k in range(dims[r])]

    data = {}
    for (i, j), v in op.data.items():
        iparts = split_op_index(i)
        jparts = split_op_index(j)
        for ri in rest_indices:
            base_i = base_j = 0
            for s, (ip, jp) in zip(slots, zip(iparts, jparts)):
                base_i += strides[s] * ip
                base_j += strides[s] * jp
            for r, k in zip(rest, ri):
                base_i += strides[r] * k
                base_j += strides[r] * k
            data[(base_i, base_j)] = v
    return ExactMatrix(total, total, data, shape=dims)


# -- exact elimination -------------------------------------------------------

def _complexity(v) -> int:
    if isinstance(v, Fraction):
        return 1
    try:
        return len(v.numer) + len(v.denom)
    except AttributeError:
        return 1


def eliminate(rows: list) -> tuple:
    """Sparse exact Gaussian elimination (in place on copies).

    Returns (pivots, rows) where pivots is a list of (row_index, col) in
    elimination order and rows the echelonized row dicts.  Pivot choice
    prefers structurally simple entries to limit coefficient growth.
    """
    rows = [dict(r) for r in rows]
    remaining = set(range(len(rows)))
    pivots = []
    for _ in range(len(rows)):
        best = None
        for ri in remaining:
            row = rows[ri]
            if not row:
                continue
            c = min(row)
            key = (c, _complexity(row[c]), len(row), ri)
            if best is None or key < best:
                best = key
        if best is None:
            break
        col, _, _, ri = best
        remaining.discard(ri)
        pivots.append((ri, col))
        prow = rows[ri]
        pval = prow[col]
        for rj in list(remaining):
            row = rows[rj]
            v = row.get(col)
            if not v:
                continue
            factor = v / pval
            del row[col]
            for c2, pv in prow.items():
                if c2 == col:
                    continue
                s = row.get(c2)
                t = -factor * pv if s is None else s - factor * pv
                if t:
                    row[c2] = t
                else:
                    row.pop(c2, None)
        if not any(rows[ri] for ri in remaining):
            break
    return pivots, rows


def kernel_basis(A: ExactMatrix) -> list:
    """Exact kernel of A: a list of sparse column vectors (dicts).

    Each returned vector has entry 1 at its defining free column; count is
    cols - rank(A).
    """
    vecs, _, _ = kernel_with_pivots(A)
    return vecs


def kernel_with_pivots(A: ExactMatrix):
    """Kernel basis plus (pivot_columns, free_columns) of the elimination."""
    rows_list: list = [dict() for _ in range(A.rows)]
    for (i, j), v in sorted(A.data.items()):
        rows_list[i][j] = v
    pivots, rows = eliminate(rows_list)
    pivot_cols = [c for _, c in pivots]
    pivot_set = set(pivot_cols)
    free = [c for c in range(A.cols) if c not in pivot_set]
    basis = []
    for f in free:
        v = {f: _one_like(A)}
        for ri, c in reversed(pivots):
            row = rows[ri]
            s = None
            for c2, coef in row.items():
                if c2 == c:
                    continue
                vc = v.get(c2)
                if vc is None:
                    continue
                t = coef * vc
                s = t if s is None else s + t
            if s:
                v[c] = -s / row[c]
        basis.append(v)
    return basis, sorted(pivot_cols), free


def _one_like(A: ExactMatrix):
    for v in A.data.values():
        if isinstance(v, Fraction):
            return Fraction(1)
        break
    return ONE


def rank(A: ExactMatrix) -> int:
    rows_list: list = [dict() for _ in range(A.rows)]
    for (i, j), v in sorted(A.data.items()):
        rows_list[i][j] = v
    pivots, _ = eliminate(rows_list)
    return len(pivots)


def inverse(A: ExactMatrix) -> ExactMatrix:
    """Exact inverse by sparse Gauss-Jordan; raises on singular input."""
    if A.rows != A.cols:
        raise ExactError("inverse of a non-square matrix")
    n = A.rows
    rows_list: list = [dict() for _ in range(n)]
    for (i, j), v in sorted(A.data.items()):
        rows_list[i][j] = v
    aug: list = [{n + i: _one_like(A)} for i in range(n)]
    for i in range(n):
        rows_list[i].update(aug[i])
    pivots, rows = eliminate(rows_list)
    if len(pivots) != n:
        raise ExactError("singular matrix")
    # back substitution: by construction pivot columns are 0..n-1 in some order
    sol_rows: dict = {}
    for ri, c in reversed(pivots):
        row = rows[ri]
        acc = {j - n: v for j, v in row.items() if j >= n}
        for c2, coef in row.items():
            if c2 >= n or c2 == c:
                continue
            for j, v in sol_rows[c2].items():
                s = acc.get(j)
                t = -coef * v if s is None else s - coef * v
                if t:
                    acc[j] = t
                else:
                    acc.pop(j, None)
        pval = row[c]
        sol_rows[c] = {j: v / pval for j, v in acc.items()}
    data = {}
    for i in range(n):
        for j, v in sol_rows[i].items():
            if v:
                data[(i, j)] = v
    return ExactMatrix(n, n, data, shape=A.shape)


def solve_upper_unique(stacked: ExactMatrix):
    """Kernel of `stacked` expected to be one-dimensional; returns the vector
    normalized so its first (lowest-index) nonzero coordinate is 1.
    Raises ExactError when the kernel dimension differs from one."""
    basis = kernel_basis(stacked)
    if len(basis) != 1:
        raise ExactError("solution space has dimension %d, expected 1" % len(basis))
    v = basis[0]
    lead = min(v)
    c = v[lead]
    return {k: val / c for k, val in v.items()}


# -- raw fractions -------------------------------------------------------------

class RawFrac:
    """A numerator/denominator pair over the polynomial ring with NO automatic
    gcd cancellation.  Series pipelines use these: addition and multiplication
    are pure polynomial arithmetic, and the zero test (numerator == 0) stays
    exact, so identities can be decided without ever normalizing."""

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = num
        self.den = den

    @classmethod
    def from_field(cls, f):
        if isinstance(f, RawFrac):
            return f
        if isinstance(f, int):
            return cls(RING.ground_new(QQ(f)), RING.one)
        if isinstance(f, Fraction):
            return cls(RING.ground_new(QQ(f.numerator, f.denominator)), RING.one)
        return cls(f.numer, f.denom)

    def __bool__(self):
        return bool(self.num)

    def __mul__(self, other):
        other = RawFrac.from_field(other)
        return RawFrac(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __add__(self, other):
        other = RawFrac.from_field(other)
        if not self.num:
            return other
        if not other.num:
            return self
        if self.den == other.den:
            return RawFrac(self.num + other.num, self.den)
        return RawFrac(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RawFrac(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RawFrac.from_field(other))

    def __rsub__(self, other):
        return RawFrac.from_field(other) + (-self)

    def __truediv__(self, other):
        other = RawFrac.from_field(other)
        if not other.num:
            raise ZeroDivisionError("raw fraction division by zero")
        return RawFrac(self.num * other.den, self.den * other.num)

    def inv(self):
        if not self.num:
            raise ZeroDivisionError("raw fraction inverse of zero")
        return RawFrac(self.den, self.num)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.num
        other = RawFrac.from_field(other)
        return self.num * other.den == other.num * self.den

    def to_field(self):
        return FIELD.new(self.num, self.den)

    def __repr__(self):
        return "RawFrac(%s / %s)" % (self.num, self.den)


def raw(f) -> RawFrac:
    return RawFrac.from_field(f)


# -- truncated power series --------------------------------------------------

class ZSeries:
    """Truncated power series sum_{m<=M} c_m x^m with u-only coefficients."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs=None):
        if order < 0:
            raise ExactError("series order must be >= 0")
        self.order = order
        if coeffs is None:
            self.coeffs = [ZERO] * (order + 1)
        else:
            self.coeffs = list(coeffs) + [ZERO] * (order + 1 - len(coeffs))

    @classmethod
    def constant(cls, c, order: int):
        s = cls(order)
        s.coeffs[0] = c if not isinstance(c, (int, Fraction)) else fld(c)
        return s

    @classmethod
    def from_ratfunc(cls, f, order: int):
        """Expand a field element, rational in x over Q(u), around x = 0."""
        num = x_coefficients_poly(f.numer)
        den = x_coefficients_poly(f.denom)
        smin_n = min(num) if num else 0
        smin_d = min(den)
        if smin_d > 0:
            if smin_n < smin_d:
                raise PoleError("pole at x=0 of order %d" % (smin_d - smin_n))
            num = {k - smin_d: v for k, v in num.items()}
            den = {k - smin_d: v for k, v in den.items()}
        d0 = den[0]
        d0inv = ONE / d0
        out = cls(order)
        cs = out.coeffs
        for m in range(order + 1):
            acc = num.get(m, ZERO)
            for i in range(1, m + 1):
                di = den.get(i)
                if di is not None and cs[m - i]:
                    acc = acc - di * cs[m - i]
            cs[m] = acc * d0inv if acc else ZERO
        return out

    def __add__(self, other):
        other = self._coerce(other)
        M = min(self.order, other.order)
        return ZSeries(M, [self.coeffs[m] + other.coeffs[m] for m in range(M + 1)])

    def __sub__(self, other):
        other = self._coerce(other)
        M = min(self.order, other.order)
        return ZSeries(M, [self.coeffs[m] - other.coeffs[m] for m in range(M + 1)])

    def __mul__(self, other):
        if not isinstance(other, ZSeries):
            return ZSeries(self.order, [c * other for c in self.coeffs])
        M = min(self.order, other.order)
        out = ZSeries(M)
        for i, a in enumerate(self.coeffs[:M + 1]):
            if not a:
                continue
            for j in range(0, M + 1 - i):
                b = other.coeffs[j]
                if b:
                    out.coeffs[i + j] = out.coeffs[i + j] + a * b
        return out

    def _coerce(self, other):
        if isinstance(other, ZSeries):
            return other
        return ZSeries.constant(other, self.order)

    def raw(self):
        """Coefficients as RawFrac (no-gcd arithmetic for long pipelines)."""
        return ZSeries(self.order, [RawFrac.from_field(c) for c in self.coeffs])

    def reduced(self):
        """Back to canonical field coefficients."""
        return ZSeries(self.order,
                       [c.to_field() if isinstance(c, RawFrac) else c
                        for c in self.coeffs])

    def inverse(self):
        c0 = self.coeffs[0]
        if not c0:
            raise ExactError("series unit required for inverse")
        inv0 = c0.inv() if isinstance(c0, RawFrac) else ONE / c0
        out = ZSeries(self.order)
        out.coeffs[0] = inv0
        for m in range(1, self.order + 1):
            acc = ZERO
            for i in range(1, m + 1):
                if self.coeffs[i] and out.coeffs[m - i]:
                    acc = acc + self.coeffs[i] * out.coeffs[m - i]
            out.coeffs[m] = -inv0 * acc if acc else ZERO
        return out

    def derivative_logz(self):
        """x d/dx of the series (the log-derivative numerator convention)."""
        return ZSeries(self.order, [m * c for m, c in enumerate(self.coeffs)])

    def scale_arg(self, c):
        """x -> c*x for a u-monomial (or any field element) c."""
        out = ZSeries(self.order)
        p = ONE
        for m in range(self.order + 1):
            out.coeffs[m] = self.coeffs[m] * p
            p = p * c
        return out

    def truncate(self, order: int):
        return ZSeries(order, self.coeffs[:order + 1])

    def is_zero(self):
        return all(not c for c in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, ZSeries):
            other = self._coerce(other)
        M = min(self.order, other.order)
        return all(self.coeffs[m] == other.coeffs[m] for m in range(M + 1))

    def __repr__(self):
        return "ZSeries(order=%d, %s)" % (self.order, self.coeffs)


class PolySeries:
    """Truncated series with polynomial coefficients over ONE shared
    denominator polynomial: sum_m (coeffs[m]/den) x^m + O(x^{order+1}).

    This keeps long q-series pipelines polynomial: products multiply the
    denominators once, sums with matching denominators add numerators, and
    the zero test never needs a gcd.
    """

    __slots__ = ("order", "den", "coeffs")

    def __init__(self, order: int, den, coeffs):
        self.order = order
        self.den = den
        self.coeffs = list(coeffs) + [RING.zero] * (order + 1 - len(coeffs))

    @classmethod
    def one(cls, order: int):
        return cls(order, RING.one, [RING.one])

    @classmethod
    def from_field_constant(cls, c, order: int):
        return cls(order, c.denom, [c.numer])

    @classmethod
    def from_ratfunc(cls, f, order: int):
        """Expansion of a field element (rational in x over Q(u)) at x = 0."""
        num = _poly_split_x(f.numer)
        den = _poly_split_x(f.denom)
        smin_n = min(num) if num else 0
        smin_d = min(den)
        if smin_d > 0:
            if smin_n < smin_d:
                raise PoleError("pole at x=0 of order %d" % (smin_d - smin_n))
            num = {k - smin_d: v for k, v in num.items()}
            den = {k - smin_d: v for k, v in den.items()}
        d0 = den[0]
        P = []
        for m in range(order + 1):
            acc = num.get(m, RING.zero) * _poly_pow(d0, m)
            for i in range(1, m + 1):
                di = den.get(i)
                if di is not None and P[m - i]:
                    acc = acc - di * P[m - i] * _poly_pow(d0, i - 1)
            P.append(acc)
        full = _poly_pow(d0, order + 1)
        coeffs = [P[m] * _poly_pow(d0, order - m) for m in range(order + 1)]
        return cls(order, full, coeffs)

    def __mul__(self, other):
        if not isinstance(other, PolySeries):
            return NotImplemented
        M = min(self.order, other.order)
        out = [RING.zero] * (M + 1)
        for i, a in enumerate(self.coeffs[:M + 1]):
            if not a:
                continue
            for j in range(0, M + 1 - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] = out[i + j] + a * b
        return PolySeries(M, self.den * other.den, out)

    def _aligned(self, other):
        M = min(self.order, other.order)
        if self.den == other.den:
            return M, self.den, self.coeffs, other.coeffs
        den = self.den * other.den
        a = [c * other.den for c in self.coeffs[:M + 1]]
        b = [c * self.den for c in other.coeffs[:M + 1]]
        return M, den, a, b

    def __add__(self, other):
        M, den, a, b = self._aligned(other)
        return PolySeries(M, den, [a[m] + b[m] for m in range(M + 1)])

    def __sub__(self, other):
        M, den, a, b = self._aligned(other)
        return PolySeries(M, den, [a[m] - b[m] for m in range(M + 1)])

    def scale_field(self, c):
        """Multiply by a constant field element."""
        return PolySeries(self.order, self.den * c.denom,
                          [x * c.numer for x in self.coeffs])

    def scale_arg_mono(self, sign: int, uexp: int):
        """x -> sign * u^uexp * x."""
        shift = max(0, -uexp * self.order)
        den = self.den * _u_mono_poly(1, shift)
        coeffs = []
        for m, c in enumerate(self.coeffs):
            s = 1 if (sign == 1 or m % 2 == 0) else -1
            mono = _u_mono_poly(s, uexp * m + shift)
            coeffs.append(c * mono)
        return PolySeries(self.order, den, coeffs)

    def derivative_logz(self):
        return PolySeries(self.order, self.den,
                          [m * c for m, c in enumerate(self.coeffs)])

    def inverse(self):
        n0 = self.coeffs[0]
        if not n0:
            raise ExactError("series unit required for inverse")
        M = self.order
        P = [RING.one]
        for m in range(1, M + 1):
            acc = RING.zero
            for i in range(1, m + 1):
                ni = self.coeffs[i]
                if ni and P[m - i]:
                    acc = acc - ni * P[m - i] * _poly_pow(n0, i - 1)
            P.append(acc)
        den = _poly_pow(n0, M + 1)
        coeffs = [self.den * P[m] * _poly_pow(n0, M - m) for m in range(M + 1)]
        return PolySeries(M, den, coeffs)

    def truncate(self, order: int):
        return PolySeries(order, self.den, self.coeffs[:order + 1])

    def is_zero(self) -> bool:
        return all(not c for c in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, PolySeries):
            return NotImplemented
        return (self - other).is_zero()

    def coefficient(self, m: int):
        """Coefficient m as a canonical field element."""
        return FIELD.new(self.coeffs[m], self.den)

    def to_zseries(self) -> "ZSeries":
        return ZSeries(self.order, [self.coefficient(m) for m in range(self.order + 1)])

    def __repr__(self):
        return "PolySeries(order=%d, den terms=%d)" % (self.order, len(self.den))


def _poly_pow(p, k: int):
    if k == 0:
        return RING.one
    acc = p
    for _ in range(k - 1):
        acc = acc * p
    return acc


def _u_mono_poly(sign: int, uexp: int):
    if uexp < 0:
        raise ExactError("negative exponent in monomial clearing")
    return RING.from_dict({(uexp, 0, 0): QQ(sign)})


def _poly_split_x(p) -> dict:
    """{x-degree: x-free polynomial} for a ring polynomial without y."""
    out: dict = {}
    for mono, coef in p.terms():
        eu, ex, ey = mono
        if ey:
            raise ExactError("unexpected y in series context")
        d = out.setdefault(ex, {})
        d[(eu, 0, 0)] = d.get((eu, 0, 0), QQ(0)) + coef
    return {ex: RING.from_dict({k: v for k, v in d.items() if v})
            for ex, d in out.items() if any(d.values())}


def x_coefficients_poly(p) -> dict:
    """{x-degree: u-only field element} for a ring polynomial without y."""
    out: dict = {}
    for mono, coef in p.terms():
        eu, ex, ey = mono
        if ey:
            raise ExactError("unexpected y in series context")
        key = (eu, 0, 0)
        d = out.setdefault(ex, {})
        d[key] = d.get(key, QQ(0)) + coef
    return {ex: FIELD.new(RING.from_dict(d), RING.one) for ex, d in out.items() if any(d.values())}
