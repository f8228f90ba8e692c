"""Exact scalar, polynomial and rational linear algebra kernel.

Rationals are `fractions.Fraction`.  Matrices are dense lists of rows of
Fractions; all eliminations are fraction-free (Bareiss) on an integer-cleared
copy, so pivots and the canonical kernel basis are deterministic.

`PiScalar` models the graded ring Q[w, w^{-1}] with w = 2*pi*i kept symbolic:
q-expansion bookkeeping of tau-derivatives stays exact and rank computations
over Q remain meaningful.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .errors import DegreeMismatch

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def rat_str(x: Fraction) -> str:
    """Serialize "p/q", omitting "/q" when q = 1."""
    x = rat(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rat(s: str) -> Fraction:
    return Fraction(s)


# ---------------------------------------------------------------------------
# matrices: list of rows, rows are lists of Fraction


def mat_zero(rows, cols):
    return [[ZERO] * cols for _ in range(rows)]


def mat_identity(n):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    bt = list(zip(*b))
    return [[sum(row[t] * col[t] for t in range(k)) for col in bt] for row in a]


def mat_vec(a, v):
    return [sum(row[j] * v[j] for j in range(len(v))) for row in a]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, c):
    c = rat(c)
    return [[c * x for x in row] for row in a]


def mat_neg(a):
    return [[-x for x in row] for row in a]


def mat_transpose(a):
    return [list(row) for row in zip(*a)]


def mat_eq(a, b):
    return len(a) == len(b) and all(ra == rb for ra, rb in zip(a, b))


def mat_is_identity(a):
    return mat_eq(a, mat_identity(len(a)))


def kron(a, b):
    """Kronecker product, lexicographic block order (a-index major)."""
    rb, cb = len(b), len(b[0])
    out = mat_zero(len(a) * rb, len(a[0]) * cb)
    for i, row in enumerate(a):
        for j, x in enumerate(row):
            if x == 0:
                continue
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k][j * cb + l] = x * b[k][l]
    return out


def _int_clear(m):
    """Scale each row of a Fraction matrix to integers (common denominator)."""
    out = []
    for row in m:
        den = 1
        for x in row:
            den = den * x.denominator // _gcd(den, x.denominator)
        out.append([x.numerator * (den // x.denominator) for x in row])
    return out


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _bareiss_echelon(m):
    """Fraction-free row echelon form of an integer matrix.

    Returns (echelon rows, pivot column list).  Pivot choice: first row with a
    nonzero entry in the leftmost open column, so the output is deterministic.
    """
    m = [row[:] for row in m]
    rows, cols = len(m), len(m[0]) if m else 0
    piv_cols = []
    prev = 1
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pr = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        piv_cols.append(c)
        r += 1
    return m[:r], piv_cols


def mat_rref(m):
    """Reduced row echelon form over Q: (rref rows, pivot columns)."""
    if not m or not m[0]:
        return [], []
    ech, piv_cols = _bareiss_echelon(_int_clear(m))
    ech = [[Fraction(x) for x in row] for row in ech]
    for i, c in enumerate(piv_cols):
        pv = ech[i][c]
        ech[i] = [x / pv for x in ech[i]]
        for k in range(i):
            f = ech[k][c]
            if f:
                ech[k] = [x - f * y for x, y in zip(ech[k], ech[i])]
    return ech, piv_cols


def mat_rank(m):
    if not m or not m[0]:
        return 0
    return len(_bareiss_echelon(_int_clear(m))[0])


def mat_kernel(m):
    """Canonical null-space basis of a rational matrix.

    One vector per free column, free coordinate set to 1, pivot coordinates
    from the RREF; ordered by free column index.
    """
    if not m or not m[0]:
        return []
    cols = len(m[0])
    rref, piv_cols = mat_rref(m)
    piv_set = set(piv_cols)
    basis = []
    for f in range(cols):
        if f in piv_set:
            continue
        v = [ZERO] * cols
        v[f] = ONE
        for i, c in enumerate(piv_cols):
            v[c] = -rref[i][f]
        basis.append(v)
    return basis


class NoSolution:
    """Sentinel value: the linear system is inconsistent (a normal outcome)."""

    def __repr__(self):
        return "NoSolution"

    def __bool__(self):
        return False


NO_SOLUTION = NoSolution()


def mat_solve(m, b):
    """One exact solution of m x = b, or NO_SOLUTION."""
    if len(b) != len(m):
        raise DegreeMismatch("right-hand side length does not match row count")
    cols = len(m[0]) if m else 0
    aug = [row[:] + [bv] for row, bv in zip(m, b)]
    rref, piv_cols = mat_rref(aug)
    x = [ZERO] * cols
    for i, c in enumerate(piv_cols):
        if c == cols:
            return NO_SOLUTION
        x[c] = rref[i][cols]
    return x


def mat_inv(m):
    n = len(m)
    aug = [row[:] + ident_row for row, ident_row in zip(m, mat_identity(n))]
    rref, piv_cols = mat_rref(aug)
    if piv_cols[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in rref[:n]]


# ---------------------------------------------------------------------------
# symbolic 2*pi*i scalars


class PiScalar:
    """Element of Q[w, w^{-1}] with w = 2*pi*i (kept formal).

    Since pi is transcendental the monomials w^t are Q-linearly independent,
    so equality and Q-rank computations on these scalars are exact.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for t, c in terms.items():
                c = rat(c)
                if c:
                    self.terms[t] = c

    @classmethod
    def of(cls, c, power=0):
        c = rat(c)
        return cls({power: c} if c else None)

    def is_zero(self):
        return not self.terms

    def is_rational(self):
        return set(self.terms) <= {0}

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("scalar carries nonzero powers of 2*pi*i")
        return self.terms.get(0, ZERO)

    def __add__(self, other):
        other = _pi(other)
        out = dict(self.terms)
        for t, c in other.terms.items():
            s = out.get(t, ZERO) + c
            if s:
                out[t] = s
            else:
                out.pop(t, None)
        return PiScalar(out)

    __radd__ = __add__

    def __neg__(self):
        return PiScalar({t: -c for t, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_pi(other))

    def __rsub__(self, other):
        return _pi(other) + (-self)

    def __mul__(self, other):
        other = _pi(other)
        out = {}
        for t1, c1 in self.terms.items():
            for t2, c2 in other.terms.items():
                t = t1 + t2
                s = out.get(t, ZERO) + c1 * c2
                if s:
                    out[t] = s
                else:
                    out.pop(t, None)
        return PiScalar(out)

    __rmul__ = __mul__

    def shift(self, power):
        return PiScalar({t + power: c for t, c in self.terms.items()})

    def __eq__(self, other):
        return self.terms == _pi(other).terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def evaluate(self) -> complex:
        import cmath

        w = 2j * cmath.pi
        return sum(complex(c) * w ** t for t, c in self.terms.items()) if self.terms else 0j

    def components(self):
        """Sorted (w-power, Fraction) pairs, for flattening into Q-vectors."""
        return sorted(self.terms.items())

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for t, c in sorted(self.terms.items()):
            s = rat_str(c)
            if t:
                s += f"*w^{t}" if t != 1 else "*w"
            bits.append(s)
        return " + ".join(bits)


def _pi(x):
    return x if isinstance(x, PiScalar) else PiScalar.of(x)


PI_ZERO = PiScalar()
PI_ONE = PiScalar.of(1)


# ---------------------------------------------------------------------------
# dense polynomials


class Poly:
    """Dense univariate polynomial with Fraction or PiScalar coefficients.

    The variable is a display tag only; arithmetic never mixes tags.
    """

    __slots__ = ("var", "coeffs")

    def __init__(self, coeffs, var="X"):
        coeffs = [c for c in coeffs]
        while coeffs and _is_zero(coeffs[-1]):
            coeffs.pop()
        self.coeffs = coeffs
        self.var = var

    @classmethod
    def const(cls, c, var="X"):
        return cls([c], var)

    @classmethod
    def x(cls, var="X"):
        return cls([ZERO, ONE], var)

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else -1

    def is_zero(self):
        return not self.coeffs

    def coeff(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return ZERO

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(
            [self.coeff(i) + other.coeff(i) for i in range(n)], self.var
        )

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, Poly):
            if not self.coeffs or not other.coeffs:
                return Poly([], self.var)
            out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if _is_zero(a):
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return Poly(out, self.var)
        return Poly([c * other for c in self.coeffs], self.var)

    __rmul__ = __mul__

    def __pow__(self, n):
        out = Poly([ONE], self.var)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def _coerce(self, other):
        return other if isinstance(other, Poly) else Poly([other], self.var)

    def deriv(self):
        return Poly([i * self.coeffs[i] for i in range(1, len(self.coeffs))], self.var)

    def evaluate(self, z):
        out = 0
        for c in reversed(self.coeffs):
            cval = c.evaluate() if isinstance(c, PiScalar) else c
            out = out * z + (complex(cval) if not isinstance(cval, Fraction) else cval if isinstance(z, Fraction) else complex(cval))
        return out

    def __repr__(self):
        if not self.coeffs:
            return "0"
        bits = []
        for i, c in enumerate(self.coeffs):
            if _is_zero(c):
                continue
            cs = rat_str(c) if isinstance(c, Fraction) else f"({c!r})"
            if i == 0:
                bits.append(cs)
            elif i == 1:
                bits.append(f"{cs}*{self.var}")
            else:
                bits.append(f"{cs}*{self.var}^{i}")
        return " + ".join(bits)


def _is_zero(c):
    if isinstance(c, PiScalar):
        return c.is_zero()
    return c == 0


def poly_compose_moebius(p: Poly, a, b, c, d, weight: int) -> Poly:
    """Finite-weight slash composition on polynomials.

    For gamma = [[a, b], [c, d]] with ad - bc = 1 this returns
    (-c X + a)^weight * p((d X - b) / (-c X + a)), the weight `-weight`
    action of gamma on Poly(X, weight); the result must again be a
    polynomial of degree <= weight.
    """
    a, b, c, d = rat(a), rat(b), rat(c), rat(d)
    if a * d - b * c != 1:
        raise DegreeMismatch("moebius matrix must have determinant 1")
    if p.degree > weight:
        raise DegreeMismatch(
            f"polynomial degree {p.degree} exceeds the weight bound {weight}"
        )
    num = Poly([-b, d], p.var)
    den = Poly([a, -c], p.var)
    out = Poly([], p.var)
    # sum_i p_i (dX-b)^i (-cX+a)^(weight-i)
    for i, ci in enumerate(p.coeffs):
        if _is_zero(ci):
            continue
        out = out + ci * (num ** i) * (den ** (weight - i))
    if out.degree > weight:
        raise DegreeMismatch("slash composition left the polynomial model")
    return out


def binom(n, k) -> Fraction:
    """Generalized binomial C(n, k) for integer n (possibly negative), k >= 0."""
    if k < 0:
        return ZERO
    if n >= 0:
        return Fraction(comb(n, k)) if k <= n else ZERO
    num = ONE
    for j in range(k):
        num *= n - j
    return num / Fraction(_factorial(k))


def _factorial(k):
    out = 1
    for j in range(2, k + 1):
        out *= j
    return out
