"""Exact q-expansions: the level-1 Eisenstein/discriminant ring, the Serre
derivative, and vector-valued expansions with polynomial-in-tau coefficients.

Scalar series store Fraction coefficients on the exponent grid n0/h, ...,
n_max/h.  Vector-valued series attach an arithmetic type whose rho(T) must
have rational finite-order-times-unipotent structure (h = 1 or 2); their
coefficients are polynomials in tau over Q[w, w^{-1}], w = 2*pi*i, so that
derivative bookkeeping stays exact.
"""

from __future__ import annotations

import cmath
from fractions import Fraction

from .errors import (
    NonconvergentWarning,
    PrecisionExhausted,
    TypeMismatch,
    WeightMismatch,
)
from .exact import ONE, PI_ONE, PiScalar, Poly, ZERO, rat, rat_str
from .types import ArithType, trivial


def sigma(n: int, k: int) -> int:
    """Divisor power sum; 0 for n <= 0."""
    if n <= 0:
        return 0
    out = 0
    i = 1
    while i * i <= n:
        if n % i == 0:
            out += i ** k
            j = n // i
            if j != i:
                out += j ** k
        i += 1
    return out


class QSeries:
    """Truncated scalar q-expansion with exact rational coefficients.

    coeffs[i] is the coefficient of q^((n0 + i)/h); the expansion is valid
    through exponent n_max/h inclusive.
    """

    __slots__ = ("weight", "h", "n0", "coeffs")

    def __init__(self, weight, coeffs, n0=0, h=1):
        self.weight = weight
        self.h = h
        self.n0 = n0
        self.coeffs = [rat(c) for c in coeffs]

    @property
    def n_max(self):
        return self.n0 + len(self.coeffs) - 1

    @property
    def prec(self):
        return self.n_max

    def copy(self):
        return QSeries(self.weight, list(self.coeffs), self.n0, self.h)

    def coeff(self, n):
        """Coefficient of q^(n/h) for integer grid index n."""
        if n < self.n0:
            return ZERO
        if n > self.n_max:
            raise PrecisionExhausted(f"coefficient {n} beyond stored precision {self.n_max}")
        return self.coeffs[n - self.n0]

    def leading_exponent(self):
        for i, c in enumerate(self.coeffs):
            if c:
                return self.n0 + i
        return None

    def truncate(self, n_max):
        if n_max > self.n_max:
            raise PrecisionExhausted("cannot extend a series by truncation")
        return QSeries(self.weight, self.coeffs[: n_max - self.n0 + 1], self.n0, self.h)

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def _check_grid(self, other):
        if self.h != other.h:
            raise TypeMismatch("exponent grids differ")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QSeries(self.weight, [rat(other)] + [ZERO] * (self.n_max - self.n0), 0, self.h) if self.n0 <= 0 else NotImplemented
        if not isinstance(other, QSeries):
            return NotImplemented
        self._check_grid(other)
        if self.weight != other.weight:
            raise WeightMismatch(f"weights {self.weight} and {other.weight} differ")
        n0 = min(self.n0, other.n0)
        n_max = min(self.n_max, other.n_max)
        out = []
        for n in range(n0, n_max + 1):
            a = self.coeffs[n - self.n0] if self.n0 <= n <= self.n_max else ZERO
            b = other.coeffs[n - other.n0] if other.n0 <= n <= other.n_max else ZERO
            out.append(a + b)
        return QSeries(self.weight, out, n0, self.h)

    def __neg__(self):
        return QSeries(self.weight, [-c for c in self.coeffs], self.n0, self.h)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QSeries(self.weight, [c * rat(other) for c in self.coeffs], self.n0, self.h)
        if isinstance(other, VectorQSeries):
            return other.__rmul__(self)
        if not isinstance(other, QSeries):
            return NotImplemented
        self._check_grid(other)
        # valid order: each factor is exact from its n0, truncated above n_max
        n0 = self.n0 + other.n0
        n_max = min(self.n_max + other.n0, other.n_max + self.n0)
        out = [ZERO] * (n_max - n0 + 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            na = self.n0 + i
            for j, b in enumerate(other.coeffs):
                n = na + other.n0 + j
                if n > n_max:
                    break
                if b:
                    out[n - n0] += a * b
        return QSeries(self.weight + other.weight, out, n0, self.h)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = QSeries(0, [ONE] + [ZERO] * (self.n_max - min(self.n0, 0)), 0, self.h)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        n0 = min(self.n0, other.n0)
        n_max = min(self.n_max, other.n_max)
        for n in range(n0, n_max + 1):
            a = self.coeffs[n - self.n0] if self.n0 <= n <= self.n_max else ZERO
            b = other.coeffs[n - other.n0] if other.n0 <= n <= other.n_max else ZERO
            if a != b:
                return False
        return True

    def theta(self):
        """q d/dq: multiplies the q^(n/h) coefficient by n/h."""
        return QSeries(
            self.weight + 2,
            [Fraction(self.n0 + i, self.h) * c for i, c in enumerate(self.coeffs)],
            self.n0,
            self.h,
        )

    def eval_numeric(self, tau: complex, n_cut=None):
        """(truncated value, geometric tail estimate) at tau with Im tau > 0."""
        q = cmath.exp(2j * cmath.pi * tau / self.h)
        if abs(q) >= 1:
            raise NonconvergentWarning("|q| >= 1: the series cannot converge")
        n_cut = self.n_max if n_cut is None else min(n_cut, self.n_max)
        total = 0j
        last = 0.0
        for i, c in enumerate(self.coeffs):
            n = self.n0 + i
            if n > n_cut:
                break
            if c:
                term = complex(c) * q ** n
                total += term
                last = abs(term)
        tail = last * abs(q) / (1 - abs(q)) if last else abs(q) ** (n_cut + 1) / (1 - abs(q))
        return total, tail

    def to_json(self):
        return {
            "weight": self.weight,
            "h": self.h,
            "n0": rat_str(Fraction(self.n0, self.h)),
            "nmax": rat_str(Fraction(self.n_max, self.h)),
            "coeffs": [
                {"n": rat_str(Fraction(self.n0 + i, self.h)), "value": rat_str(c)}
                for i, c in enumerate(self.coeffs)
                if c
            ],
        }

    def __repr__(self):
        bits = []
        for i, c in enumerate(self.coeffs[:8]):
            if c:
                bits.append(f"{rat_str(c)}*q^{self.n0 + i}" if self.n0 + i else rat_str(c))
        return f"QSeries(w={self.weight}; " + " + ".join(bits) + " + ...)"


def classical_qexp(name: str, n_max: int) -> QSeries:
    """E2, E4, E6 or Delta up to q^n_max, exact."""
    if n_max < 0:
        raise PrecisionExhausted("n_max must be >= 0")
    name = name.upper().replace("DELTA", "Delta")
    if name in ("E2", "E4", "E6"):
        k, c = {"E2": (2, -24), "E4": (4, 240), "E6": (6, -504)}[name]
        power = k - 1
        coeffs = [ONE] + [Fraction(c) * sigma(n, power) for n in range(1, n_max + 1)]
        return QSeries(k, coeffs)
    if name == "Delta":
        # q prod (1 - q^n)^24, built by incremental multiplication
        p = [ONE] + [ZERO] * max(n_max - 1, 0)
        size = len(p)
        for n in range(1, size):
            new = list(p)
            for i in range(size - n):
                if p[i]:
                    new[i + n] -= p[i]
            p = new
        pw = QSeries(0, p)
        eta24 = pw ** 24
        return QSeries(12, [ZERO] + eta24.coeffs[: n_max], 0, 1).truncate(n_max)
    raise TypeMismatch(f"unknown classical form {name!r}")


def serre_derivative(f: QSeries) -> QSeries:
    """D f = theta f - (k/12) E2 f, weight k -> k + 2."""
    e2 = classical_qexp("E2", f.n_max - min(f.n0, 0))
    return f.theta() - (e2 * f) * Fraction(f.weight, 12)


def ramanujan_theta(name: str, n_max: int) -> QSeries:
    """Right-hand side of the classical derivative identities
    theta E2 = (E2^2 - E4)/12, theta E4 = (E2 E4 - E6)/3,
    theta E6 = (E2 E6 - E4^2)/2; equals theta(E_name) termwise."""
    name = name.upper()
    e2 = classical_qexp("E2", n_max)
    if name == "E2":
        return (e2 * e2 - classical_qexp("E4", n_max)) * Fraction(1, 12)
    if name == "E4":
        return (e2 * classical_qexp("E4", n_max) - classical_qexp("E6", n_max)) * Fraction(1, 3)
    if name == "E6":
        e4 = classical_qexp("E4", n_max)
        return (e2 * classical_qexp("E6", n_max) - e4 * e4) * Fraction(1, 2)
    raise TypeMismatch(f"no theta identity for {name!r}")


def dim_mk(k: int) -> int:
    """Classical dim M_k for SL2(Z)."""
    if k < 0 or k % 2:
        return 0
    if k % 12 == 2:
        return k // 12
    return k // 12 + 1


def dim_sk(k: int) -> int:
    """Classical cusp form dimension."""
    if k < 4:
        return 0
    return max(dim_mk(k) - 1, 0) if k != 0 else 0


def mk_basis(k: int, n_max: int):
    """Monomial basis E4^a E6^b (4a + 6b = k) of M_k, in (a, b) lex order."""
    if k < 0 or k % 2:
        return []
    out = []
    e4 = classical_qexp("E4", n_max)
    e6 = classical_qexp("E6", n_max)
    for a in range(k // 4 + 1):
        rem = k - 4 * a
        if rem % 6 == 0:
            b = rem // 6
            out.append((e4 ** a) * (e6 ** b))
    for f in out:
        f.weight = k
    assert len(out) == dim_mk(k)
    return out


# ---------------------------------------------------------------------------
# vector-valued series


def infer_exponent_denominator(typ: ArithType) -> int:
    """h with rho(T)^h unipotent, h in {1, 2}; rejects other T-spectra."""
    from . import exact

    n = typ.dim
    ident = exact.mat_identity(n)

    def unipotent(m):
        p = exact.mat_add(m, exact.mat_neg(ident))
        q = p
        for _ in range(n):
            if exact.mat_eq(q, exact.mat_zero(n, n)):
                return True
            q = exact.mat_mul(q, p)
        return exact.mat_eq(q, exact.mat_zero(n, n))

    if unipotent(typ.matT):
        return 1
    if unipotent(exact.mat_mul(typ.matT, typ.matT)):
        return 2
    raise TypeMismatch(
        "rho(T) spectrum is not +-1-times-unipotent; q-expansions unsupported"
    )


def tau_poly(coeffs) -> Poly:
    """Polynomial in tau over PiScalar coefficients."""
    return Poly([c if isinstance(c, PiScalar) else PiScalar.of(c) for c in coeffs], var="t")


TAU_ZERO = tau_poly([])


def tau_theta(p: Poly) -> Poly:
    """(2 pi i)^{-1} d/dtau on a tau-polynomial: c t^s -> s c w^{-1} t^{s-1}."""
    return tau_poly(
        [p.coeffs[s].shift(-1) * Fraction(s) for s in range(1, len(p.coeffs))]
    )


class VectorQSeries:
    """Vector-valued q-expansion: per exponent a vector of tau-polynomials."""

    __slots__ = ("typ", "weight", "h", "n0", "coeffs")

    def __init__(self, typ, weight, coeffs, n0=0, h=None):
        self.typ = typ
        self.weight = weight
        self.h = infer_exponent_denominator(typ) if h is None else h
        self.n0 = n0
        self.coeffs = [
            [c if isinstance(c, Poly) else tau_poly([c]) for c in vec] for vec in coeffs
        ]

    @property
    def n_max(self):
        return self.n0 + len(self.coeffs) - 1

    def coeff(self, n):
        if n < self.n0:
            return [TAU_ZERO] * self.typ.dim
        if n > self.n_max:
            raise PrecisionExhausted(f"coefficient {n} beyond stored precision")
        return self.coeffs[n - self.n0]

    def depth_bound(self):
        return max((p.degree for vec in self.coeffs for p in vec), default=-1)

    def __add__(self, other):
        if not isinstance(other, VectorQSeries):
            return NotImplemented
        if self.weight != other.weight:
            raise WeightMismatch("vector series weights differ")
        if self.typ.dim != other.typ.dim or self.h != other.h:
            raise TypeMismatch("vector series types differ")
        n0 = min(self.n0, other.n0)
        n_max = min(self.n_max, other.n_max)
        out = []
        for n in range(n0, n_max + 1):
            a = self.coeff(n) if n <= self.n_max else None
            b = other.coeff(n) if n <= other.n_max else None
            a = a if a is not None else [TAU_ZERO] * self.typ.dim
            b = b if b is not None else [TAU_ZERO] * self.typ.dim
            out.append([x + y for x, y in zip(a, b)])
        return VectorQSeries(self.typ, self.weight, out, n0, self.h)

    def __neg__(self):
        return VectorQSeries(
            self.typ, self.weight, [[-p for p in vec] for vec in self.coeffs], self.n0, self.h
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = c if isinstance(c, PiScalar) else PiScalar.of(c)
        return VectorQSeries(
            self.typ, self.weight, [[p * c for p in vec] for vec in self.coeffs], self.n0, self.h
        )

    def __rmul__(self, scalar_series):
        """Scalar QSeries times vector series (convolution)."""
        if not isinstance(scalar_series, QSeries):
            return NotImplemented
        if scalar_series.h != self.h:
            raise TypeMismatch("exponent grids differ")
        f = scalar_series
        n0 = f.n0 + self.n0
        n_max = min(f.n_max + self.n0, self.n_max + f.n0)
        dim = self.typ.dim
        out = [[TAU_ZERO] * dim for _ in range(n_max - n0 + 1)]
        for i, a in enumerate(f.coeffs):
            if not a:
                continue
            na = f.n0 + i
            for j, vec in enumerate(self.coeffs):
                n = na + self.n0 + j
                if n > n_max:
                    break
                row = out[n - n0]
                for t in range(dim):
                    if not vec[t].is_zero():
                        row[t] = row[t] + vec[t] * a
        return VectorQSeries(self.typ, f.weight + self.weight, out, n0, self.h)

    def theta(self):
        """Termwise q d/dq including the tau-polynomial part:
        theta(c(tau) e(n tau)) = (n c + theta_tau c) e(n tau)."""
        out = []
        for i, vec in enumerate(self.coeffs):
            n = Fraction(self.n0 + i, self.h)
            out.append([p * PiScalar.of(n) + tau_theta(p) for p in vec])
        return VectorQSeries(self.typ, self.weight + 2, out, self.n0, self.h)

    def serre_derivative(self):
        e2 = classical_qexp("E2", self.n_max - min(self.n0, 0))
        correction = (e2 * self).scale(Fraction(-self.weight, 12))
        correction.weight = self.weight + 2
        return self.theta() + correction

    def component(self, i) -> list:
        return [vec[i] for vec in self.coeffs]

    def eval_numeric(self, tau: complex, n_cut=None):
        q = cmath.exp(2j * cmath.pi * tau / self.h)
        if abs(q) >= 1:
            raise NonconvergentWarning("|q| >= 1: the series cannot converge")
        n_cut = self.n_max if n_cut is None else min(n_cut, self.n_max)
        dim = self.typ.dim
        out = [0j] * dim
        for i, vec in enumerate(self.coeffs):
            n = self.n0 + i
            if n > n_cut:
                break
            qn = q ** n
            for t in range(dim):
                if not vec[t].is_zero():
                    out[t] += vec[t].evaluate(tau) * qn
        return out

    def flatten_rows(self, keys=None):
        """Flatten coefficients to a Q-vector over (n, component, tau-power, w-power).

        Returns (keys, row); pass the keys back in to align several series.
        """
        entries = {}
        for i, vec in enumerate(self.coeffs):
            n = self.n0 + i
            for t, p in enumerate(vec):
                for s, c in enumerate(p.coeffs):
                    if isinstance(c, PiScalar):
                        for wpow, val in c.components():
                            if val:
                                entries[(n, t, s, wpow)] = val
                    elif c:
                        entries[(n, t, s, 0)] = rat(c)
        if keys is None:
            keys = sorted(entries)
        row = [entries.get(k, ZERO) for k in keys]
        extra = [k for k in entries if k not in set(keys)]
        return keys, row, extra

    def to_json(self):
        return {
            "weight": self.weight,
            "h": self.h,
            "n0": rat_str(Fraction(self.n0, self.h)),
            "nmax": rat_str(Fraction(self.n_max, self.h)),
            "dim": self.typ.dim,
            "coeffs": [
                {
                    "n": rat_str(Fraction(self.n0 + i, self.h)),
                    "value": [repr(p) for p in vec],
                }
                for i, vec in enumerate(self.coeffs)
                if any(not p.is_zero() for p in vec)
            ],
        }


def vector_rank(series_list) -> int:
    """Exact Q-rank of a family of vector series (flattened coefficients)."""
    from .exact import mat_rank

    keys = set()
    flat = []
    for s in series_list:
        k, _, _ = s.flatten_rows([])
        entries = {}
        for i, vec in enumerate(s.coeffs):
            n = s.n0 + i
            for t, p in enumerate(vec):
                for deg, c in enumerate(p.coeffs):
                    if isinstance(c, PiScalar):
                        for wpow, val in c.components():
                            if val:
                                entries[(n, t, deg, wpow)] = val
                    elif c:
                        entries[(n, t, deg, 0)] = rat(c)
        flat.append(entries)
        keys |= set(entries)
    keys = sorted(keys)
    rows = [[e.get(k, ZERO) for k in keys] for e in flat]
    return mat_rank(rows)


def scalar_to_vector(f: QSeries) -> VectorQSeries:
    """View a scalar series as a Trivial-type vector series."""
    return VectorQSeries(
        trivial(), f.weight, [[tau_poly([c])] for c in f.coeffs], f.n0, f.h
    )
