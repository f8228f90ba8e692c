"""Modular linear differential equations and the coefficient recursions they
induce on Fourier and Taylor expansions.

A form f of type rho satisfies sum_{j<=r} g_j D^j f = 0 with r <= dim rho_f
and scalar modular coefficients g_j of weight l - 2j.  Rewriting the Serre
derivative D = theta - (k/12) E2 gives the theta-form sum h_j theta^j f = 0
with quasimodular h_j, which drives an O(n^2) recursion for the q-expansion
coefficients and a parallel recursion for Taylor coefficients at any point of
the upper half plane.

Quasimodular forms are carried symbolically as polynomials in E2, E4, E6 so
that Taylor data comes from the Ramanujan derivative tower instead of unstable
high-order numerical differentiation.
"""

from __future__ import annotations

import cmath
from fractions import Fraction

from .errors import (
    NotFound,
    PrecisionExhausted,
    SingularLeadingCoefficient,
)
from .exact import ONE, PI_ONE, PiScalar, Poly, ZERO, mat_kernel, rat
from .qexp import (
    QSeries,
    VectorQSeries,
    classical_qexp,
    dim_mk,
    scalar_to_vector,
    tau_poly,
    tau_theta,
)


class QuasiPoly:
    """Polynomial in E2, E4, E6 over Q: {(a, b, c): coeff} for E2^a E4^b E6^c.

    theta acts through the Ramanujan identities
    theta E2 = (E2^2 - E4)/12, theta E4 = (E2 E4 - E6)/3,
    theta E6 = (E2 E6 - E4^2)/2.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for key, c in terms.items():
                c = rat(c)
                if c:
                    self.terms[key] = c

    @classmethod
    def generator(cls, name):
        idx = {"E2": (1, 0, 0), "E4": (0, 1, 0), "E6": (0, 0, 1)}[name.upper()]
        return cls({idx: ONE})

    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0): c})

    def weight(self):
        ws = {2 * a + 4 * b + 6 * c for (a, b, c) in self.terms}
        return ws.pop() if len(ws) == 1 else None

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, ZERO) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return QuasiPoly(out)

    def __neg__(self):
        return QuasiPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QuasiPoly.const(rat(other))
        out = {}
        for (a1, b1, c1), x in self.terms.items():
            for (a2, b2, c2), y in other.terms.items():
                k = (a1 + a2, b1 + b2, c1 + c2)
                s = out.get(k, ZERO) + x * y
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return QuasiPoly(out)

    __rmul__ = __mul__

    def theta(self):
        t2 = QuasiPoly({(2, 0, 0): Fraction(1, 12), (0, 1, 0): Fraction(-1, 12)})
        t4 = QuasiPoly({(1, 1, 0): Fraction(1, 3), (0, 0, 1): Fraction(-1, 3)})
        t6 = QuasiPoly({(1, 0, 1): Fraction(1, 2), (0, 2, 0): Fraction(-1, 2)})
        out = QuasiPoly()
        for (a, b, c), x in self.terms.items():
            if a:
                out = out + QuasiPoly({(a - 1, b, c): x * a}) * t2
            if b:
                out = out + QuasiPoly({(a, b - 1, c): x * b}) * t4
            if c:
                out = out + QuasiPoly({(a, b, c - 1): x * c}) * t6
        return out

    def to_qseries(self, n_max) -> QSeries:
        e = {
            "E2": classical_qexp("E2", n_max),
            "E4": classical_qexp("E4", n_max),
            "E6": classical_qexp("E6", n_max),
        }
        out = QSeries(self.weight() or 0, [ZERO] * (n_max + 1))
        for (a, b, c), x in self.terms.items():
            term = QSeries(0, [x] + [ZERO] * n_max)
            for name, p in (("E2", a), ("E4", b), ("E6", c)):
                for _ in range(p):
                    term = term * e[name]
            term.weight = out.weight
            out = out + term
        return out

    def evaluate(self, values) -> complex:
        """values: dict with complex E2, E4, E6."""
        out = 0j
        for (a, b, c), x in self.terms.items():
            out += complex(x) * values["E2"] ** a * values["E4"] ** b * values["E6"] ** c
        return out

    def __repr__(self):
        bits = []
        for (a, b, c), x in sorted(self.terms.items()):
            mono = "".join(
                f"{n}^{p}" if p > 1 else n
                for n, p in (("E2", a), ("E4", b), ("E6", c))
                if p
            )
            bits.append(f"{x}*{mono}" if mono else str(x))
        return " + ".join(bits) or "0"


def mk_basis_symbolic(k: int):
    """Monomials E4^a E6^b with 4a + 6b = k, matching mk_basis ordering."""
    out = []
    if k < 0 or k % 2:
        return out
    for a in range(k // 4 + 1):
        rem = k - 4 * a
        if rem % 6 == 0:
            out.append(QuasiPoly({(0, a, rem // 6): ONE}))
    return out


class MLDE:
    """sum_{j<=order} g_j D^j f = 0 with g_j in M_{l-2j}, plus the theta-form
    sum h_j theta^j f = 0 with quasimodular h_j."""

    def __init__(self, order, l, serre_coeffs, weight):
        self.order = order
        self.l = l
        self.serre_coeffs = serre_coeffs  # list of QuasiPoly (no E2 part)
        self.weight = weight  # weight of the solution f
        self.theta_coeffs = self._expand_theta()
        self.g0_nonzero = not serre_coeffs[0].is_zero()

    def _expand_theta(self):
        """Rewrite D^j through theta; D acts at weight (self.weight + 2 t)."""
        r = self.order
        e2 = QuasiPoly.generator("E2")
        # operator D^j as sum_t op[t] theta^t, built iteratively
        powers = [[QuasiPoly.const(ONE)]]
        for j in range(1, r + 1):
            prev = powers[-1]
            w = self.weight + 2 * (j - 1)
            nxt = [QuasiPoly() for _ in range(j + 1)]
            for t, c in enumerate(prev):
                # theta compose: theta(c theta^t) = theta(c) theta^t + c theta^{t+1}
                nxt[t] = nxt[t] + c.theta()
                nxt[t + 1] = nxt[t + 1] + c
                nxt[t] = nxt[t] + (Fraction(-w, 12) * e2) * c
            powers.append(nxt)
        out = [QuasiPoly() for _ in range(r + 1)]
        for j, g in enumerate(self.serre_coeffs):
            if g.is_zero():
                continue
            for t, c in enumerate(powers[j]):
                out[t] = out[t] + g * c
        return out

    def serre_series(self, n_max):
        return [g.to_qseries(n_max) for g in self.serre_coeffs]

    def theta_series(self, n_max):
        return [h.to_qseries(n_max) for h in self.theta_coeffs]

    def to_json(self):
        return {
            "order": self.order,
            "l": self.l,
            "weight": self.weight,
            "g0_nonzero": self.g0_nonzero,
            "serre_coeffs": [repr(g) for g in self.serre_coeffs],
            "theta_coeffs": [repr(h) for h in self.theta_coeffs],
        }

    def __repr__(self):
        return f"MLDE(order={self.order}, l={self.l}, g0_nonzero={self.g0_nonzero})"


def _flatten_coeff(value, rows, col, n_unknowns, eqs):
    """Spread an exact coefficient (Fraction or tau-polynomial) into Q-rows."""
    if isinstance(value, Fraction):
        eqs.setdefault(("r",), [ZERO] * n_unknowns)[col] += value
        return
    raise NotImplementedError


def find_mlde(f, r_max=4, l_max=40) -> MLDE:
    """Smallest (order, l) admitting sum g_j D^j f = 0, by exact linear algebra.

    Works for scalar series and for vector-valued series with polynomial
    coefficients.  Relations with g_0 != 0 are preferred inside a slot; if the
    slot only carries g_0 = 0 relations the minimal one is returned flagged.
    """
    vec = f if isinstance(f, VectorQSeries) else scalar_to_vector(f)
    weight = vec.weight
    derivs = [vec]
    for _ in range(r_max):
        derivs.append(derivs[-1].serre_derivative())

    for r in range(1, r_max + 1):
        for l in range(0, l_max + 1):
            dims = [dim_mk(l - 2 * j) for j in range(r + 1)]
            if sum(dims) == 0 or dims[r] == 0:
                continue
            unknowns = []
            for j in range(r + 1):
                for sym in mk_basis_symbolic(l - 2 * j):
                    unknowns.append((j, sym))
            if vec.n_max < len(unknowns) + 3:
                raise PrecisionExhausted(
                    f"need at least {len(unknowns) + 3} coefficients to search (r, l) = ({r}, {l})"
                )
            # columns: products basis * D^j f, flattened over
            # (n, component, tau-power, w-power)
            cols = []
            for j, sym in unknowns:
                prod = sym.to_qseries(vec.n_max) * derivs[j]
                cols.append(_flatten_vector_series(prod))
            keys = sorted({k for c in cols for k in c})
            rows = [[c.get(k, ZERO) for c in cols] for k in keys]
            kernel = mat_kernel(rows)
            if not kernel:
                continue
            chosen = None
            for v in kernel:
                if any(v[i] for i, (j, _) in enumerate(unknowns) if j == 0):
                    chosen = v
                    break
            if chosen is None:
                chosen = kernel[0]
            coeffs = [QuasiPoly() for _ in range(r + 1)]
            for x, (j, sym) in zip(chosen, unknowns):
                if x:
                    coeffs[j] = coeffs[j] + x * sym
            if coeffs[r].is_zero():
                continue  # actually lower order; the smaller r slot will find it
            return MLDE(r, l, coeffs, weight)
    raise NotFound(f"no differential relation with order <= {r_max}, l <= {l_max}")


def _flatten_vector_series(v: VectorQSeries):
    out = {}
    for i, vecn in enumerate(v.coeffs):
        n = v.n0 + i
        for t, p in enumerate(vecn):
            for s, c in enumerate(p.coeffs):
                if isinstance(c, PiScalar):
                    for wp, val in c.components():
                        if val:
                            out[(n, t, s, wp)] = val
                elif c:
                    out[(n, t, s, 0)] = rat(c)
    return out


# ---------------------------------------------------------------------------
# Fourier recursion


def fourier_recursion(mlde: MLDE, seeds, n_target: int, typ=None):
    """Extend a q-expansion from its first coefficients using the theta-form.

    seeds: list of initial coefficients; scalars (Fractions) give a scalar
    series, vectors of tau-polynomials a vector-valued one.  The linear solve
    for each new coefficient requires P(n) = sum_j c(h_j; 0) n^j != 0.
    """
    r = mlde.order
    h = mlde.theta_series(n_target)
    h0 = [series.coeff(0) for series in h]
    scalar = typ is None
    if scalar:
        coeffs = [rat(c) for c in seeds]
        for n in range(len(seeds), n_target + 1):
            pn = sum(h0[j] * Fraction(n) ** j for j in range(r + 1))
            if pn == 0:
                raise SingularLeadingCoefficient(
                    f"leading solve degenerates at n = {n}"
                )
            acc = ZERO
            for m in range(n):
                if coeffs[m] == 0:
                    continue
                weightf = sum(
                    h[j].coeff(n - m) * Fraction(m) ** j for j in range(r + 1)
                )
                acc += weightf * coeffs[m]
            coeffs.append(-acc / pn)
        return QSeries(mlde.weight, coeffs, 0, 1)

    dim = typ.dim
    depth = max(
        (p.degree for vec in seeds for p in vec if isinstance(p, Poly)), default=0
    )
    depth = max(depth, 0)
    coeffs = [[_as_tau(p) for p in vec] for vec in seeds]

    def theta_op_apply(n, vec, j):
        """(n + theta_tau)^j applied to a vector of tau-polynomials."""
        out = vec
        for _ in range(j):
            out = [p * PiScalar.of(n) + tau_theta(p) for p in out]
        return out

    for n in range(len(seeds), n_target + 1):
        pn = sum(h0[j] * Fraction(n) ** j for j in range(r + 1))
        if pn == 0:
            raise SingularLeadingCoefficient(f"leading solve degenerates at n = {n}")
        # accumulated known part: sum over m < n
        acc = [tau_poly([]) for _ in range(dim)]
        for m in range(n):
            vec = coeffs[m]
            if all(p.is_zero() for p in vec):
                continue
            for j in range(r + 1):
                applied = theta_op_apply(m, vec, j)
                for t in range(dim):
                    if not applied[t].is_zero():
                        acc[t] = acc[t] + applied[t] * h[j].coeff(n - m)
        # solve (sum_j c(h_j; 0)(n + theta)^j) x = -acc, upper triangular in
        # tau-degree with scalar diagonal P(n): back-substitute top degree down
        x = [tau_poly([]) for _ in range(dim)]
        for t in range(dim):
            sol = [PiScalar() for _ in range(depth + 1)]
            rhs = [-c for c in _pad(acc[t], depth + 1)]
            for s in range(depth, -1, -1):
                # contribution of already-solved higher degrees through theta
                correction = PiScalar()
                partial = tau_poly(
                    [sol[u] if u > s else PiScalar() for u in range(depth + 1)]
                )
                applied_total = tau_poly([])
                for j in range(r + 1):
                    if h0[j]:
                        term = theta_op_apply(n, list(_pad_poly(partial, depth + 1)), j) if False else None
                # direct: evaluate operator on the partial solution
                op_applied = _apply_theta_poly(partial, n, h0, r)
                corr = op_applied.coeffs[s] if s < len(op_applied.coeffs) else PiScalar()
                val = (rhs[s] - corr) * _inv_fraction(pn)
                sol[s] = val
            x[t] = tau_poly(sol)
        coeffs.append(x)
    return VectorQSeries(typ, mlde.weight, coeffs, 0)


def _apply_theta_poly(p: Poly, n, h0, r) -> Poly:
    out = tau_poly([])
    cur = p
    for j in range(r + 1):
        if h0[j]:
            out = out + cur * PiScalar.of(h0[j])
        cur = cur * PiScalar.of(n) + tau_theta(cur)
    return out


def _inv_fraction(x: Fraction) -> PiScalar:
    return PiScalar.of(ONE / x)


def _pad(p: Poly, n):
    return [p.coeffs[i] if i < len(p.coeffs) else PiScalar() for i in range(n)]


def _pad_poly(p: Poly, n):
    return _pad(p, n)


def _as_tau(p):
    if isinstance(p, Poly):
        return tau_poly(list(p.coeffs))
    return tau_poly([p])


# ---------------------------------------------------------------------------
# Taylor recursion


class TaylorSeries:
    """Normalized Taylor coefficients c(f; n) = (2 pi i)^n f^(n)(tau0)."""

    def __init__(self, basepoint, values):
        self.basepoint = basepoint
        self.values = list(values)

    def coeff(self, n):
        return self.values[n]

    def to_json(self):
        return {
            "basepoint": [self.basepoint.real, self.basepoint.imag],
            "values": [[v.real, v.imag] for v in self.values],
        }


def eisenstein_values(tau0: complex, n_terms=80) -> dict:
    vals = {}
    for name in ("E2", "E4", "E6"):
        series = classical_qexp(name, n_terms)
        vals[name], _ = series.eval_numeric(tau0)
    return vals


def quasimodular_taylor(q: QuasiPoly, tau0: complex, n_max: int, values=None):
    """c(q; n) = (2 pi i)^(2n) (theta^n q)(tau0) for n <= n_max."""
    values = values or eisenstein_values(tau0)
    out = []
    cur = q
    w2 = (2j * cmath.pi) ** 2
    scale = 1.0 + 0j
    for n in range(n_max + 1):
        out.append(scale * cur.evaluate(values))
        cur = cur.theta()
        scale *= w2
    return out


def taylor_recursion(mlde: MLDE, tau0: complex, seeds, n_target: int) -> TaylorSeries:
    """Taylor coefficients at tau0 from the theta-form of the equation.

    seeds: c(f; 0), ..., c(f; order - 1).  Each step solves for the top
    coefficient, whose multiplier is (2 pi i)^(-2 order) h_order(tau0).
    """
    r = mlde.order
    if len(seeds) < r:
        raise PrecisionExhausted(f"need {r} Taylor seeds")
    values = eisenstein_values(tau0)
    depth_needed = n_target + 1
    h_taylor = [
        quasimodular_taylor(hj, tau0, depth_needed, values) for hj in mlde.theta_coeffs
    ]
    winv2 = (2j * cmath.pi) ** (-2)
    c = list(map(complex, seeds))
    # identity at index n determines c[n + r]:
    # sum_j (2 pi i)^(-2j) sum_{m<=n} C(n, m) c(h_j; n - m) c(f; m + j) = 0
    from math import comb

    for n in range(0, n_target - r + 1):
        top = winv2 ** r * h_taylor[r][0]
        if abs(top) < 1e-14:
            raise SingularLeadingCoefficient(
                f"h_{r}({tau0}) vanishes; the Taylor solve is singular"
            )
        acc = 0j
        for j in range(r + 1):
            wj = winv2 ** j
            for m in range(n + 1):
                if j == r and m == n:
                    continue
                acc += wj * comb(n, m) * h_taylor[j][n - m] * c[m + j]
        c.append(-acc / top)
    return TaylorSeries(tau0, c[: n_target + 1])


# ---------------------------------------------------------------------------
# rationality witness


def rational_span_dim(family) -> int:
    """Q-dimension of the span of a family of exact coefficient data.

    Accepts Fractions, tau-polynomials, or vectors of tau-polynomials; the
    2 pi i grading and tau powers are flattened into disjoint Q-coordinates.
    """
    flat = []
    keys = set()
    for item in family:
        entries = {}
        if isinstance(item, (int, Fraction)):
            if rat(item):
                entries[(0, 0, 0)] = rat(item)
        elif isinstance(item, Poly):
            _spread(item, 0, entries)
        else:
            for t, p in enumerate(item):
                _spread(p if isinstance(p, Poly) else tau_poly([p]), t, entries)
        flat.append(entries)
        keys |= set(entries)
    keys = sorted(keys)
    if not keys:
        return 0
    rows = [[e.get(k, ZERO) for k in keys] for e in flat]
    from .exact import mat_rank

    return mat_rank(rows)


def _spread(p: Poly, t, entries):
    for s, c in enumerate(p.coeffs):
        if isinstance(c, PiScalar):
            for wp, val in c.components():
                if val:
                    entries[(t, s, wp)] = val
        elif c:
            entries[(t, s, 0)] = rat(c)
