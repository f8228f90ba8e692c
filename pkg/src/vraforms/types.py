"""Arithmetic types: representations of SL2(Z) (or a congruence subgroup) kept
as exact rational matrices together with the construction tree they came from.

Conventions fixed once and used everywhere:

* sym^d is modeled on Poly(X, d) with the monomial basis 1, X, ..., X^d and
  sym^d(gamma) p = (-cX + a)^d p((dX - b)/(-cX + a)); matrices act on
  coefficient column vectors.
* tensor products use lexicographic Kronecker order (first factor major);
* extensions order the sub-block before the quotient block.

SL2(Z) types carry images of the generators S, T; elements are evaluated by
multiplying along the canonical S,T word.  Subgroup types (group = Gamma_0(N)
or Gamma(N)) carry an evaluator defined on subgroup elements only.
"""

from __future__ import annotations

from fractions import Fraction

from . import exact
from .errors import (
    DimensionMismatch,
    GroupMismatch,
    NotInSubgroup,
    RelationViolation,
    UnsupportedTree,
)
from .exact import ONE, ZERO, Poly, binom, mat_identity, mat_mul, mat_vec, rat_str
from .modgroup import GroupElement, Subgroup, coset_table, word_decompose

SL2Z = "sl2z"


def sym_matrix(d: int, g: GroupElement):
    """Matrix of sym^d(g) on the monomial basis of Poly(X, d)."""
    a, b, c, dd = g.entries()
    cols = []
    num = Poly([Fraction(-b), Fraction(dd)])
    den = Poly([Fraction(a), Fraction(-c)])
    num_pow = Poly([ONE])
    den_pows = [Poly([ONE])]
    for _ in range(d):
        den_pows.append(den_pows[-1] * den)
    for i in range(d + 1):
        p = num_pow * den_pows[d - i]
        cols.append([p.coeff(r) for r in range(d + 1)])
        num_pow = num_pow * num
    return [[cols[j][i] for j in range(d + 1)] for i in range(d + 1)]


def check_relations(matS, matT):
    """None if the SL2(Z) presentation holds exactly, else the failing word."""
    n = len(matS)
    if any(len(r) != n for r in matS) or len(matT) != n:
        raise DimensionMismatch("generator matrices must be square, equal size")
    s2 = mat_mul(matS, matS)
    s4 = mat_mul(s2, s2)
    if not exact.mat_is_identity(s4):
        return "S^4"
    st = mat_mul(matS, matT)
    if not exact.mat_eq(mat_mul(mat_mul(st, st), st), s2):
        return "(ST)^3"
    if not exact.mat_eq(mat_mul(s2, matT), mat_mul(matT, s2)):
        return "S^2 central"
    return None


def verify_relations(matS, matT):
    """"pass", or raise RelationViolation naming the first failing relation."""
    bad = check_relations(matS, matT)
    if bad is not None:
        raise RelationViolation(bad)
    return "pass"


class ArithType:
    """A representation with exact generator matrices and a construction tree.

    For group == "sl2z" the fields matS/matT hold the images of S and T.  For
    subgroup types, `evaluator(gamma)` returns the matrix of any subgroup
    element; matS/matT are None.
    """

    def __init__(self, dim, group, tree, matS=None, matT=None, evaluator=None, check=True):
        self.dim = dim
        self.group = group
        self.tree = tree
        self.matS = matS
        self.matT = matT
        self._evaluator = evaluator
        self._pow_cache = {}
        self._nilpotent_part = None
        self._float_cache = None
        if group == SL2Z:
            if matS is None or matT is None:
                raise DimensionMismatch("SL2(Z) types need both generator matrices")
            if len(matS) != dim or len(matT) != dim:
                raise DimensionMismatch("generator matrices disagree with dim")
            if check:
                verify_relations(matS, matT)
        elif evaluator is None:
            raise DimensionMismatch("subgroup types need an evaluator")

    # -- structure ---------------------------------------------------------

    def is_sl2z(self):
        return self.group == SL2Z

    def __eq__(self, other):
        return (
            isinstance(other, ArithType)
            and self.dim == other.dim
            and self.group == other.group
            and self.matS == other.matS
            and self.matT == other.matT
        )

    def __repr__(self):
        return f"ArithType(dim={self.dim}, group={self.group}, tree={tree_name(self.tree)})"

    # -- evaluation --------------------------------------------------------

    def _mat_t_power(self, m):
        if m in self._pow_cache:
            return self._pow_cache[m]
        n = self.dim
        if self._nilpotent_part is None:
            nil = exact.mat_add(self.matT, exact.mat_neg(mat_identity(n)))
            powers = [mat_identity(n)]
            p = nil
            while not exact.mat_eq(p, exact.mat_zero(n, n)) and len(powers) <= n:
                powers.append(p)
                p = mat_mul(p, nil)
            self._nilpotent_part = powers if len(powers) <= n else False
        if self._nilpotent_part:
            # unipotent T: T^m = sum_j C(m, j) (T - 1)^j, valid for all m in Z
            out = exact.mat_zero(n, n)
            for j, nj in enumerate(self._nilpotent_part):
                cj = binom(m, j)
                if cj:
                    out = exact.mat_add(out, exact.mat_scale(nj, cj))
        else:
            out = mat_identity(n)
            base = self.matT if m >= 0 else exact.mat_inv(self.matT)
            k = abs(m)
            sq = base
            while k:
                if k & 1:
                    out = mat_mul(out, sq)
                sq = mat_mul(sq, sq)
                k >>= 1
        self._pow_cache[m] = out
        return out

    def evaluate(self, g: GroupElement):
        """Exact matrix of g; multiplicative by construction."""
        if not self.is_sl2z():
            if not self.group.contains(g):
                raise NotInSubgroup(f"{g} is not in {self.group}")
            return self._evaluator(g)
        word = word_decompose(g)
        out = self._mat_t_power(word.m)
        for e in word.exponents:
            out = mat_mul(mat_mul(out, self.matS), self._mat_t_power(e))
        if word.sign == -1:
            out = mat_mul(mat_mul(self.matS, self.matS), out)
        return out

    def apply(self, g: GroupElement, vec):
        return mat_vec(self.evaluate(g), vec)

    # -- float path (lattice sums) ------------------------------------------

    def _floats(self):
        import numpy as np

        if self._float_cache is None:
            matS = np.array([[float(x) for x in row] for row in self.matS])
            matT = np.array([[float(x) for x in row] for row in self.matT])
            nil = []
            if self._nilpotent_part is None:
                self._mat_t_power(0)
            if self._nilpotent_part:
                nil = [
                    np.array([[float(x) for x in row] for row in p])
                    for p in self._nilpotent_part
                ]
            self._float_cache = {"S": matS, "T": matT, "nil": nil, "tpow": {}}
        return self._float_cache

    def _float_t_power(self, m):
        import numpy as np
        from math import comb

        fc = self._floats()
        got = fc["tpow"].get(m)
        if got is not None:
            return got
        if fc["nil"]:
            out = np.zeros((self.dim, self.dim))
            for j, nj in enumerate(fc["nil"]):
                c = _float_binom(m, j)
                if c:
                    out += c * nj
        else:
            out = np.linalg.matrix_power(fc["T"], m)
        fc["tpow"][m] = out
        return out

    def apply_float(self, g: GroupElement, vec):
        """Float64 matrix of g applied to a complex vector."""
        import numpy as np

        fc = self._floats()
        word = word_decompose(g)
        out = np.asarray(vec, dtype=complex)
        for e in reversed(word.exponents):
            out = self._float_t_power(e) @ out
            out = fc["S"] @ out
        out = self._float_t_power(word.m) @ out
        if word.sign == -1:
            out = fc["S"] @ (fc["S"] @ out)
        return out

    def evaluate_float(self, g: GroupElement):
        import numpy as np

        fc = self._floats()
        word = word_decompose(g)
        out = self._float_t_power(word.m)
        for e in word.exponents:
            out = out @ fc["S"] @ self._float_t_power(e)
        if word.sign == -1:
            out = fc["S"] @ fc["S"] @ out
        return out

    # -- serialization -------------------------------------------------------

    def to_json(self):
        return {
            "dim": self.dim,
            "matS": [[rat_str(x) for x in row] for row in self.matS]
            if self.matS
            else None,
            "matT": [[rat_str(x) for x in row] for row in self.matT]
            if self.matT
            else None,
            "tree": tree_name(self.tree),
        }


def _float_binom(m, j):
    out = 1.0
    for t in range(j):
        out *= (m - t) / (t + 1)
    return out


# ---------------------------------------------------------------------------
# constructors


def trivial(group=SL2Z) -> ArithType:
    if group == SL2Z:
        one = [[ONE]]
        return ArithType(1, SL2Z, ("triv",), one, one, check=False)
    return ArithType(1, group, ("triv",), evaluator=lambda g: [[ONE]])


def sym_power(d: int) -> ArithType:
    from .modgroup import S, T

    if d < 0:
        raise DimensionMismatch("symmetric power degree must be >= 0")
    return ArithType(
        d + 1, SL2Z, ("sym", d), sym_matrix(d, S), sym_matrix(d, T), check=False
    )


def dual_type(t: ArithType) -> ArithType:
    """Dual via inverse-transpose generator matrices."""
    if not t.is_sl2z():
        return ArithType(
            t.dim,
            t.group,
            ("dual", t.tree),
            evaluator=lambda g: exact.mat_transpose(exact.mat_inv(t.evaluate(g))),
        )
    matS = exact.mat_transpose(exact.mat_inv(t.matS))
    matT = exact.mat_transpose(exact.mat_inv(t.matT))
    return ArithType(t.dim, SL2Z, ("dual", t.tree), matS, matT)


def tensor_type(t1: ArithType, t2: ArithType) -> ArithType:
    if t1.group != t2.group:
        raise GroupMismatch("tensor factors live over different groups")
    tree = ("tensor", t1.tree, t2.tree)
    if not t1.is_sl2z():
        return ArithType(
            t1.dim * t2.dim,
            t1.group,
            tree,
            evaluator=lambda g: exact.kron(t1.evaluate(g), t2.evaluate(g)),
        )
    return ArithType(
        t1.dim * t2.dim,
        SL2Z,
        tree,
        exact.kron(t1.matS, t2.matS),
        exact.kron(t1.matT, t2.matT),
    )


def direct_sum(t1: ArithType, t2: ArithType) -> ArithType:
    if t1.group != t2.group:
        raise GroupMismatch("summands live over different groups")
    tree = ("sum", t1.tree, t2.tree)

    def block(a, b):
        n, m = len(a), len(b)
        out = exact.mat_zero(n + m, n + m)
        for i in range(n):
            for j in range(n):
                out[i][j] = a[i][j]
        for i in range(m):
            for j in range(m):
                out[n + i][n + j] = b[i][j]
        return out

    if not t1.is_sl2z():
        return ArithType(
            t1.dim + t2.dim,
            t1.group,
            tree,
            evaluator=lambda g: block(t1.evaluate(g), t2.evaluate(g)),
        )
    return ArithType(
        t1.dim + t2.dim, SL2Z, tree, block(t1.matS, t2.matS), block(t1.matT, t2.matT)
    )


def induced(subgroup: Subgroup, inner: ArithType) -> ArithType:
    """Induction to SL2(Z) from a subgroup type.

    With coset representatives beta_i (identity first) and beta gamma =
    I_beta(gamma) * overline(beta gamma), the block of columns at coset i maps
    to rows at coset j = overline(beta_i gamma^{-1}) with matrix
    inner(I_{beta_i}(gamma^{-1})^{-1}); coordinates are indexed coset-major.
    """
    if inner.group == SL2Z:
        raise GroupMismatch("induction expects a subgroup type")
    if inner.group != subgroup:
        raise GroupMismatch("inner type lives over a different subgroup")
    table = coset_table(subgroup)
    reps = table.reps
    n = len(reps)
    dim = inner.dim

    def ind_matrix(g: GroupElement):
        ginv = g.inv()
        out = exact.mat_zero(n * dim, n * dim)
        for i, beta in enumerate(reps):
            x = beta * ginv
            h, j = table.decompose(x)  # x = h * reps[j]
            blk = inner.evaluate(h.inv())
            for r in range(dim):
                for c in range(dim):
                    out[j * dim + r][i * dim + c] = blk[r][c]
        return out

    from .modgroup import S, T

    tree = ("ind", (subgroup.kind, subgroup.level), inner.tree)
    return ArithType(n * dim, SL2Z, tree, ind_matrix(S), ind_matrix(T))


def from_matrices(matS, matT) -> ArithType:
    """A type from raw matrices: evaluation and relation checks only.

    Structural invariants need a construction tree and are refused.
    """
    return ArithType(len(matS), SL2Z, ("raw",), matS, matT)


# ---------------------------------------------------------------------------
# structural invariants


class TypeInvariants:
    def __init__(self, depth, shift, pxs, is_vra):
        self.depth = depth
        self.shift = shift
        self.pxs = pxs
        self.is_vra = is_vra

    def to_json(self):
        return {
            "depth": self.depth,
            "shift": self.shift,
            "pxs": self.pxs,
            "is_vra": self.is_vra,
        }

    def __repr__(self):
        return f"TypeInvariants(depth={self.depth}, shift={self.shift}, pxs={self.pxs}, is_vra={self.is_vra})"


def _levels(tree):
    """(socle level shifts bottom-up, non-parabolic step count)."""
    kind = tree[0]
    if kind == "triv":
        return [0], 0
    if kind == "sym":
        return [tree[1]], 0
    if kind == "dual":
        return _levels(tree[1])
    if kind == "sum":
        l1, p1 = _levels(tree[1])
        l2, p2 = _levels(tree[2])
        n = max(len(l1), len(l2))
        l1 += [0] * (n - len(l1))
        l2 += [0] * (n - len(l2))
        return [max(a, b) for a, b in zip(l1, l2)], p1 + p2
    if kind == "tensor":
        l1, p1 = _levels(tree[1])
        l2, p2 = _levels(tree[2])
        # additive bounds, exactly the shape entering the norm estimates
        n = len(l1) + len(l2) - 1
        out = [0] * n
        out[0] = l1[0] + l2[0]
        for i in range(1, n):
            out[i] = max(
                (l1[a] + l2[i - a]) if a < len(l1) and i - a < len(l2) else 0
                for a in range(i + 1)
            )
        return out, p1 + p2
    if kind == "ind":
        return _levels(tree[2])
    if kind in ("ext", "uext"):
        sub_tree, quot_tree = tree[1], tree[2]
        parabolic = tree[3] if kind == "ext" else tree[3]
        ls, ps = _levels(sub_tree)
        lq, pq = _levels(quot_tree)
        step = 0 if parabolic else 1
        return ls + lq, ps + pq + step
    if kind == "horder":
        d = tree[1]
        if len(tree) > 3 and tree[3] == 0:
            return [0], 0
        return [0] * (d + 1), d
    raise UnsupportedTree(f"no structural invariants for tree node {kind!r}")


def type_invariants(t: ArithType) -> TypeInvariants:
    if t.tree is None or t.tree[0] == "raw":
        raise UnsupportedTree(
            "type was loaded from raw matrices; invariants need a construction tree"
        )
    levels, pxs = _levels(t.tree)
    return TypeInvariants(len(levels) - 1, sum(levels), pxs, True)


def tree_name(tree) -> str:
    """Construction tree rendered in the type-expression DSL."""
    if tree is None:
        return "raw"
    kind = tree[0]
    if kind == "triv":
        return "triv"
    if kind == "raw":
        return "raw"
    if kind == "sym":
        return f"sym({tree[1]})"
    if kind == "dual":
        return f"dual({tree_name(tree[1])})"
    if kind == "tensor":
        return f"tensor({tree_name(tree[1])},{tree_name(tree[2])})"
    if kind == "sum":
        return f"sum({tree_name(tree[1])},{tree_name(tree[2])})"
    if kind == "ind":
        g = tree[1]
        return f"ind({g[0]}({g[1]}),{tree_name(tree[2])})"
    if kind == "ext":
        return f"ext({tree_name(tree[1])},{tree_name(tree[2])},{tree[4]})"
    if kind == "uext":
        sub, quot, parabolic, variant = tree[1], tree[2], tree[3], tree[4]
        stem = "uext" if variant == "universal" else "couext"
        suffix = "_par" if parabolic else ""
        return f"{stem}{suffix}({tree_name(sub)},{tree_name(quot)})"
    if kind == "horder":
        return f"horder({tree[1]})"
    return repr(tree)
