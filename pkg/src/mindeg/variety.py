"""Embedded-variety models: toric varieties of lattice polytopes, Veronese
and Segre-Veronese embeddings, cones over the Veronese surface, and rational
normal scrolls. Each model carries a basis of the degree-1 part, the quadric
relations, the dimension of the degree-2 part, and the quadratic deficiency
epsilon = C(e+1,2) - dim I_2 whose vanishing characterizes minimal degree.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InconsistentModel, NotFullDimensional
from .numerics import exact_rank, rref
from .polytope import (LatticePolytope, is_k_normal, lattice_points,
                       normalized_volume, product_polytope, simplex)


def _pair_index_map(nvars):
    """Canonical order of monomials x_i x_j, i <= j: i-major."""
    pairs = [(i, j) for i in range(nvars) for j in range(i, nvars)]
    return pairs, {p: s for s, p in enumerate(pairs)}


class VarietyModel:
    """A nondegenerate variety X in P^n presented by degree-1 coordinates and
    independent quadric relations. r1_basis entries are exponent tuples for
    toric models and label strings for determinantal ones."""

    def __init__(self, name, m, r1_basis, relations=None, toric_sums=None,
                 degree=None, source_polytope=None):
        self.name = name
        self.r1_basis = list(r1_basis)
        self.n = len(self.r1_basis) - 1
        self.m = m
        self.e = self.n - self.m
        if self.e < 0:
            raise InconsistentModel("dim X exceeds ambient dimension")
        self.is_toric = toric_sums is not None
        self._degree = degree
        self._source_polytope = source_polytope
        self._i2_pairs = None
        npairs = math.comb(self.n + 2, 2)
        if self.is_toric:
            self.r2_basis = toric_sums
            self._sum_index = {s: i for i, s in enumerate(toric_sums)}
            self.dim_r2 = len(toric_sums)
            self.i2_count = npairs - self.dim_r2
            self._pair_reduce = None
        else:
            pairs, pair_idx = _pair_index_map(self.n + 1)
            rows = []
            for rel in relations:
                row = [Fraction(0)] * npairs
                for p, c in rel.items():
                    row[pair_idx[p]] += Fraction(c)
                rows.append(row)
            reduced, pivots = rref(rows)
            if len(reduced) != len(rows):
                # drop dependent relations, keeping an independent set
                kept = []
                for rel in relations:
                    row = [Fraction(0)] * npairs
                    for p, c in rel.items():
                        row[pair_idx[p]] += Fraction(c)
                    trial = kept + [row]
                    if exact_rank([r[:] for r in trial]) == len(trial):
                        kept.append(row)
                rows = kept
                reduced, pivots = rref(rows)
            self.i2_count = len(reduced)
            self.dim_r2 = npairs - self.i2_count
            pivset = set(pivots)
            free_pairs = [pairs[s] for s in range(npairs) if s not in pivset]
            self.r2_basis = free_pairs
            free_index = {pairs[s]: k for k, s in
                          enumerate(s for s in range(npairs) if s not in pivset)}
            # pivot monomial = -(tail of its reduced row) over free monomials
            reduce_map = {}
            for row, piv in zip(reduced, pivots):
                vec = {}
                for s in range(npairs):
                    if s == piv or row[s] == 0:
                        continue
                    vec[free_index[pairs[s]]] = -row[s]
                reduce_map[pairs[piv]] = vec
            self._pair_reduce = reduce_map
            self._free_index = free_index
            self._i2_rows = rows
        expected = npairs - self.i2_count
        if self.dim_r2 != expected:
            raise InconsistentModel("dim R_2 does not match relation count")

    # -- canonical representation of x_i x_j over the R_2 basis --

    def pair_vector(self, i, j):
        """Sparse map basis_index -> Fraction representing x_i x_j in R_2."""
        if i > j:
            i, j = j, i
        if self.is_toric:
            s = tuple(a + b for a, b in zip(self.r1_basis[i], self.r1_basis[j]))
            return {self._sum_index[s]: Fraction(1)}
        if (i, j) in self._pair_reduce:
            return dict(self._pair_reduce[(i, j)])
        return {self._free_index[(i, j)]: Fraction(1)}

    def i2_pairs(self):
        """Toric quadric relations as pairs of monomial pairs: each entry
        ((i,j),(k,l)) stands for the binomial x_i x_j - x_k x_l."""
        if not self.is_toric:
            raise InconsistentModel("binomial relations exist only for toric models")
        if self._i2_pairs is None:
            groups = {}
            for i in range(self.n + 1):
                for j in range(i, self.n + 1):
                    s = tuple(a + b for a, b in
                              zip(self.r1_basis[i], self.r1_basis[j]))
                    groups.setdefault(s, []).append((i, j))
            rels = []
            for s in sorted(groups):
                members = sorted(groups[s])
                rels.extend((members[0], other) for other in members[1:])
            if len(rels) != self.i2_count:
                raise InconsistentModel("binomial count mismatch")
            self._i2_pairs = rels
        return self._i2_pairs

    def i2_rows(self):
        """Relations as exact vectors over the x_i x_j coordinates (i <= j,
        i-major order); used for rank checks and the Gram-map kernel."""
        npairs = math.comb(self.n + 2, 2)
        _, pair_idx = _pair_index_map(self.n + 1)
        if self.is_toric:
            rows = []
            for a, b in self.i2_pairs():
                row = [Fraction(0)] * npairs
                row[pair_idx[a]] = Fraction(1)
                row[pair_idx[b]] = Fraction(-1)
                rows.append(row)
            return rows
        return [r[:] for r in self._i2_rows]

    @property
    def degree(self):
        """deg X when derivable: closed form for determinantal families,
        normalized volume for toric models from a 2-normal polytope."""
        if self._degree is not None:
            return self._degree
        if self.is_toric and self._source_polytope is not None:
            Q = self._source_polytope
            if is_k_normal(Q, 2)[0]:
                self._degree = normalized_volume(Q)
        return self._degree

    def __repr__(self):
        return "VarietyModel(%s: n=%d, m=%d, e=%d, dim R2=%d, |I2|=%d)" % (
            self.name, self.n, self.m, self.e, self.dim_r2, self.i2_count)

    def to_json(self):
        """Serialized model. Toric models are reconstructed from r1_basis
        alone, so their (possibly huge) relation list is included only when
        small enough to be worth reading."""
        if self.is_toric:
            r1 = [list(u) for u in self.r1_basis]
        else:
            r1 = list(self.r1_basis)
        out = {"name": self.name, "n": self.n, "m": self.m, "r1_basis": r1}
        if self.is_toric and self.i2_count > 2000:
            return out
        size = self.n + 1
        _, pair_idx = _pair_index_map(size)
        mats = []
        for row in self.i2_rows():
            mat = [[Fraction(0)] * size for _ in range(size)]
            for (i, j), s in pair_idx.items():
                c = row[s]
                if c == 0:
                    continue
                if i == j:
                    mat[i][i] = c
                else:
                    mat[i][j] = c / 2
                    mat[j][i] = c / 2
            mats.append([str(mat[i][j]) for i in range(size) for j in range(size)])
        out["i2_basis"] = mats
        return out

    @classmethod
    def from_json(cls, obj):
        r1 = obj["r1_basis"]
        if r1 and isinstance(r1[0], list):
            exps = [tuple(int(c) for c in u) for u in r1]
            return toric_model_from_points(obj.get("name", "toric"), exps,
                                           int(obj["m"]))
        nvars = len(r1)
        rels = []
        for flat in obj["i2_basis"]:
            rel = {}
            for i in range(nvars):
                for j in range(i, nvars):
                    a = Fraction(flat[i * nvars + j])
                    if i != j:
                        a = a + Fraction(flat[j * nvars + i])
                    if a != 0:
                        rel[(i, j)] = rel.get((i, j), Fraction(0)) + a
            rels.append({k: v for k, v in rel.items() if v != 0})
        return cls(obj.get("name", "model"), int(obj["m"]), list(r1),
                   relations=rels)


@dataclass
class QuadraticForm:
    """Element of R_2 over the model's canonical basis, exact coefficients."""

    model: VarietyModel
    coefficients: list

    def __post_init__(self):
        if len(self.coefficients) != self.model.dim_r2:
            raise InconsistentModel("coefficient count must equal dim R_2")
        self.coefficients = [c if isinstance(c, Fraction) else Fraction(c)
                             for c in self.coefficients]

    def to_json(self):
        return {"model": self.model.name,
                "coefficients": [str(c) for c in self.coefficients]}


def toric_model_from_points(name, exponents, m):
    pts = sorted(set(exponents))
    arr = np.array(pts, dtype=np.int64)
    sums = (arr[:, None, :] + arr[None, :, :]).reshape(-1, arr.shape[1])
    uniq = np.unique(sums, axis=0)
    toric_sums = [tuple(int(c) for c in row) for row in uniq]
    return VarietyModel(name, m, pts, toric_sums=toric_sums)


def toric_model(Q: LatticePolytope) -> VarietyModel:
    """Projective toric variety of the polytope: coordinates indexed by
    Q ∩ M, quadric relations the degree-2 binomials of the monoid ring."""
    pts = sorted(lattice_points(Q, 1))
    if Q.dim < Q.ambient_rank:
        exps = [Q._proj(p) for p in pts]
    else:
        exps = pts
    model = toric_model_from_points("toric", exps, Q.dim)
    model._source_polytope = Q
    return model


def veronese_model(n: int, d: int) -> VarietyModel:
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    model = toric_model(simplex(n, d))
    model.name = "veronese(%d,%d)" % (n, d)
    return model


def segre_veronese_model(dims, degrees) -> VarietyModel:
    dims = [int(x) for x in dims]
    degrees = [int(x) for x in degrees]
    if len(dims) != len(degrees) or len(dims) < 2:
        raise ValueError("need matching factor lists of length >= 2")
    if any(x < 1 for x in dims) or any(x < 1 for x in degrees):
        raise ValueError("factor dimensions and degrees must be >= 1")
    Q = simplex(dims[0], degrees[0])
    for ni, di in zip(dims[1:], degrees[1:]):
        Q = product_polytope(Q, simplex(ni, di))
    model = toric_model(Q)
    model.name = "segre_veronese(%s;%s)" % (
        ",".join(map(str, dims)), ",".join(map(str, degrees)))
    return model


def veronese_cone_model(n: int) -> VarietyModel:
    """Cone over the Veronese surface in P^5, cut out by the 2x2 minors of
    the generic symmetric 3x3 matrix in x_0..x_5; x_6..x_n are cone
    variables."""
    if n < 5:
        raise ValueError("need n >= 5")
    sym = [[0, 1, 2], [1, 3, 4], [2, 4, 5]]
    rels = []
    for r1_, r2_ in itertools.combinations(range(3), 2):
        for c1, c2 in itertools.combinations(range(3), 2):
            rel = {}
            for (a, b), sign in (((sym[r1_][c1], sym[r2_][c2]), 1),
                                 ((sym[r1_][c2], sym[r2_][c1]), -1)):
                key = (min(a, b), max(a, b))
                rel[key] = rel.get(key, Fraction(0)) + sign
            rel = {k: v for k, v in rel.items() if v != 0}
            if rel:
                rels.append(rel)
    labels = ["x%d" % i for i in range(n + 1)]
    return VarietyModel("veronese_cone(%d)" % n, n - 3, labels,
                        relations=rels, degree=4)


def scroll_model(d) -> VarietyModel:
    """Rational normal scroll of segment degrees d (ascending, last > 0):
    relations are the 2x2 minors of the two-row block matrix whose block i
    stacks x_{i,0..d_i-1} over x_{i,1..d_i}."""
    d = [int(x) for x in d]
    if not d or any(d[i] > d[i + 1] for i in range(len(d) - 1)):
        raise ValueError("degrees must be sorted ascending")
    if d[-1] < 1 or any(x < 0 for x in d):
        raise ValueError("last degree must be positive, none negative")
    labels = []
    var = {}
    for i, di in enumerate(d):
        for j in range(di + 1):
            var[(i, j)] = len(labels)
            labels.append("x%d_%d" % (i, j))
    columns = [(i, j) for i, di in enumerate(d) for j in range(di)]
    rels = []
    for (i1, j1), (i2, j2) in itertools.combinations(columns, 2):
        rel = {}
        for (a, b), sign in (((var[(i1, j1)], var[(i2, j2 + 1)]), 1),
                             ((var[(i1, j1 + 1)], var[(i2, j2)]), -1)):
            key = (min(a, b), max(a, b))
            rel[key] = rel.get(key, Fraction(0)) + sign
        rel = {k: v for k, v in rel.items() if v != 0}
        if rel:
            rels.append(rel)
    return VarietyModel("scroll(%s)" % ",".join(map(str, d)), len(d), labels,
                        relations=rels, degree=sum(d))


def epsilon(model: VarietyModel) -> int:
    """Quadratic deficiency: C(e+1,2) - dim I_2, cross-checked against
    dim R_2 - (m+1)(n+1) + C(m+1,2). Zero iff deg X = 1 + codim X."""
    a = math.comb(model.e + 1, 2) - model.i2_count
    b = model.dim_r2 - (model.m + 1) * (model.n + 1) + math.comb(model.m + 1, 2)
    if a != b:
        raise InconsistentModel(
            "deficiency formulas disagree (%d vs %d); malformed relations" % (a, b))
    if a < 0:
        raise InconsistentModel("negative deficiency; relations overdetermined")
    return a


def is_minimal_degree(model: VarietyModel) -> bool:
    return epsilon(model) == 0


def veronese_reembedding(Q: LatticePolytope, d: int) -> LatticePolytope:
    """The dilate dQ, whose toric model captures degree-2d forms on X_Q."""
    if d < 1:
        raise ValueError("d must be positive")
    return LatticePolytope(Q.ambient_rank,
                           [tuple(d * c for c in v) for v in Q.vertices])
