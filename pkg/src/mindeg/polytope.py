"""Lattice polytopes and their positivity-relevant invariants: Ehrhart
h*-polynomials, k-normality, polytope degree, sparse AM-GM witnesses,
difference-sublattice density, and classification of the minimal cases.

Conventions: a lattice point is a tuple of ints; a polytope is given by its
vertex list in an ambient lattice Z^ambient_rank and may sit in a proper
affine sublattice; operations that need full dimension first project to
exact coordinates on the saturated difference lattice of the affine span.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, NotFullDimensional
from .numerics import (Rational, exact_rank, integer_diagonalize,
                       lattice_index, nullspace, rref, solve_exact)

DENSE = "Dense"
NOT_DENSE = "NotDense"

# chunk bound for numpy box scans, keeps peak memory modest
_SCAN_CHUNK = 1 << 21


def _as_point(p):
    t = tuple(int(c) for c in p)
    return t


class LatticePolytope:
    """Convex hull of integer points. The stored vertex list is reduced to
    the extreme points and sorted, so equal polytopes compare equal."""

    def __init__(self, ambient_rank: int, points, _vertices_trusted=False):
        if ambient_rank <= 0:
            raise ValueError("ambient rank must be positive")
        pts = []
        for p in points:
            q = _as_point(p)
            if len(q) != ambient_rank:
                raise DimensionMismatch(
                    "point %r does not have length %d" % (p, ambient_rank))
            pts.append(q)
        pts = sorted(set(pts))
        if not pts:
            raise ValueError("need at least one point")
        self.ambient_rank = ambient_rank
        self._base = pts[0]
        diffs = [[c - b for c, b in zip(p, self._base)] for p in pts[1:]]
        if diffs:
            invariants, W, W_inv = integer_diagonalize(diffs)
            self.dim = len(invariants)
            self._W = W
            self._sat_basis = W_inv[:self.dim]
        else:
            self.dim = 0
            self._W = [[1 if i == j else 0 for j in range(ambient_rank)]
                       for i in range(ambient_rank)]
            self._sat_basis = []
        # trusted callers (e.g. products of vertex sets) pass points already
        # known extreme, skipping the exact supporting-hyperplane reduction
        self.vertices = tuple(pts) if _vertices_trusted else self._extreme_points(pts)
        self._facets = None
        self._point_cache = {}
        self._simplices = None

    # -- exact chart between ambient coords and Z^dim on the affine span --

    def _proj(self, p, k: int = 1):
        """Coordinates of p - k*base on the saturated difference lattice,
        or None if p is not on (the k-dilated) affine lattice span."""
        d = [c - k * b for c, b in zip(p, self._base)]
        full = [sum(d[i] * self._W[i][j] for i in range(self.ambient_rank))
                for j in range(self.ambient_rank)]
        if any(full[j] != 0 for j in range(self.dim, self.ambient_rank)):
            return None
        return tuple(full[:self.dim])

    def _lift(self, x, k: int = 1):
        out = [k * b for b in self._base]
        for i, xi in enumerate(x):
            for j in range(self.ambient_rank):
                out[j] += xi * self._sat_basis[i][j]
        return tuple(out)

    @property
    def proj_vertices(self):
        return [self._proj(v) for v in self.vertices]

    def _extreme_points(self, pts):
        if self.dim == 0:
            return tuple(pts[:1])
        proj = [self._proj(p) for p in pts]
        planes = _supporting_hyperplanes(proj, self.dim)
        out = []
        for p, x in zip(pts, proj):
            active = [a for a, b in planes
                      if sum(ai * xi for ai, xi in zip(a, x)) == b]
            if active and exact_rank(active) == self.dim:
                out.append(p)
        return tuple(sorted(out))

    def facets(self):
        """Supporting integer inequalities a.x <= b in chart coordinates.
        Includes every facet; may include redundant supporting hyperplanes,
        which is harmless for membership and strict-interior tests."""
        if self._facets is None:
            if self.dim == 0:
                self._facets = []
            else:
                self._facets = _supporting_hyperplanes(self.proj_vertices, self.dim)
        return self._facets

    def __eq__(self, other):
        return (isinstance(other, LatticePolytope)
                and self.ambient_rank == other.ambient_rank
                and self.vertices == other.vertices)

    def __hash__(self):
        return hash((self.ambient_rank, self.vertices))

    def __repr__(self):
        return "LatticePolytope(rank=%d, dim=%d, %d vertices)" % (
            self.ambient_rank, self.dim, len(self.vertices))

    def to_json(self) -> dict:
        return {"ambient_rank": self.ambient_rank,
                "vertices": [list(v) for v in self.vertices]}

    @classmethod
    def from_json(cls, obj) -> "LatticePolytope":
        if not isinstance(obj, dict) or "ambient_rank" not in obj or "vertices" not in obj:
            raise ValueError("polytope JSON needs ambient_rank and vertices")
        return cls(int(obj["ambient_rank"]), obj["vertices"])


def _supporting_hyperplanes(proj_points, m):
    """All hyperplanes spanned by m-subsets of the points that support the
    hull, as primitive integer (normal, rhs) pairs with a.x <= b."""
    planes = set()
    pts = list(proj_points)
    for subset in itertools.combinations(range(len(pts)), m):
        base = pts[subset[0]]
        diffs = [[pts[i][j] - base[j] for j in range(m)] for i in subset[1:]]
        ker = nullspace(diffs, m)
        if len(ker) != 1:
            continue
        denom = 1
        for e in ker[0]:
            denom = denom * e.denominator // math.gcd(denom, e.denominator)
        a = [int(e * denom) for e in ker[0]]
        g = 0
        for e in a:
            g = math.gcd(g, abs(e))
        a = [e // g for e in a]
        b = sum(ai * xi for ai, xi in zip(a, base))
        lo = hi = False
        for p in pts:
            s = sum(ai * xi for ai, xi in zip(a, p))
            if s > b:
                hi = True
            elif s < b:
                lo = True
        if hi and lo:
            continue
        if hi:
            a = [-e for e in a]
            b = -b
        planes.add((tuple(a), b))
    return sorted(planes)


def _box_candidates(lo, hi):
    """Integer grid of the box [lo, hi], yielded as int64 arrays in chunks."""
    ranges = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo, hi)]
    sizes = [len(r) for r in ranges]
    total = 1
    for s in sizes:
        total *= s
    if total == 0:
        return
    m = len(ranges)
    if total <= _SCAN_CHUNK:
        grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, m)
        yield grid
        return
    # chunk along the first axis
    rest = ranges[1:]
    sub = np.stack(np.meshgrid(*rest, indexing="ij"), axis=-1).reshape(-1, m - 1)
    step = max(1, _SCAN_CHUNK // max(1, sub.shape[0]))
    first = ranges[0]
    for s in range(0, len(first), step):
        block = first[s:s + step]
        reps = np.repeat(block, sub.shape[0])
        tiles = np.tile(sub, (len(block), 1))
        yield np.column_stack([reps, tiles])


def _scan_dilate(Q: LatticePolytope, k: int, strict: bool):
    """Chart coordinates of the lattice points of kQ (strict: interior)."""
    verts = np.array(Q.proj_vertices, dtype=np.int64) * k
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    planes = Q.facets()
    A = np.array([a for a, _ in planes], dtype=np.int64)
    b = np.array([bb for _, bb in planes], dtype=np.int64) * k
    found = []
    for grid in _box_candidates(lo, hi):
        vals = grid @ A.T
        mask = (vals < b) if strict else (vals <= b)
        keep = grid[mask.all(axis=1)]
        if len(keep):
            found.append(keep)
    if not found:
        return []
    allpts = np.concatenate(found, axis=0)
    return [tuple(int(c) for c in row) for row in allpts]


def lattice_points(Q: LatticePolytope, k: int):
    """The set (kQ) ∩ M in ambient coordinates; k = 0 gives {origin}."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    cached = Q._point_cache.get(k)
    if cached is not None:
        return set(cached)
    if k == 0:
        result = {(0,) * Q.ambient_rank}
    elif Q.dim == 0:
        result = {tuple(k * c for c in Q.vertices[0])}
    else:
        result = {Q._lift(x, k) for x in _scan_dilate(Q, k, strict=False)}
    Q._point_cache[k] = frozenset(result)
    return result


def interior_lattice_point_count(Q: LatticePolytope, k: int) -> int:
    """Number of lattice points strictly inside kQ (relative interior)."""
    if k <= 0:
        raise ValueError("k must be positive")
    if Q.dim == 0:
        return 1
    return len(_scan_dilate(Q, k, strict=True))


@dataclass(frozen=True)
class HStar:
    """Coefficient vector h*_0 .. h*_m of the Ehrhart series numerator."""

    coefficients: tuple

    def __post_init__(self):
        if not self.coefficients or self.coefficients[0] != 1:
            raise ValueError("h*_0 must be 1")
        if any(c < 0 for c in self.coefficients):
            raise ValueError("h* coefficients must be nonnegative")

    @property
    def degree(self) -> int:
        d = 0
        for j, c in enumerate(self.coefficients):
            if c != 0:
                d = j
        return d

    @property
    def h2(self) -> int:
        return self.coefficients[2] if len(self.coefficients) > 2 else 0

    def sum(self) -> int:
        return sum(self.coefficients)

    def to_json(self):
        return {"coefficients": list(self.coefficients)}


def h_star(Q: LatticePolytope) -> HStar:
    """h*_j = sum_{i<=j} (-1)^i C(m+1, i) L(j-i), with L(k) = |(kQ) ∩ M|.

    Lower-dimensional input is projected to exact full-dimensional
    coordinates on its affine lattice span first (the chart does this)."""
    m = Q.dim
    L = [len(lattice_points(Q, k)) for k in range(m + 1)]
    coeffs = []
    for j in range(m + 1):
        v = sum((-1) ** i * math.comb(m + 1, i) * L[j - i] for i in range(j + 1))
        coeffs.append(v)
    if coeffs[0] != 1 or any(c < 0 for c in coeffs):
        raise NotFullDimensional("Ehrhart counts are inconsistent; chart failed")
    return HStar(tuple(coeffs))


def polytope_degree(Q: LatticePolytope) -> int:
    """Smallest j >= 0 such that kQ has no interior lattice point for all
    1 <= k <= m - j."""
    m = Q.dim
    empty_up_to = 0
    for k in range(1, m + 1):
        if interior_lattice_point_count(Q, k) == 0:
            empty_up_to = k
        else:
            break
    return m - empty_up_to


def is_k_normal(Q: LatticePolytope, k: int):
    """True iff every point of (kQ) ∩ M is a sum of k points of Q ∩ M.
    On failure also returns the lex-smallest unreachable point."""
    if k < 1:
        raise ValueError("k must be at least 1")
    pts1 = sorted(lattice_points(Q, 1))
    target = lattice_points(Q, k)
    reach = _iterated_sumset(pts1, k)
    missing = target - reach
    if not missing:
        return True, None
    return False, min(missing)


def _iterated_sumset(pts1, k):
    base = np.array(pts1, dtype=np.int64)
    acc = base
    for _ in range(k - 1):
        if len(acc) * len(base) <= 4_000_000:
            sums = (acc[:, None, :] + base[None, :, :]).reshape(-1, base.shape[1])
            acc = np.unique(sums, axis=0)
        else:
            blocks = []
            step = max(1, 4_000_000 // len(base))
            for s in range(0, len(acc), step):
                part = (acc[s:s + step, None, :] + base[None, :, :]).reshape(-1, base.shape[1])
                blocks.append(np.unique(part, axis=0))
            acc = np.unique(np.concatenate(blocks, axis=0), axis=0)
    return {tuple(int(c) for c in row) for row in acc}


@dataclass
class SparsePolynomial:
    """Laurent polynomial as exponent -> coefficient, no zero coefficients."""

    terms: dict

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            c = c if isinstance(c, Fraction) else Fraction(c)
            if c != 0:
                clean[_as_point(e)] = c
        self.terms = clean

    def newton_polytope(self) -> LatticePolytope:
        pts = list(self.terms)
        return LatticePolytope(len(pts[0]), pts)

    def to_json(self):
        items = sorted(self.terms.items())
        return {"terms": [{"exp": list(e),
                           "num": str(c.numerator),
                           "den": str(c.denominator)} for e, c in items]}

    @classmethod
    def from_json(cls, obj) -> "SparsePolynomial":
        terms = {}
        for t in obj["terms"]:
            e = tuple(int(c) for c in t["exp"])
            terms[e] = Fraction(int(t["num"]), int(t["den"]))
        return cls(terms)

    def evaluate(self, z) -> Fraction:
        """Exact evaluation at a rational torus point (all coords nonzero)."""
        total = Fraction(0)
        for e, c in self.terms.items():
            v = Fraction(1)
            for zi, ei in zip(z, e):
                v *= Fraction(zi) ** ei
            total += c * v
        return total


def amgm_witness(Q: LatticePolytope):
    """For a non-2-normal Q: f = sum r_i z^(2 v_i) - (sum r_i) z^u with u the
    lex-smallest point of (2Q) ∩ M that is not a sum of two points of Q ∩ M,
    and r the cleared denominators of the sparsest exact convex combination
    u = sum c_i (2 v_i). Nonnegative on the real torus by weighted AM-GM.
    Returns None when Q is 2-normal."""
    ok, u = is_k_normal(Q, 2)
    if ok:
        return None
    doubled = [tuple(2 * c for c in v) for v in Q.vertices]
    n = Q.ambient_rank
    m = Q.dim
    combo = None
    for size in range(1, m + 2):
        for subset in itertools.combinations(range(len(doubled)), size):
            cols = [doubled[i] for i in subset]
            rows = [[Fraction(cols[j][i]) for j in range(size)] for i in range(n)]
            rows.append([Fraction(1)] * size)
            if exact_rank([r[:] for r in rows]) != size:
                continue  # affinely dependent; a smaller support exists
            rhs = [Fraction(c) for c in u] + [Fraction(1)]
            sol = solve_exact(rows, rhs)
            if sol is None or any(c < 0 for c in sol):
                continue
            combo = (subset, sol)
            break
        if combo:
            break
    if combo is None:
        raise ValueError("no convex combination found; u outside 2Q?")
    subset, sol = combo
    lcm = 1
    for c in sol:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    r = [int(c * lcm) for c in sol]
    terms = {}
    for i, ri in zip(subset, r):
        if ri:
            terms[doubled[i]] = terms.get(doubled[i], Fraction(0)) + ri
    terms[u] = -Fraction(sum(r))
    return SparsePolynomial(terms)


def sublattice_index(Q: LatticePolytope) -> int:
    """Index of the lattice generated by {u - u0 : u in Q ∩ M} in the lattice
    of the affine span of Q. Equals |det| of the difference lattice."""
    pts = sorted(lattice_points(Q, 1))
    proj = [Q._proj(p) for p in pts]
    base = proj[0]
    diffs = [[c - b for c, b in zip(p, base)] for p in proj[1:]]
    if Q.dim == 0:
        return 1
    return lattice_index(diffs)


def real_density(Q: LatticePolytope) -> str:
    """Dense iff the sublattice index is odd (parity criterion)."""
    return DENSE if sublattice_index(Q) % 2 == 1 else NOT_DENSE


# ---------------------------------------------------------------------------
# Independent oracle routes (used by --oracle and by the test suite; the
# primary lattice_points path above never calls these).


def triangulate(Q: LatticePolytope):
    """Exact triangulation into lattice simplices (vertex tuples in the
    ambient coordinates); cones each facet avoiding the least vertex."""
    if Q._simplices is None:
        Q._simplices = [tuple(s) for s in _triangulate_rec(Q)]
    return Q._simplices


def _triangulate_rec(Q: LatticePolytope):
    if Q.dim == 0:
        return [[Q.vertices[0]]]
    if len(Q.vertices) == Q.dim + 1:
        return [list(Q.vertices)]
    v0 = Q.vertices[0]
    x0 = Q._proj(v0)
    out = []
    for a, b in Q.facets():
        if sum(ai * xi for ai, xi in zip(a, x0)) == b:
            continue
        face_pts = [v for v in Q.vertices
                    if sum(ai * xi for ai, xi in zip(a, Q._proj(v))) == b]
        if len(face_pts) < Q.dim:
            continue  # supporting hyperplane of a lower-dimensional face
        F = LatticePolytope(Q.ambient_rank, face_pts)
        if F.dim != Q.dim - 1:
            continue
        for simplex in _triangulate_rec(F):
            out.append([v0] + list(simplex))
    return out


def normalized_volume(Q: LatticePolytope) -> int:
    """m! * vol(Q) w.r.t. the lattice of the affine span, via triangulation.
    Independent of the Ehrhart counting route."""
    if Q.dim == 0:
        return 1
    total = 0
    for simplex in triangulate(Q):
        proj = [Q._proj(v) for v in simplex]
        base = proj[0]
        rows = [[c - b for c, b in zip(p, base)] for p in proj[1:]]
        total += abs(_int_det(rows))
    return total


def _int_det(rows):
    # Bareiss would be overkill at these sizes; fraction elimination is exact.
    n = len(rows)
    mat = [[Fraction(e) for e in r] for r in rows]
    det = Fraction(1)
    for c in range(n):
        piv = None
        for i in range(c, n):
            if mat[i][c] != 0:
                piv = i
                break
        if piv is None:
            return 0
        if piv != c:
            mat[c], mat[piv] = mat[piv], mat[c]
            det = -det
        det *= mat[c][c]
        inv = 1 / mat[c][c]
        for i in range(c + 1, n):
            f = mat[i][c] * inv
            if f:
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[c])]
    assert det.denominator == 1
    return int(det)


def contains_point_oracle(Q: LatticePolytope, p, k: int = 1) -> bool:
    """Membership of p in kQ decided via the triangulation route: p lies in
    some k-dilated simplex (exact barycentric coordinates)."""
    x = Q._proj(p, k)
    if x is None:
        return False
    for simplex in triangulate(Q):
        proj = [Q._proj(v) for v in simplex]
        rows = [[Fraction(k * proj[j][i]) for j in range(len(proj))]
                for i in range(Q.dim)]
        rows.append([Fraction(1)] * len(proj))
        rhs = [Fraction(c) for c in x] + [Fraction(1)]
        sol = solve_exact(rows, rhs)
        if sol is not None and all(c >= 0 for c in sol):
            return True
        if sol is None:
            # degenerate simplex coordinates cannot happen: simplices are
            # affinely independent by construction
            continue
    return False


def lattice_point_count_oracle(Q: LatticePolytope, k: int) -> int:
    """Brute-force count of (kQ) ∩ M via the membership oracle."""
    if k == 0:
        return 1
    if Q.dim == 0:
        return 1
    verts = np.array(Q.proj_vertices, dtype=np.int64) * k
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    count = 0
    for grid in _box_candidates(lo, hi):
        for row in grid:
            p = Q._lift(tuple(int(c) for c in row), k)
            if contains_point_oracle(Q, p, k):
                count += 1
    return count


def k_normal_oracle(Q: LatticePolytope, k: int):
    """Brute-force k-normality via combinations-with-replacement sums."""
    pts1 = sorted(lattice_points(Q, 1))
    sums = set()
    for combo in itertools.combinations_with_replacement(pts1, k):
        sums.add(tuple(sum(c) for c in zip(*combo)))
    target = lattice_points(Q, k)
    missing = target - sums
    if not missing:
        return True, None
    return False, min(missing)


# ---------------------------------------------------------------------------
# Classification.

PYRAMID = "PyramidOverTwiceSimplex"
CAYLEY = "CayleySegments"
IMAGE_OF_MODEL = "ImageOfModel"
NOT_MINIMAL = "NotMinimal"


@dataclass
class ClassificationReport:
    h2_zero: bool
    two_normal: bool
    polytope_degree: int
    degree_one: bool
    family: str
    model_map: dict | None
    density: str
    pos_equals_sos: str
    density_criterion: str = "index parity"

    def to_json(self):
        return {
            "h2_zero": self.h2_zero,
            "two_normal": self.two_normal,
            "polytope_degree": self.polytope_degree,
            "degree_one": self.degree_one,
            "family": self.family,
            "model_map": self.model_map,
            "density": self.density,
            "density_criterion": self.density_criterion,
            "pos_equals_sos": self.pos_equals_sos,
        }


def pyramid_over_twice_simplex(m: int) -> LatticePolytope:
    """(m-2)-fold pyramid over conv{(0,0),(2,0),(0,2)}, in Z^m."""
    if m < 2:
        raise ValueError("m must be at least 2")
    verts = [(0,) * m,
             (2,) + (0,) * (m - 1),
             (0, 2) + (0,) * (m - 2)]
    for i in range(2, m):
        e = [0] * m
        e[i] = 1
        verts.append(tuple(e))
    return LatticePolytope(m, verts)


def cayley_polytope_of_segments(degrees) -> LatticePolytope:
    """Cayley polytope of the segments [0, d_i] over the vertices of a
    unimodular (m-1)-simplex, in Z^m (last coordinate is the segment)."""
    d = [int(x) for x in degrees]
    m = len(d)
    if m < 1 or any(x < 0 for x in d) or max(d) < 1:
        raise ValueError("need m >= 1 segment degrees with at least one positive")
    verts = []
    for i in range(m):
        base = [0] * (m - 1)
        if i >= 1:
            base[i - 1] = 1
        verts.append(tuple(base) + (0,))
        verts.append(tuple(base) + (d[i],))
    return LatticePolytope(m, verts)


def _affine_equivalence(target: LatticePolytope, Q: LatticePolytope):
    """An exact affine unimodular map T(x) = A x + t with T(target) = Q,
    verified on all lattice points, or None. Both must be full-dimensional
    of the same dimension in chart coordinates."""
    m = Q.dim
    if target.dim != m or len(target.vertices) != len(Q.vertices):
        return None
    tv = [target._proj(v) for v in target.vertices]
    qv = [Q._proj(v) for v in Q.vertices]
    # fixed affinely independent anchor in the target
    anchor = None
    for subset in itertools.combinations(range(len(tv)), m + 1):
        diffs = [[tv[i][j] - tv[subset[0]][j] for j in range(m)] for i in subset[1:]]
        if exact_rank(diffs) == m:
            anchor = subset
            break
    if anchor is None:
        return None
    t_pts = [tv[i] for i in anchor]
    t_diff = [[p[j] - t_pts[0][j] for j in range(m)] for p in t_pts[1:]]
    t_lats = sorted(target._proj(p) for p in lattice_points(target, 1))
    q_lats = sorted(Q._proj(p) for p in lattice_points(Q, 1))
    if len(t_lats) != len(q_lats):
        return None
    q_set = set(map(tuple, qv))
    for image in itertools.permutations(range(len(qv)), m + 1):
        q_pts = [qv[i] for i in image]
        q_diff = [[p[j] - q_pts[0][j] for j in range(m)] for p in q_pts[1:]]
        # solve A * t_diff_i = q_diff_i  (columns)
        A = _solve_matrix(t_diff, q_diff)
        if A is None:
            continue
        det = _int_det([[A[i][j] for j in range(m)] for i in range(m)])
        if abs(det) != 1:
            continue
        t0 = [q_pts[0][i] - sum(A[i][j] * t_pts[0][j] for j in range(m))
              for i in range(m)]
        if any(x.denominator != 1 for row in A for x in row):
            continue
        if any(x.denominator != 1 for x in t0):
            continue
        Ai = [[int(x) for x in row] for row in A]
        ti = [int(x) for x in t0]

        def apply(p):
            return tuple(sum(Ai[i][j] * p[j] for j in range(m)) + ti[i]
                         for i in range(m))

        if {apply(p) for p in tv} != q_set:
            continue
        if sorted(apply(p) for p in t_lats) != q_lats:
            continue
        return {"matrix": Ai, "translation": ti}
    return None


def _solve_matrix(t_diff, q_diff):
    """A with A * t_diff[i] = q_diff[i] for all i (vectors as rows here)."""
    m = len(t_diff[0])
    if len(t_diff) != m:
        return None
    # transpose systems: rows of t_diff are the input vectors
    rows = [[Fraction(t_diff[i][j]) for j in range(m)] for i in range(m)]
    A = []
    for coord in range(m):
        rhs = [Fraction(q_diff[i][coord]) for i in range(m)]
        sol = solve_exact([r[:] for r in rows], rhs)
        if sol is None:
            return None
        A.append(sol)
    # A rows solve sum_j A[coord][j] * t_diff[i][j] = q_diff[i][coord]
    return A


def classify(Q: LatticePolytope) -> ClassificationReport:
    """Full report: h*_2, 2-normality, degree, family recognition (exact
    affine unimodular equivalence for m <= 4), density, and the
    equality-vs-strict-containment verdict."""
    m = Q.dim
    hs = h_star(Q)
    h2_zero = hs.h2 == 0
    two_normal = is_k_normal(Q, 2)[0]
    pdeg = polytope_degree(Q)
    degree_one = pdeg <= 1
    density = real_density(Q)
    family = NOT_MINIMAL
    model_map = None
    if h2_zero and two_normal:
        family = IMAGE_OF_MODEL
        if m <= 4:
            normal = all(is_k_normal(Q, k)[0] for k in range(2, max(2, m)))
            if normal:
                found = _recognize_family(Q, hs)
                if found is not None:
                    family, model_map = found
    pos = "Equal" if (h2_zero and density == DENSE) else "NotEqual"
    return ClassificationReport(
        h2_zero=h2_zero,
        two_normal=two_normal,
        polytope_degree=pdeg,
        degree_one=degree_one,
        family=family,
        model_map=model_map,
        density=density,
        pos_equals_sos=pos,
    )


def _recognize_family(Q: LatticePolytope, hs: HStar):
    m = Q.dim
    s = hs.sum()
    if m >= 2 and s == 4:
        target = pyramid_over_twice_simplex(m)
        mp = _affine_equivalence(target, Q)
        if mp is not None:
            mp["family"] = PYRAMID
            return PYRAMID, mp
    # Cayley candidates: sorted degree tuples with sum = normalized volume
    for d in _partitions(s, m):
        if max(d) < 1:
            continue
        target = cayley_polytope_of_segments(d)
        mp = _affine_equivalence(target, Q)
        if mp is not None:
            mp["family"] = CAYLEY
            mp["segments"] = list(d)
            return CAYLEY, mp
    return None


def _partitions(total, parts):
    """Nondecreasing tuples of `parts` nonnegative ints summing to total."""
    def rec(remaining, k, minimum):
        if k == 1:
            if remaining >= minimum:
                yield (remaining,)
            return
        for first in range(minimum, remaining // k + 1):
            for rest in rec(remaining - first, k - 1, first):
                yield (first,) + rest
    return list(rec(total, parts, 0))


# ---------------------------------------------------------------------------
# Named polytopes used throughout.


def simplex(m: int, scale: int = 1) -> LatticePolytope:
    verts = [(0,) * m]
    for i in range(m):
        e = [0] * m
        e[i] = scale
        verts.append(tuple(e))
    return LatticePolytope(m, verts)


def segment(a: int, b: int) -> LatticePolytope:
    return LatticePolytope(1, [(a,), (b,)])


def reeve_simplex(q: int) -> LatticePolytope:
    return LatticePolytope(3, [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, q)])


def higashitani_simplex(m: int, k: int) -> LatticePolytope:
    """Simplex conv{0, e_1, .., e_{m-1}, w} with
    w = e_1 + .. + e_{(m-1)/2} + k (e_{(m+1)/2} + .. + e_{m-1}) + (k+1) e_m;
    m odd. Exactly m+1 lattice points; h* = 1 + k t^{(m+1)/2}."""
    if m < 3 or m % 2 == 0:
        raise ValueError("m must be odd and at least 3")
    if k < 1:
        raise ValueError("k must be positive")
    verts = [(0,) * m]
    for i in range(m - 1):
        e = [0] * m
        e[i] = 1
        verts.append(tuple(e))
    half = (m - 1) // 2
    w = [1] * half + [k] * half + [k + 1]
    verts.append(tuple(w))
    return LatticePolytope(m, verts)


def product_polytope(P: LatticePolytope, R: LatticePolytope) -> LatticePolytope:
    # every product of a P-vertex and an R-vertex is extreme in P x R
    verts = [p + r for p in P.vertices for r in R.vertices]
    return LatticePolytope(P.ambient_rank + R.ambient_rank, verts,
                           _vertices_trusted=True)


def polytope_to_json_str(Q: LatticePolytope) -> str:
    return json.dumps(Q.to_json(), sort_keys=True, separators=(",", ":"))
