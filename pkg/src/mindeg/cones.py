"""Sum-of-squares certificates on an embedded variety.

The degree-2 part of the coordinate ring is R_2 = Sym^2(R_1) / I_2. A form
f in R_2 is a sum of squares iff some positive semidefinite Gram matrix G
satisfies sigma(G) = f, where sigma maps a symmetric matrix over R_1 to its
quadratic form in R_2. This module carries the exact Gram map, a float
alternating-projection feasibility solver over it, dual functionals that
certify infeasibility, and the rational separating functionals built from
point configurations on the variety.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import (DegeneratePosition, InconsistentModel, RankAmbiguity)
from .numerics import exact_rank, nullspace, solve_exact, to_float
from .variety import QuadraticForm, VarietyModel, _pair_index_map


class GramSlice:
    """Exact matrix of sigma: rows indexed by the canonical R_2 basis,
    columns by monomial pairs (i <= j, i-major). Surjectivity and the
    vanishing of the quadric relations are verified at construction."""

    def __init__(self, model: VarietyModel):
        self.model = model
        nvars = model.n + 1
        self.pairs, self.pair_index = _pair_index_map(nvars)
        rows = [[Fraction(0)] * len(self.pairs) for _ in range(model.dim_r2)]
        for c, (i, j) in enumerate(self.pairs):
            for s, coeff in model.pair_vector(i, j).items():
                rows[s][c] = coeff
        self.sigma = rows
        if exact_rank([r[:] for r in rows]) != model.dim_r2:
            raise InconsistentModel("Gram map is not surjective onto R_2")
        for rel in model.i2_rows():
            for s in range(model.dim_r2):
                v = sum((rows[s][c] * rel[c] for c in range(len(self.pairs))
                         if rel[c] != 0), Fraction(0))
                if v != 0:
                    raise InconsistentModel(
                        "quadric relation does not lie in the Gram kernel")
        self._a_float = None

    @property
    def kernel_dimension(self) -> int:
        return len(self.pairs) - self.model.dim_r2

    def a_float(self) -> np.ndarray:
        """sigma in svec coordinates: A @ svec(G) equals the coefficient
        vector of sigma(G), because off-diagonal svec entries carry the
        sqrt(2) weight twice."""
        if self._a_float is None:
            A = to_float(self.sigma)
            for c, (i, j) in enumerate(self.pairs):
                if i != j:
                    A[:, c] *= math.sqrt(2.0)
            self._a_float = A
        return self._a_float

    def apply_to_gram(self, G):
        """Exact coefficient vector of sigma(G) for a symmetric rational G."""
        out = [Fraction(0)] * self.model.dim_r2
        for c, (i, j) in enumerate(self.pairs):
            g = G[i][j] if i == j else 2 * G[i][j]
            if g == 0:
                continue
            for s in range(self.model.dim_r2):
                if self.sigma[s][c] != 0:
                    out[s] += self.sigma[s][c] * g
        return out

    def moment_matrix(self, values):
        """sigma-transpose image of a functional: M[i][j] = l(x_i x_j)."""
        nvars = self.model.n + 1
        exact = not any(isinstance(v, float) for v in values)
        if exact:
            M = [[Fraction(0)] * nvars for _ in range(nvars)]
        else:
            M = np.zeros((nvars, nvars))
        for c, (i, j) in enumerate(self.pairs):
            v = sum(values[s] * self.sigma[s][c]
                    for s in range(self.model.dim_r2) if self.sigma[s][c] != 0)
            if exact:
                M[i][j] = M[j][i] = v
            else:
                M[i][j] = M[j][i] = float(v)
        return M


@dataclass
class DualFunctional:
    """Linear functional on R_2 by its values on the canonical basis.
    Exact functionals carry Fractions; float ones are flagged."""

    model: VarietyModel
    values: list
    exact: bool = True

    def __post_init__(self):
        if len(self.values) != self.model.dim_r2:
            raise InconsistentModel("value count must equal dim R_2")
        if self.exact:
            self.values = [v if isinstance(v, Fraction) else Fraction(v)
                           for v in self.values]
        else:
            self.values = [float(v) for v in self.values]

    def apply(self, form: QuadraticForm):
        if self.exact:
            return sum((v * c for v, c in zip(self.values, form.coefficients)),
                       Fraction(0))
        return float(sum(v * float(c)
                         for v, c in zip(self.values, form.coefficients)))

    def moment_matrix(self, gram_slice: GramSlice | None = None):
        gs = gram_slice if gram_slice is not None else GramSlice(self.model)
        return gs.moment_matrix(self.values)

    def to_json(self):
        if self.exact:
            vals = [{"num": str(v.numerator), "den": str(v.denominator)}
                    for v in self.values]
        else:
            vals = list(self.values)
        return {"model": self.model.name, "exact": self.exact, "values": vals}


@dataclass
class SosResult:
    """Outcome of the Gram feasibility run. status is one of Certificate,
    Infeasible, Undetermined; the payload depends on it."""

    status: str
    iterations: int
    min_eig: float
    residual: float
    gram: np.ndarray | None = None
    functional: DualFunctional | None = None
    separation: float | None = None

    def to_json(self):
        return {
            "status": self.status,
            "iterations": self.iterations,
            "min_eig": self.min_eig,
            "residual": self.residual,
            "gram": None if self.gram is None else
                [[float(x) for x in row] for row in self.gram],
            "functional": None if self.functional is None else
                self.functional.to_json(),
            "separation": self.separation,
        }


def _as_slice(model_or_slice) -> GramSlice:
    if isinstance(model_or_slice, GramSlice):
        return model_or_slice
    return GramSlice(model_or_slice)


def sos_check(form: QuadraticForm, gram_slice: GramSlice | None = None,
              budget: int = 100000, chunk: int = 500, feas_tol: float = 1e-7,
              psd_tol: float = 1e-8, sep_tol: float = 1e-7) -> SosResult:
    """Decide whether the form is a sum of squares on the model.

    Alternating projections (Dykstra) between the PSD cone and the affine
    slice {G : sigma(G) = f} in svec coordinates. The affine-side iterate is
    always feasible for sigma, so a near-PSD affine iterate is returned as a
    Certificate. When the slice misses the cone, the gap direction projected
    back through the slice yields a dual functional; it is returned as
    Infeasible only if its verification passes (moment matrix PSD within
    psd_tol and strictly negative value on f within sep_tol, both on the
    original scale). Otherwise the budget runs out: Undetermined.
    """
    gs = _as_slice(gram_slice if gram_slice is not None else form.model)
    if gs.model is not form.model and gs.model.r2_basis != form.model.r2_basis:
        raise InconsistentModel("form and Gram slice use different models")
    nvars = gs.model.n + 1
    A = gs.a_float()
    b = np.array([float(c) for c in form.coefficients])
    scale = max(1.0, float(np.abs(b).max()))
    bs = b / scale
    AAt = A @ A.T
    AAt_inv = np.linalg.inv(AAt)
    Pmat = np.eye(A.shape[1]) - A.T @ (AAt_inv @ A)
    x_part = A.T @ (AAt_inv @ bs)

    def affine_result(status, iterations, x_aff, wmin_orig):
        G = kernels.smat(x_aff, nvars) * scale
        resid = float(np.abs(A @ kernels.svec(G / scale) - bs).max()) * scale
        return SosResult(status, iterations, wmin_orig, resid, gram=G)

    x = x_part.copy()
    p = np.zeros_like(x)
    done = 0
    while True:
        x_aff = Pmat @ x + x_part
        wmin = float(np.linalg.eigvalsh(kernels.smat(x_aff, nvars))[0])
        if wmin * scale >= -psd_tol:
            return affine_result("Certificate", done, x_aff, wmin * scale)
        # separation attempt: gap direction from the affine point to the
        # cone, pushed into the image of the adjoint
        Xa = kernels.smat(x_aff, nvars)
        Pp, _ = kernels.project_psd(Xa)
        gap = kernels.svec(Pp - Xa)
        gnorm = float(np.linalg.norm(gap))
        if gnorm > 0:
            # gap points from the affine iterate into the cone; at the
            # proximal pair smat(gap) is PSD and <gap, b-slice> < 0
            ell = AAt_inv @ (A @ gap)
            Mvec = A.T @ ell
            mnorm = float(np.linalg.norm(Mvec))
            if mnorm > 0:
                ell /= mnorm
                M = kernels.smat(A.T @ ell, nvars)
                m_min = float(np.linalg.eigvalsh(M)[0])
                val = float(ell @ b)
                if m_min >= -psd_tol and val <= -sep_tol:
                    fn = DualFunctional(gs.model, [float(v) for v in ell],
                                        exact=False)
                    return SosResult("Infeasible", done, m_min,
                                     max(0.0, -m_min),
                                     functional=fn, separation=val)
        if done >= budget:
            return affine_result("Undetermined", done, x_aff, wmin * scale)
        step = min(chunk, budget - done)
        x, p, _, ok = kernels.dykstra_chunk(Pmat, x_part, x, p, step, nvars)
        done += step
        if not ok:
            x_aff = Pmat @ x + x_part
            wmin = float(np.linalg.eigvalsh(kernels.smat(x_aff, nvars))[0])
            return affine_result("Undetermined", done, x_aff, wmin * scale)


def moment_psd(functional: DualFunctional,
               gram_slice: GramSlice | None = None) -> float:
    """Smallest eigenvalue of the moment matrix (float route)."""
    M = functional.moment_matrix(gram_slice)
    if not isinstance(M, np.ndarray):
        M = to_float(M)
    w, _ = kernels.symmetric_eigen(M)
    return float(w[0])


def _sup_normalize(point):
    vals = [Fraction(c) for c in point]
    mx = max(abs(v) for v in vals)
    if mx == 0:
        raise DegeneratePosition("zero vector cannot represent a point")
    return [v / mx for v in vals]


def _check_on_variety(model, point):
    for rel in model.i2_rows():
        total = Fraction(0)
        _, pair_idx = _pair_index_map(model.n + 1)
        for (i, j), c in pair_idx.items():
            if rel[c] != 0:
                total += rel[c] * point[i] * point[j]
        if total != 0:
            raise InconsistentModel("point does not satisfy the quadric relations")


def _check_on_variety_complex(model, a, b):
    _, pair_idx = _pair_index_map(model.n + 1)
    for rel in model.i2_rows():
        re = Fraction(0)
        im = Fraction(0)
        for (i, j), c in pair_idx.items():
            if rel[c] != 0:
                re += rel[c] * (a[i] * a[j] - b[i] * b[j])
                im += rel[c] * (a[i] * b[j] + a[j] * b[i])
        if re != 0 or im != 0:
            raise InconsistentModel(
                "complex point does not satisfy the quadric relations")


def _basis_rep_pairs(model):
    """One representative monomial pair per R_2 basis element."""
    if not model.is_toric:
        return list(model.r2_basis)
    reps = [None] * model.dim_r2
    for i in range(model.n + 1):
        for j in range(i, model.n + 1):
            s = tuple(a + b for a, b in zip(model.r1_basis[i],
                                            model.r1_basis[j]))
            k = model._sum_index[s]
            if reps[k] is None:
                reps[k] = (i, j)
    return reps


def _unique_dependency(columns, ncols):
    """The one-dimensional exact relation among the given column vectors,
    scaled so its last coordinate is 1. All coordinates must be nonzero."""
    rows = [[col[i] for col in columns] for i in range(len(columns[0]))]
    ns = nullspace(rows)
    if len(ns) != 1:
        raise DegeneratePosition(
            "points admit %d linear relations, need exactly 1" % len(ns))
    lam = ns[0]
    if any(c == 0 for c in lam):
        raise DegeneratePosition("a point drops out of the unique relation")
    last = lam[-1]
    return [c / last for c in lam]


def separating_functional_real(model: VarietyModel, points, kappas=None):
    """Rational functional in Sos* \\ Pos* from e+2 real points on the
    affine cone whose evaluations satisfy a unique linear relation.

    Points are sup-norm normalized. With the relation scaled so the last
    coefficient is 1, the weight on the last point is the harmonic value
    kappa = 1 / sum(lambda_j^2 / kappa_j), which makes the functional
    nonnegative on squares with the last square entering negatively.
    Returns (functional, info) with the relation and weights in info.
    """
    e = model.e
    if len(points) != e + 2:
        raise DegeneratePosition("need exactly e+2 = %d points" % (e + 2))
    pts = [_sup_normalize(p) for p in points]
    for p in pts:
        if len(p) != model.n + 1:
            raise DegeneratePosition("point length must be n+1")
        _check_on_variety(model, p)
    lam = _unique_dependency(pts, e + 2)
    if kappas is None:
        kappas = [Fraction(1)] * (e + 1)
    kappas = [Fraction(k) for k in kappas]
    if len(kappas) != e + 1 or any(k <= 0 for k in kappas):
        raise DegeneratePosition("need e+1 positive weights")
    inv = sum(lam[j] ** 2 / kappas[j] for j in range(e + 1))
    kappa_last = 1 / inv
    reps = _basis_rep_pairs(model)
    values = []
    for (i, j) in reps:
        v = sum(kappas[t] * pts[t][i] * pts[t][j] for t in range(e + 1))
        v -= kappa_last * pts[e + 1][i] * pts[e + 1][j]
        values.append(v)
    fn = DualFunctional(model, values, exact=True)
    info = {"lambdas": lam[:e + 1], "kappas": kappas + [kappa_last],
            "points": pts}
    return fn, info


def separating_functional_complex(model: VarietyModel, real_points, a_point,
                                  b_point, kappas=None, rho=0):
    """Variant of the real construction when only e real points are
    available and a conjugate pair a ± b i on the cone completes the
    dependency.

    The raw dependency 0 = sum lambda_j p_j + alpha a + beta b is turned
    into 0 = sum lambda_j' p_j* + a'* by replacing the pair with the
    representative (a' + b' i) = mu (a + b i), mu = (alpha - beta i)/2,
    which keeps all data rational. With c = 1 / sum(lambda_j'^2 / kappa_j),
    the pair weights solve (k1^2 + k2^2) / k1 = c, parameterized by the
    ratio rho = k2 / k1; the functional subtracts k1 ((a'*)^2 - (b'*)^2)
    and adds k2 (2 a'* b'*).
    """
    e = model.e
    if len(real_points) != e:
        raise DegeneratePosition("need exactly e = %d real points" % e)
    pts = [_sup_normalize(p) for p in real_points]
    for p in pts:
        if len(p) != model.n + 1:
            raise DegeneratePosition("point length must be n+1")
        _check_on_variety(model, p)
    a = [Fraction(c) for c in a_point]
    b = [Fraction(c) for c in b_point]
    mx = max(max(abs(v) for v in a), max(abs(v) for v in b))
    if mx == 0:
        raise DegeneratePosition("zero vector cannot represent a point")
    a = [v / mx for v in a]
    b = [v / mx for v in b]
    if all(v == 0 for v in b):
        raise DegeneratePosition("imaginary part is zero; use the real form")
    _check_on_variety_complex(model, a, b)
    # raw real dependency among p_1..p_e, a, b
    rows = [[col[i] for col in pts + [a, b]] for i in range(model.n + 1)]
    ns = nullspace(rows)
    if len(ns) != 1:
        raise DegeneratePosition(
            "points admit %d linear relations, need exactly 1" % len(ns))
    raw = ns[0]
    alpha, beta = raw[e], raw[e + 1]
    if alpha == 0 and beta == 0:
        raise DegeneratePosition("complex pair drops out of the relation")
    if any(c == 0 for c in raw[:e]):
        raise DegeneratePosition("a point drops out of the unique relation")
    # rotate the representative so the pair's coefficient becomes 1
    a_rot = [(alpha * ai + beta * bi) / 2 for ai, bi in zip(a, b)]
    b_rot = [(-beta * ai + alpha * bi) / 2 for ai, bi in zip(a, b)]
    if all(v == 0 for v in b_rot):
        raise DegeneratePosition("rotated pair is real; use the real form")
    lam = [c / 2 for c in raw[:e]]
    if kappas is None:
        kappas = [Fraction(1)] * e
    kappas = [Fraction(k) for k in kappas]
    if len(kappas) != e or any(k <= 0 for k in kappas):
        raise DegeneratePosition("need e positive weights")
    rho = Fraction(rho)
    c = 1 / sum(lam[j] ** 2 / kappas[j] for j in range(e))
    k1 = c / (1 + rho ** 2)
    k2 = rho * k1
    reps = _basis_rep_pairs(model)
    values = []
    for (i, j) in reps:
        v = sum(kappas[t] * pts[t][i] * pts[t][j] for t in range(e))
        v -= k1 * (a_rot[i] * a_rot[j] - b_rot[i] * b_rot[j])
        v += k2 * (a_rot[i] * b_rot[j] + a_rot[j] * b_rot[i])
        values.append(v)
    fn = DualFunctional(model, values, exact=True)
    info = {"lambdas": lam, "kappas": kappas + [k1, k2],
            "points": pts, "a": a_rot, "b": b_rot}
    return fn, info


def evaluate_form(form: QuadraticForm, point):
    """Value of the form at an ambient point lying on the cone, using one
    representative monomial pair per basis element. Exact for rational
    input, float otherwise. Off-cone points give representative-dependent
    garbage; callers feed parameterized points."""
    reps = _basis_rep_pairs(form.model)
    if any(isinstance(c, float) for c in point):
        pt = [float(c) for c in point]
        return float(sum(float(cf) * pt[i] * pt[j]
                         for cf, (i, j) in zip(form.coefficients, reps)))
    pt = [Fraction(c) for c in point]
    return sum((cf * pt[i] * pt[j]
                for cf, (i, j) in zip(form.coefficients, reps)), Fraction(0))


def interpolant_through_points(model: VarietyModel, points, targets):
    """Exact linear form g in R_1 with g(p_j) = target_j; the system is
    underdetermined in general and any solution serves."""
    rows = [[Fraction(c) for c in p] for p in points]
    rhs = [Fraction(t) for t in targets]
    g = solve_exact(rows, rhs)
    if g is None:
        raise DegeneratePosition("interpolation conditions are inconsistent")
    return g


def pair_with_square(functional: DualFunctional, g,
                     gram_slice: GramSlice | None = None):
    """Exact value l(g^2) via the moment matrix quadratic form."""
    if not functional.exact:
        raise ValueError("exact pairing requires an exact functional")
    M = functional.moment_matrix(gram_slice)
    g = [Fraction(c) for c in g]
    total = Fraction(0)
    for i, gi in enumerate(g):
        if gi == 0:
            continue
        for j, gj in enumerate(g):
            if gj != 0:
                total += gi * gj * M[i][j]
    return total


def kernel_dimension(functional: DualFunctional,
                     gram_slice: GramSlice | None = None,
                     eig_tol: float = 1e-7) -> int:
    """dim Ker of the moment matrix: exact nullspace for exact functionals,
    eigenvalue thresholding for float ones. Float eigenvalues within a
    factor 10 of the cut are refused as ambiguous."""
    M = functional.moment_matrix(gram_slice)
    if functional.exact:
        return len(nullspace([row[:] for row in M]))
    w = np.linalg.eigvalsh(np.asarray(M))
    lam_max = float(np.abs(w).max())
    if lam_max == 0.0:
        return len(w)
    thr = eig_tol * lam_max
    aw = np.abs(w)
    band = (aw >= 0.1 * thr) & (aw < 10.0 * thr)
    if band.any():
        raise RankAmbiguity(
            "eigenvalues within a factor 10 of the rank threshold")
    return int((aw < thr).sum())


def extremality_check(functional: DualFunctional,
                      gram_slice: GramSlice | None = None):
    """Whether the functional spans an extremal ray of the dual cone of
    sums of squares: the space of functionals whose moment matrix kills
    Ker(M) must be one-dimensional. Exact arithmetic only."""
    if not functional.exact:
        raise ValueError("extremality check requires an exact functional")
    gs = gram_slice if gram_slice is not None else GramSlice(functional.model)
    M = functional.moment_matrix(gs)
    kern = nullspace([row[:] for row in M])
    if not kern:
        return False, 0
    nvars = functional.model.n + 1
    rows = []
    for k in kern:
        for i in range(nvars):
            row = []
            for s in range(functional.model.dim_r2):
                c = Fraction(0)
                for j in range(nvars):
                    if k[j] != 0:
                        a, bb = (i, j) if i <= j else (j, i)
                        c += gs.sigma[s][gs.pair_index[(a, bb)]] * k[j]
                row.append(c)
            rows.append(row)
    dim = len(nullspace(rows, functional.model.dim_r2))
    return dim == 1, dim
