"""Nonnegative-but-not-SOS witnesses on plane Veronese embeddings.

Pipeline for the degree-d Veronese surface model: draw two products of d
rational lines meeting in d^2 distinct exact points, fit a third degree-d
form through a selected subset of e of them, solve for a degree-2d form f
with double zeros at the selected points that escapes the span of the
pairwise products h_i h_j, and scale a rational delta > 0 so that

    w = delta f + h0^2 + h1^2 + h2^2

is nonnegative on sampled real points while provably not a sum of squares:
any SOS decomposition would force each square into span{h0,h1,h2}^2, and f
sits outside that span by an exact rank computation. The non-SOS half is
therefore an exact certificate; nonnegativity is sampling evidence backed
by the order-two vanishing at the selected points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cones import (
    GramSlice,
    extremality_check,
    interpolant_through_points,
    kernel_dimension,
    moment_psd,
    pair_with_square,
    separating_functional_real,
    sos_check,
)
from .errors import (
    DegeneratePosition,
    DegenerateSpan,
    EmptyComplement,
    InconsistentModel,
    NoDeltaFound,
    RetryExhausted,
)
from .numerics import exact_rank, in_row_span, nullspace, rref
from .variety import QuadraticForm, veronese_model


def _monomials(d):
    """Exponent pairs (a, b), a + b <= d, in the model's sorted order; the
    implied third exponent is d - a - b."""
    return sorted((a, b) for a in range(d + 1) for b in range(d + 1 - a))


def _rng(seed):
    return np.random.Generator(np.random.Philox(_seed_seq(seed)))


def _seed_seq(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def _primitive(vec):
    """Integer vector scaled primitively with first nonzero entry > 0."""
    fracs = [Fraction(v) for v in vec]
    den = 1
    for v in fracs:
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = [int(v * den) for v in fracs]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    if g == 0:
        raise DegeneratePosition("zero vector cannot be normalized")
    ints = [v // g for v in ints]
    lead = next(v for v in ints if v != 0)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0])


def _veronese_image(point, d, exps):
    x, y, z = (Fraction(c) for c in point)
    return [x ** a * y ** b * z ** (d - a - b) for (a, b) in exps]


def _poly_mul(p, q):
    out = {}
    for ea, ca in p.items():
        for eb, cb in q.items():
            key = tuple(i + j for i, j in zip(ea, eb))
            out[key] = out.get(key, Fraction(0)) + ca * cb
    return {k: v for k, v in out.items() if v != 0}


def _poly_eval(p, point):
    x, y, z = (Fraction(c) for c in point)
    return sum((c * x ** a * y ** b * z ** e for (a, b, e), c in p.items()),
               Fraction(0))


def _poly_to_vector(p, exps, deg):
    vec = [Fraction(0)] * len(exps)
    index = {e: i for i, e in enumerate(exps)}
    for (a, b, e), c in p.items():
        if a + b + e != deg:
            raise InconsistentModel("mixed-degree polynomial")
        vec[index[(a, b)]] = c
    return vec


def _vector_to_poly(vec, exps, deg):
    return {(a, b, deg - a - b): Fraction(c)
            for (a, b), c in zip(exps, vec) if c != 0}


def _line_product(lines):
    prod = {(0, 0, 0): Fraction(1)}
    for (a, b, c) in lines:
        prod = _poly_mul(prod, {(1, 0, 0): Fraction(a),
                                (0, 1, 0): Fraction(b),
                                (0, 0, 1): Fraction(c)})
    return prod


@dataclass
class ProductForm:
    """Degree-d form given as a product of linear factors, with the
    expanded coefficient dictionary over full exponent triples."""

    factors: list
    coeffs: dict


def choose_hyperplanes(d, seed, max_draws=64, coeff_bound=9):
    """Two products of d random integer lines whose d^2 pairwise
    intersections are distinct exact points spanning, under the degree-d
    Veronese map, a subspace of dimension exactly e + 1 (the two products
    themselves are the only degree-d forms through all the points).

    When exactly one linear relation ties the point images together (the
    d = 3 case), every relation coefficient is required nonzero so the
    configuration feeds the separating-functional construction directly.
    """
    if d < 3:
        raise ValueError("need degree at least 3")
    rng = _rng(seed)
    exps = _monomials(d)
    e = (d + 2) * (d + 1) // 2 - 3
    for _ in range(max_draws):
        raw = rng.integers(-coeff_bound, coeff_bound + 1, size=(2 * d, 3))
        lines = []
        ok = True
        for row in raw:
            if not row.any():
                ok = False
                break
            lines.append(_primitive([int(c) for c in row]))
        if not ok or len(set(lines)) != 2 * d:
            continue
        ell, em = lines[:d], lines[d:]
        pts = [_cross(a, b) for a in ell for b in em]
        if any(p == (0, 0, 0) for p in pts):
            continue
        pts = [_primitive(p) for p in pts]
        if len(set(pts)) != d * d:
            continue
        images = [_veronese_image(p, d, exps) for p in pts]
        if exact_rank(images) != e + 1:
            continue
        if d * d == e + 2:
            cols = [[img[i] for img in images] for i in range(len(exps))]
            rel = nullspace(cols)
            if len(rel) != 1 or any(c == 0 for c in rel[0]):
                continue
        return (ProductForm(list(ell), _line_product(ell)),
                ProductForm(list(em), _line_product(em)),
                pts)
    raise RetryExhausted(
        "no valid line configuration in %d draws" % max_draws)


def fit_h0(points, selected, seed, h_forms=None, max_draws=64):
    """Degree-d form vanishing exactly at the selected points: drawn from
    the exact nullspace of their Veronese evaluation matrix, verified
    nonvanishing at every non-selected point. With h_forms = (h1, h2)
    given, also verifies span{h0, h1, h2} is the full vanishing space."""
    d = math.isqrt(len(points))
    if d * d != len(points):
        raise InconsistentModel("point count is not a square")
    exps = _monomials(d)
    e = (d + 2) * (d + 1) // 2 - 3
    if len(selected) != e or len(set(selected)) != e:
        raise DegenerateSpan("need %d distinct selected indices" % e)
    rows = [_veronese_image(points[i], d, exps) for i in selected]
    vanishing = nullspace(rows)
    if len(vanishing) != 3:
        raise DegenerateSpan(
            "vanishing space has dimension %d, expected 3" % len(vanishing))
    unselected = [i for i in range(len(points)) if i not in set(selected)]
    rng = _rng(seed)
    h0 = None
    for _ in range(max_draws):
        c = rng.integers(-4, 5, size=3)
        if not c.any():
            continue
        cand = [sum(int(c[k]) * vanishing[k][j] for k in range(3))
                for j in range(len(exps))]
        if all(v == 0 for v in cand):
            continue
        vals = [sum(a * b for a, b in
                    zip(cand, _veronese_image(points[i], d, exps)))
                for i in unselected]
        if all(v != 0 for v in vals):
            h0 = [Fraction(v) for v in _primitive(cand)]
            break
    if h0 is None:
        raise RetryExhausted(
            "no combination avoided the unselected points in %d draws"
            % max_draws)
    if h_forms is not None:
        h1, h2 = h_forms
        v1 = _poly_to_vector(h1.coeffs, exps, d)
        v2 = _poly_to_vector(h2.coeffs, exps, d)
        if not (in_row_span(vanishing, v1) and in_row_span(vanishing, v2)):
            raise InconsistentModel(
                "line products do not vanish at the selected points")
        if exact_rank([h0, v1, v2]) != 3:
            raise DegenerateSpan("h0, h1, h2 do not span the vanishing space")
    return h0


def _double_vanishing_rows(points, selected, d, exps2):
    """Value plus two partial derivatives per selected point: the partial
    along the largest coordinate is dropped (it follows from the other
    conditions by homogeneity)."""
    D = 2 * d
    rows = []
    for i in selected:
        p = [Fraction(c) for c in points[i]]
        pivot = max(range(3), key=lambda k: abs(p[k]))
        val = []
        grads = {0: [], 1: [], 2: []}
        for (a, b) in exps2:
            ee = (a, b, D - a - b)
            val.append(p[0] ** a * p[1] ** b * p[2] ** ee[2])
            for k in range(3):
                if ee[k] == 0:
                    grads[k].append(Fraction(0))
                    continue
                shifted = list(ee)
                shifted[k] -= 1
                grads[k].append(ee[k] * p[0] ** shifted[0]
                                * p[1] ** shifted[1] * p[2] ** shifted[2])
        rows.append(val)
        for k in range(3):
            if k != pivot:
                rows.append(grads[k])
    return rows


def build_f(points, selected, h_polys):
    """Degree-2d form with double zeros at the selected points, outside
    the span of the pairwise products h_i h_j.

    Returns (coefficient vector over the sorted degree-2d monomials,
    stats dict with nullspace/product-span/quotient dimensions). The
    quotient dimension must be at least the quadratic deficiency of the
    model, and exactly 1 for d = 3 where f is unique up to scale.
    """
    d = math.isqrt(len(points))
    if d * d != len(points):
        raise InconsistentModel("point count is not a square")
    exps2 = _monomials(2 * d)
    rows = _double_vanishing_rows(points, selected, d, exps2)
    ns = nullspace(rows, ncols=len(exps2))
    prods = []
    for i in range(3):
        for j in range(i, 3):
            prods.append(_poly_to_vector(
                _poly_mul(h_polys[i], h_polys[j]), exps2, 2 * d))
    rp = exact_rank(prods)
    if exact_rank(prods + ns) != len(ns):
        raise InconsistentModel(
            "a product h_i h_j misses a double zero at a selected point")
    quotient = len(ns) - rp
    if quotient == 0:
        raise EmptyComplement(
            "every doubly-vanishing form is a combination of the h_i h_j")
    eps = _quadratic_deficiency(d)
    if quotient < eps or (d == 3 and quotient != 1):
        raise DegenerateSpan(
            "quotient dimension %d is degenerate (deficiency %d)"
            % (quotient, eps))
    reduced, pivots = rref(prods)
    f = None
    for v in ns:
        w = list(v)
        for row, pc in zip(reduced, pivots):
            if w[pc] != 0:
                c = w[pc]
                w = [a - c * b for a, b in zip(w, row)]
        if any(c != 0 for c in w):
            f = [Fraction(c) for c in _primitive(w)]
            break
    if f is None:
        raise EmptyComplement("nullspace basis reduced to zero")
    for i in selected:
        if not _double_zero_at(f, exps2, 2 * d, points[i]):
            raise InconsistentModel("f fails to doubly vanish at a point")
    return f, {"nullspace_dim": len(ns), "products_rank": rp,
               "quotient_dim": quotient}


def _quadratic_deficiency(d):
    n = (d + 2) * (d + 1) // 2 - 1
    dim_r2 = (2 * d + 2) * (2 * d + 1) // 2
    return dim_r2 - 3 * (n + 1) + 3


def _double_zero_at(vec, exps2, deg, point):
    p = [Fraction(c) for c in point]
    val = Fraction(0)
    grad = [Fraction(0)] * 3
    for (a, b), c in zip(exps2, vec):
        if c == 0:
            continue
        ee = (a, b, deg - a - b)
        val += c * p[0] ** a * p[1] ** b * p[2] ** ee[2]
        for k in range(3):
            if ee[k] == 0:
                continue
            sh = list(ee)
            sh[k] -= 1
            grad[k] += c * ee[k] * p[0] ** sh[0] * p[1] ** sh[1] \
                * p[2] ** sh[2]
    return val == 0 and all(g == 0 for g in grad)


def _eval_many(poly_items, X, Y, Z):
    """Float values of a sparse ternary polynomial at sample arrays."""
    total = np.zeros_like(X)
    for (a, b, e), c in poly_items:
        total += float(c) * X ** a * Y ** b * Z ** e
    return total


def _sphere_values(f_vec, h_polys, samples, seed):
    """Unit-sphere sample points with the float values of f and of
    sum h_i^2 at them."""
    d = max(a + b + e for (a, b, e) in h_polys[0]) if h_polys[0] else 0
    exps2 = _monomials(2 * d)
    if len(exps2) != len(f_vec):
        raise InconsistentModel("f length does not match degree 2d")
    rng = _rng(seed)
    pts = rng.normal(size=(int(samples), 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    X, Y, Z = pts[:, 0], pts[:, 1], pts[:, 2]
    f_items = [((a, b, 2 * d - a - b), c)
               for (a, b), c in zip(exps2, f_vec) if c != 0]
    f_vals = _eval_many(f_items, X, Y, Z)
    h_sq = np.zeros_like(X)
    for hp in h_polys:
        h_sq += _eval_many(list(hp.items()), X, Y, Z) ** 2
    return pts, f_vals, h_sq


def delta_search(f_vec, h_polys, selected_points, samples=100000, seed=0,
                 exclusion_radius=0.1):
    """Power-of-two rational delta with delta f + sum h_i^2 sampled
    nonnegative on the unit sphere (relative margin -1e-9).

    The starting estimate is inf(sum h_i^2) / sup|f| over samples outside
    small neighborhoods of the selected points, where the ratio bound is
    meaningful; halving from there terminates because the double zeros
    make the negative part of delta f locally dominated. Power-of-two
    values convert exactly between float and Fraction, so the accepted
    delta is the tested delta.
    """
    pts, f_vals, h_sq = _sphere_values(f_vec, h_polys, samples, seed)
    keep = np.ones(len(pts), dtype=bool)
    for p in selected_points:
        q = np.array([float(c) for c in p])
        q /= np.linalg.norm(q)
        dist = np.minimum(np.linalg.norm(pts - q, axis=1),
                          np.linalg.norm(pts + q, axis=1))
        keep &= dist > exclusion_radius
    if not keep.any():
        keep = np.ones(len(pts), dtype=bool)
    sup_f = float(np.abs(f_vals[keep]).max())
    if sup_f == 0.0:
        estimate = 1.0
    else:
        estimate = float(h_sq[keep].min()) / sup_f
    k0 = 10 if estimate <= 0 else min(10, math.floor(math.log2(estimate)))
    for k in range(k0, -61, -1):
        df = math.ldexp(1.0, k) * f_vals
        w = df + h_sq
        scale = float((np.abs(df) + h_sq).max())
        wmin = float(w.min())
        if scale == 0.0 or wmin >= -1e-9 * scale:
            evidence = {"samples": int(samples),
                        "excluded": int((~keep).sum()),
                        "delta_estimate": estimate,
                        "min_value": wmin,
                        "scale": scale,
                        "margin": 0.0 if scale == 0.0 else wmin / scale}
            return Fraction(2) ** k, evidence
    raise NoDeltaFound("halving reached 2^-60 without a nonnegative sample")


def sample_nonnegativity(report: "WitnessReport", samples=100000, seed=0,
                         delta=None):
    """Independent sampling re-check of the witness: relative margin of
    delta f + sum h_i^2 over fresh sphere samples. delta defaults to the
    report's accepted value. Returns {"min_value", "scale", "margin"}."""
    d = report.d
    exps = _monomials(d)
    h_polys = [_vector_to_poly(v, exps, d) for v in report.h_vectors]
    f_vec = list(report.f.coefficients)
    if delta is None:
        delta = report.delta
    _, f_vals, h_sq = _sphere_values(f_vec, h_polys, samples, seed)
    df = float(delta) * f_vals
    w = df + h_sq
    scale = float((np.abs(df) + h_sq).max())
    wmin = float(w.min())
    return {"min_value": wmin, "scale": scale,
            "margin": 0.0 if scale == 0.0 else wmin / scale}


@dataclass
class WitnessReport:
    """Complete record of one pipeline run; every certificate ingredient
    is exact and re-checkable from the stored fields alone."""

    d: int
    seed: int
    attempt: int
    h1_factors: list
    h2_factors: list
    h_vectors: list          # h0, h1, h2 over the degree-d monomial basis
    points: list             # primitive integer triples, construction order
    selected: list
    f: QuadraticForm
    delta: Fraction
    witness: QuadraticForm
    stats: dict
    certificate: dict
    nonneg_evidence: dict
    functional: object = None
    functional_info: dict | None = None
    functional_checks: dict | None = None
    sos: dict | None = None

    def to_json(self):
        return {
            "d": self.d,
            "seed": self.seed,
            "attempt": self.attempt,
            "h1_factors": [list(f) for f in self.h1_factors],
            "h2_factors": [list(f) for f in self.h2_factors],
            "h_vectors": [[_frac_json(c) for c in v] for v in self.h_vectors],
            "points": [list(p) for p in self.points],
            "selected": list(self.selected),
            "f": self.f.to_json(),
            "delta": _frac_json(self.delta),
            "witness": self.witness.to_json(),
            "stats": dict(self.stats),
            "certificate": dict(self.certificate),
            "nonneg_evidence": dict(self.nonneg_evidence),
            "functional": None if self.functional is None
                else self.functional.to_json(),
            "functional_info": None if self.functional_info is None else {
                "lambdas": [_frac_json(v)
                            for v in self.functional_info["lambdas"]],
                "kappas": [_frac_json(v)
                           for v in self.functional_info["kappas"]],
                "point_indices": list(self.functional_info["point_indices"]),
            },
            "functional_checks": None if self.functional_checks is None
                else dict(self.functional_checks),
            "sos": None if self.sos is None else dict(self.sos),
        }


def _frac_json(v):
    v = Fraction(v)
    return {"num": str(v.numerator), "den": str(v.denominator)}


def _frac_from_json(blob):
    return Fraction(int(blob["num"]), int(blob["den"]))


def witness_report_from_json(blob):
    """Rebuild a WitnessReport (and its model-backed forms) from to_json
    output."""
    from .cones import DualFunctional

    d = int(blob["d"])
    model = veronese_model(2, d)
    fn = None
    if blob["functional"] is not None:
        vals = [_frac_from_json(v) for v in blob["functional"]["values"]]
        fn = DualFunctional(model, vals, exact=True)
    info = None
    if blob["functional_info"] is not None:
        info = {
            "lambdas": [_frac_from_json(v)
                        for v in blob["functional_info"]["lambdas"]],
            "kappas": [_frac_from_json(v)
                       for v in blob["functional_info"]["kappas"]],
            "point_indices": list(blob["functional_info"]["point_indices"]),
        }
    return WitnessReport(
        d=d,
        seed=int(blob["seed"]),
        attempt=int(blob["attempt"]),
        h1_factors=[tuple(int(c) for c in f) for f in blob["h1_factors"]],
        h2_factors=[tuple(int(c) for c in f) for f in blob["h2_factors"]],
        h_vectors=[[_frac_from_json(c) for c in v]
                   for v in blob["h_vectors"]],
        points=[tuple(int(c) for c in p) for p in blob["points"]],
        selected=[int(i) for i in blob["selected"]],
        f=QuadraticForm(model, [Fraction(c) for c in blob["f"]["coefficients"]]),
        delta=_frac_from_json(blob["delta"]),
        witness=QuadraticForm(
            model, [Fraction(c) for c in blob["witness"]["coefficients"]]),
        stats=dict(blob["stats"]),
        certificate=dict(blob["certificate"]),
        nonneg_evidence=dict(blob["nonneg_evidence"]),
        functional=fn,
        functional_info=info,
        functional_checks=None if blob["functional_checks"] is None
            else dict(blob["functional_checks"]),
        sos=None if blob["sos"] is None else dict(blob["sos"]),
    )


def certify_not_sos(report: WitnessReport) -> bool:
    """Exact re-verification that the witness is not a sum of squares for
    any positive delta: (a) the degree-d forms vanishing at the selected
    points are exactly span{h0, h1, h2}; (b) f vanishes at the selected
    points but lies outside span{h_i h_j}. Any square decomposition of the
    witness would force its squares into the span from (a), contradicting
    (b). Returns False instead of raising on an invalid report."""
    try:
        d = report.d
        exps = _monomials(d)
        exps2 = _monomials(2 * d)
        rows = [_veronese_image(report.points[i], d, exps)
                for i in report.selected]
        vanishing = nullspace(rows, ncols=len(exps))
        if len(vanishing) != 3:
            return False
        hs = report.h_vectors
        if len(hs) != 3:
            return False
        for h in hs:
            if not in_row_span(vanishing, h):
                return False
        if exact_rank(list(hs)) != 3:
            return False
        polys = [_vector_to_poly(h, exps, d) for h in hs]
        prods = []
        for i in range(3):
            for j in range(i, 3):
                prods.append(_poly_to_vector(
                    _poly_mul(polys[i], polys[j]), exps2, 2 * d))
        f = list(report.f.coefficients)
        if all(c == 0 for c in f):
            return False
        rp = exact_rank(prods)
        if exact_rank(prods + [f]) != rp + 1:
            return False
        for i in report.selected:
            p = report.points[i]
            img2 = [Fraction(p[0]) ** a * Fraction(p[1]) ** b
                    * Fraction(p[2]) ** (2 * d - a - b) for (a, b) in exps2]
            if sum((c * v for c, v in zip(f, img2)), Fraction(0)) != 0:
                return False
        return True
    except (ValueError, IndexError, KeyError, TypeError):
        return False


def _attach_functional(model, gs, report, max_subsets=60):
    """Separating functional from e+2 of the intersection points, plus the
    exact pairing and kernel checks. Point subsets are scanned in index
    order until one admits the unique all-nonzero relation."""
    d = report.d
    e = model.e
    exps = _monomials(d)
    last = None
    for count, idx in enumerate(
            itertools.combinations(range(len(report.points)), e + 2)):
        if count >= max_subsets:
            break
        try:
            pts = [_veronese_image(report.points[i], d, exps) for i in idx]
            fn, info = separating_functional_real(model, pts)
        except DegeneratePosition as ex:
            last = ex
            continue
        targets = [info["lambdas"][j] / info["kappas"][j]
                   for j in range(e + 1)]
        g = interpolant_through_points(model, info["points"][:e + 1], targets)
        pairing = pair_with_square(fn, g, gs)
        for h in report.h_vectors[1:]:
            pairing += pair_with_square(fn, h, gs)
        if pairing != 0:
            raise InconsistentModel(
                "functional fails to annihilate g^2 + h1^2 + h2^2")
        kd = kernel_dimension(fn, gs)
        extremal, pdim = extremality_check(fn, gs)
        if extremal and kd != model.m + 1:
            raise InconsistentModel(
                "extremal functional kernel dimension %d != m+1" % kd)
        report.functional = fn
        report.functional_info = {"lambdas": info["lambdas"],
                                  "kappas": info["kappas"],
                                  "point_indices": list(idx)}
        report.functional_checks = {
            "moment_min_eig": moment_psd(fn, gs),
            "pairing_is_zero": True,
            "kernel_dim": kd,
            "extremal": extremal,
            "perturbation_dim": pdim,
        }
        return
    report.functional_checks = {"skipped": str(last)}


def _default_selection(d, e):
    """Indices of the e selected points in the d x d intersection grid
    (cell (i, j) = line i of the first product meeting line j of the
    second, at index i*d + j). The d*d - e unselected cells walk wrapped
    diagonals, so every line keeps unselected points and no triple of
    lines hoards the selection; clustered selections inflate the
    vanishing space past dimension 3."""
    skip = d * d - e
    cells = {((t % d) * d + (t % d + t // d) % d) for t in range(skip)}
    return [i for i in range(d * d) if i not in cells]


def hilbert_witness(d=3, seed=0, samples=100000, sos_budget=20000,
                    max_retries=8) -> WitnessReport:
    """Full pipeline on the degree-d Veronese surface model. Steps that
    depend on the random draw retry with derived seeds; the final report
    carries the exact non-SOS certificate, sampling evidence for
    nonnegativity, the separating functional with its exact pairing, and
    the float SOS feasibility verdict (never a certificate)."""
    if d < 3:
        raise ValueError("need degree at least 3")
    model = veronese_model(2, d)
    exps = _monomials(d)
    exps2 = _monomials(2 * d)
    if list(model.r1_basis) != exps or list(model.r2_basis) != exps2:
        raise InconsistentModel("model monomial order drifted")
    e = model.e
    gs = GramSlice(model)
    last_err = None
    for attempt in range(max_retries):
        ss = np.random.SeedSequence(int(seed), spawn_key=(attempt,))
        s_lines, s_h0, s_delta = ss.spawn(3)
        try:
            h1f, h2f, points = choose_hyperplanes(d, s_lines)
            selected = _default_selection(d, e)
            h0 = fit_h0(points, selected, s_h0, h_forms=(h1f, h2f))
            h_polys = [_vector_to_poly(h0, exps, d), h1f.coeffs, h2f.coeffs]
            f_raw, stats = build_f(points, selected, h_polys)
            break
        except (DegeneratePosition, DegenerateSpan, EmptyComplement,
                RetryExhausted) as ex:
            last_err = ex
    else:
        raise RetryExhausted(
            "pipeline failed after %d attempts; last: %s"
            % (max_retries, last_err))

    h_vectors = [h0,
                 _poly_to_vector(h1f.coeffs, exps, d),
                 _poly_to_vector(h2f.coeffs, exps, d)]
    h_sq = [Fraction(0)] * len(exps2)
    index2 = {ee: i for i, ee in enumerate(exps2)}
    for hp in h_polys:
        for (a, b, _), c in _poly_mul(hp, hp).items():
            h_sq[index2[(a, b)]] += c
    # scale f so its coefficient size matches the square part; delta then
    # measures the perturbation relative to the SOS bulk
    ratio = max(abs(c) for c in h_sq) / max(abs(c) for c in f_raw)
    f_vec = [c * ratio for c in f_raw]
    delta, evidence = delta_search(
        f_vec, h_polys, selected_points=[points[i] for i in selected],
        samples=samples, seed=s_delta)
    evidence["f_scale"] = float(ratio)
    witness_coeffs = [delta * fc + hc for fc, hc in zip(f_vec, h_sq)]
    report = WitnessReport(
        d=d, seed=int(seed), attempt=attempt,
        h1_factors=list(h1f.factors), h2_factors=list(h2f.factors),
        h_vectors=h_vectors, points=list(points), selected=selected,
        f=QuadraticForm(model, f_vec), delta=delta,
        witness=QuadraticForm(model, witness_coeffs),
        stats=stats, certificate={}, nonneg_evidence=evidence)
    cert_valid = certify_not_sos(report)
    report.certificate = {
        "vanishing_dim": 3,
        "products_rank": stats["products_rank"],
        "with_f_rank": stats["products_rank"] + 1,
        "quotient_dim": stats["quotient_dim"],
        "valid": cert_valid,
    }
    if not cert_valid:
        raise InconsistentModel("exact certificate failed to re-verify")
    _attach_functional(model, gs, report)
    res = sos_check(QuadraticForm(model, witness_coeffs), gram_slice=gs,
                    budget=sos_budget, psd_tol=1e-11, sep_tol=1e-9)
    if res.status == "Certificate":
        raise InconsistentModel(
            "float solver certified a form with an exact non-SOS certificate")
    report.sos = {"status": res.status, "iterations": res.iterations,
                  "min_eig": res.min_eig,
                  "separation": res.separation}
    return report
