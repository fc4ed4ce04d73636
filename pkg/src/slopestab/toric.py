"""Combinatorial toric backend: fans, star subdivisions, nef thresholds,
lattice polytopes with exact volumes, and export of intersection tables.

Smooth complete fans only.  Blowing up the orbit closure of a smooth cone
is realized as the star subdivision inserting the barycentric ray; the
divisorial case (a single ray) is the identity blow-up.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import comb, factorial, gcd

from .models import (
    Diagnostic,
    Diagnostics,
    IntersectionTable,
    MixedTable,
    ModelError,
)
from .polynomials import UniPoly, WitnessMismatch, fit_polynomial


class ToricError(ValueError):
    """Inconsistent fan, divisor or model data."""


# ---------------------------------------------------------------------------
# exact linear algebra helpers

def _det(rows: list[list[Fraction]]) -> Fraction:
    n = len(rows)
    m = [[Fraction(x) for x in row] for row in rows]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def _solve_linear(rows, rhs):
    """Solve A x = b exactly; returns the solution list or None when the
    system is inconsistent or underdetermined."""
    m = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    nrows = len(m)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = Fraction(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        if m[i][ncols] != 0:
            return None  # inconsistent
    if len(pivots) < ncols:
        return None  # underdetermined
    sol = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        sol[c] = m[i][ncols]
    return sol


# ---------------------------------------------------------------------------
# fans and divisors

@dataclass(frozen=True)
class Fan:
    """Complete simplicial fan given by primitive rays and maximal cones."""

    rays: tuple[tuple[int, ...], ...]
    max_cones: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.rays:
            raise ToricError("fan has no rays")
        dim = len(self.rays[0])
        for ray in self.rays:
            if len(ray) != dim:
                raise ToricError("rays of mixed dimension")
            if all(x == 0 for x in ray):
                raise ToricError("zero ray")
        for cone in self.max_cones:
            if len(cone) != dim:
                raise ToricError(f"maximal cone {cone} does not have {dim} rays")
            if not all(0 <= i < len(self.rays) for i in cone):
                raise ToricError(f"cone {cone} references missing ray")

    @property
    def dim(self) -> int:
        return len(self.rays[0])

    def cone_det(self, cone) -> Fraction:
        return _det([list(self.rays[i]) for i in cone])


@dataclass(frozen=True)
class Wall:
    """Codimension-one face shared by two maximal cones."""

    rays: tuple[int, ...]  # the n-1 common ray indices
    cones: tuple[int, int]
    opposite: tuple[int, int]  # the two non-shared ray indices


@dataclass(frozen=True)
class ToricDivisor:
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    def __add__(self, other: "ToricDivisor") -> "ToricDivisor":
        return ToricDivisor(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "ToricDivisor") -> "ToricDivisor":
        return ToricDivisor(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rmul__(self, scalar) -> "ToricDivisor":
        r = Fraction(scalar)
        return ToricDivisor(tuple(r * c for c in self.coeffs))


def _facet_incidence(fan: Fan) -> dict[tuple[int, ...], list[tuple[int, int]]]:
    inc: dict[tuple[int, ...], list[tuple[int, int]]] = {}
    for ci, cone in enumerate(fan.max_cones):
        for i in cone:
            facet = tuple(sorted(set(cone) - {i}))
            inc.setdefault(facet, []).append((ci, i))
    return inc


def check_fan(fan: Fan) -> Diagnostics:
    """Smoothness (unimodular cones) and completeness (wall accounting)."""
    entries = []
    for cone in fan.max_cones:
        det = fan.cone_det(cone)
        if abs(det) != 1:
            entries.append(
                Diagnostic("error", f"non-smooth cone {tuple(cone)}, det {det}")
            )
    for facet, inc in sorted(_facet_incidence(fan).items()):
        if len(inc) != 2:
            entries.append(
                Diagnostic(
                    "error",
                    f"wall {facet} with {len(inc)} incident cone(s), expected 2",
                )
            )
    return Diagnostics(tuple(entries))


def walls(fan: Fan) -> list[Wall]:
    out = []
    for facet, inc in sorted(_facet_incidence(fan).items()):
        if len(inc) != 2:
            raise ToricError(f"wall {facet} with {len(inc)} incident cone(s)")
        (ca, ia), (cb, ib) = inc
        out.append(Wall(facet, (ca, cb), (ia, ib)))
    return out


def star_subdivide(fan: Fan, sigma) -> tuple[Fan, int]:
    """Star subdivision at the smooth cone spanned by the rays in sigma.

    Returns the refined fan and the index of the barycentric ray.  A single
    ray is the identity blow-up: the fan is returned unchanged and the ray
    itself plays the role of the exceptional divisor.
    """
    sigma = tuple(sorted(set(sigma)))
    if not sigma:
        raise ToricError("sigma is empty")
    containing = [c for c in fan.max_cones if set(sigma) <= set(c)]
    if not containing:
        raise ToricError(f"sigma {sigma} is not a face of any maximal cone")
    if len(sigma) == 1:
        return fan, sigma[0]
    new_ray = tuple(sum(fan.rays[i][d] for i in sigma) for d in range(fan.dim))
    new_idx = len(fan.rays)
    cones = []
    for cone in fan.max_cones:
        if set(sigma) <= set(cone):
            for i in sigma:
                cones.append(tuple(sorted((set(cone) - {i}) | {new_idx})))
        else:
            cones.append(cone)
    return Fan(fan.rays + (new_ray,), tuple(cones)), new_idx


def curve_degree(fan: Fan, wall: Wall, divisor: ToricDivisor) -> Fraction:
    """Degree of a divisor on the invariant curve of a wall.

    With the integral relation u_a + u_b = sum_i c_i u_i over the wall's
    rays, the degree is a_a + a_b - sum_i c_i a_i for the support-function
    convention <x, u_rho> >= -a_rho.
    """
    ia, ib = wall.opposite
    target = [
        fan.rays[ia][d] + fan.rays[ib][d] for d in range(fan.dim)
    ]
    if wall.rays:
        rows = [[fan.rays[i][d] for i in wall.rays] for d in range(fan.dim)]
        sol = _solve_linear(rows, target)
        if sol is None:
            raise ToricError(f"wall data inconsistent at {wall.rays}")
    else:
        if any(t != 0 for t in target):
            raise ToricError("wall data inconsistent in dimension one")
        sol = []
    a = divisor.coeffs
    return a[ia] + a[ib] - sum(c * a[i] for c, i in zip(sol, wall.rays))


def nef_threshold(fan: Fan, pi_l: ToricDivisor, e_index: int) -> Fraction:
    """sup{ t >= 0 : pi*L - tE nef }, from per-wall affine bounds."""
    e_div = ToricDivisor(
        tuple(Fraction(int(i == e_index)) for i in range(len(fan.rays)))
    )
    bounds = []
    for wall in walls(fan):
        dl = curve_degree(fan, wall, pi_l)
        if dl < 0:
            raise ToricError(f"pi*L is not nef: degree {dl} on wall {wall.rays}")
        de = curve_degree(fan, wall, e_div)
        if de > 0:
            bounds.append(dl / de)
    if not bounds:
        raise ToricError("no wall constrains t: nef threshold unbounded")
    eps = min(bounds)
    if eps <= 0:
        raise ToricError("nef threshold is zero: center not permissible")
    return eps


# ---------------------------------------------------------------------------
# lattice polytopes

def _restrict(ineqs, pivot_ineq, drop):
    """Restrict the other inequalities to the hyperplane of pivot_ineq,
    eliminating coordinate `drop`.  Returns the reduced system or None when
    the hyperplane slice is plainly empty."""
    u, a = pivot_ineq
    uj = u[drop]
    reduced = []
    for v, b in ineqs:
        if (v, b) == (u, a):
            continue
        w = tuple(
            v[l] - Fraction(v[drop], uj) * u[l]
            for l in range(len(v))
            if l != drop
        )
        b2 = b - Fraction(v[drop], uj) * a
        if all(x == 0 for x in w):
            if b2 < 0:
                return None
            continue
        reduced.append((w, b2))
    return reduced


def _interval_volume(ineqs) -> Fraction:
    lo, hi = None, None
    for (u,), a in ineqs:
        if u == 0:
            if a < 0:
                return Fraction(0)
            continue
        bound = Fraction(-a, u)
        if u > 0:
            lo = bound if lo is None else max(lo, bound)
        else:
            hi = bound if hi is None else min(hi, bound)
    if lo is None or hi is None:
        raise ToricError("unbounded one-dimensional section")
    return max(hi - lo, Fraction(0))


def _volume_hrep(ineqs, dim) -> Fraction:
    """Euclidean volume of {x : <x,u> >= -a} by the divergence-theorem
    recursion over facets; exact throughout."""
    if dim == 0:
        return Fraction(1) if all(a >= 0 for _, a in ineqs) else Fraction(0)
    if dim == 1:
        return _interval_volume(ineqs)
    seen = set()
    total = Fraction(0)
    for u, a in ineqs:
        if (u, a) in seen:
            continue
        seen.add((u, a))
        drop = max(range(dim), key=lambda l: abs(u[l]))
        if u[drop] == 0:
            continue
        reduced = _restrict(ineqs, (u, a), drop)
        if reduced is None:
            continue
        facet_vol = _volume_hrep(reduced, dim - 1)
        total += a * facet_vol / abs(u[drop])
    return total / dim


class LatticePolytope:
    """Rational polytope {x : <x, normal> >= -offset}, exact arithmetic."""

    def __init__(self, inequalities):
        seen = set()
        ineqs = []
        for normal, offset in inequalities:
            key = (tuple(int(x) for x in normal), Fraction(offset))
            if key not in seen:
                seen.add(key)
                ineqs.append(key)
        if not ineqs:
            raise ToricError("polytope needs at least one inequality")
        self.inequalities: tuple = tuple(ineqs)
        self.dim = len(ineqs[0][0])

    def contains(self, point) -> bool:
        return all(
            sum(Fraction(x) * u for x, u in zip(point, normal)) >= -offset
            for normal, offset in self.inequalities
        )

    @cached_property
    def vertices(self) -> tuple[tuple[Fraction, ...], ...]:
        """Exact vertex enumeration over all n-subsets of tight inequalities."""
        out = []
        seen = set()
        for subset in combinations(range(len(self.inequalities)), self.dim):
            rows = [list(self.inequalities[i][0]) for i in subset]
            rhs = [-self.inequalities[i][1] for i in subset]
            sol = _solve_linear(rows, rhs)
            if sol is None:
                continue
            pt = tuple(sol)
            if pt not in seen and self.contains(pt):
                seen.add(pt)
                out.append(pt)
        return tuple(sorted(out))

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def volume(self) -> Fraction:
        return _volume_hrep(self.inequalities, self.dim)

    def facet_lattice_volume(self, facet_index: int) -> Fraction:
        """Facet volume in unimodular coordinates of its hyperplane lattice.

        Projecting out a coordinate where the primitive normal is nonzero is
        a lattice-volume-preserving chart up to the factor |u_j|.
        """
        u, a = self.inequalities[facet_index]
        g = 0
        for x in u:
            g = gcd(g, abs(x))
        if g != 1:
            raise ToricError(f"non-primitive facet normal {u}")
        if self.dim == 1:
            reduced = _restrict(self.inequalities, (u, a), 0)
            if reduced is None:
                return Fraction(0)
            return _volume_hrep(reduced, 0)
        drop = max(range(self.dim), key=lambda l: abs(u[l]))
        reduced = _restrict(self.inequalities, (u, a), drop)
        if reduced is None:
            return Fraction(0)
        return _volume_hrep(reduced, self.dim - 1) / abs(u[drop])

    def boundary_lattice_volume(self) -> Fraction:
        return sum(
            self.facet_lattice_volume(i) for i in range(len(self.inequalities))
        )


def _recession_is_trivial(normals) -> bool:
    """True when {d : <d,u> >= 0 for all normals} = {0}."""
    dim = len(normals[0])
    rows = [list(u) for u in normals]
    # a full line in the recession cone forces rank deficiency
    if _rank(rows) < dim:
        return False
    for subset in combinations(range(len(normals)), dim - 1):
        d = _nullspace_vector([list(normals[i]) for i in subset], dim)
        if d is None:
            continue
        for cand in (d, [-x for x in d]):
            if all(sum(c * u for c, u in zip(cand, n)) >= 0 for n in normals):
                return False
    return True


def _rank(rows) -> int:
    m = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = Fraction(1) / m[rank][c]
        m[rank] = [x * inv for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def _nullspace_vector(rows, dim):
    """A nonzero vector orthogonal to all rows, when the nullspace is a line."""
    if dim == 1:
        return [Fraction(1)] if not rows or _rank(rows) == 0 else None
    if _rank(rows) != dim - 1:
        return None
    for free in range(dim):
        sys_rows = [row[:free] + row[free + 1 :] for row in rows]
        rhs = [-row[free] for row in rows]
        sol = _solve_linear(sys_rows, rhs) if sys_rows and sys_rows[0] else None
        if sol is not None:
            vec = list(sol[:free]) + [Fraction(1)] + list(sol[free:])
            return vec
    return None


def polytope_of(fan: Fan, divisor: ToricDivisor) -> LatticePolytope:
    """Sections polytope {x : <x, u_rho> >= -a_rho for every ray}."""
    if len(divisor.coeffs) != len(fan.rays):
        raise ToricError("divisor coefficient count does not match the fan")
    if not _recession_is_trivial(fan.rays):
        raise ToricError("unbounded polytope: fan does not span all directions")
    return LatticePolytope(list(zip(fan.rays, divisor.coeffs)))


# ---------------------------------------------------------------------------
# toric models and table export

@dataclass(frozen=True)
class ToricModel:
    """Combinatorial (X, L, Z): a fan, a nef and big divisor, an optional
    ample companion H, and the smooth cone sigma whose orbit closure is Z."""

    label: str
    fan: Fan
    L: ToricDivisor
    sigma: tuple[int, ...]
    H: ToricDivisor | None = None

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(sorted(set(self.sigma))))
        if len(self.L.coeffs) != len(self.fan.rays):
            raise ToricError("L coefficient count does not match the fan")
        if self.H is not None and len(self.H.coeffs) != len(self.fan.rays):
            raise ToricError("H coefficient count does not match the fan")
        if not self.sigma:
            raise ToricError("sigma is empty")
        if not all(0 <= i < len(self.fan.rays) for i in self.sigma):
            raise ToricError("sigma references a missing ray")

    def validate(self) -> Diagnostics:
        entries = list(check_fan(self.fan).entries)
        if not any(set(self.sigma) <= set(c) for c in self.fan.max_cones):
            entries.append(
                Diagnostic("error", f"sigma {self.sigma} is not a face of any cone")
            )
        if not entries:
            for wall in walls(self.fan):
                deg = curve_degree(self.fan, wall, self.L)
                if deg < 0:
                    entries.append(
                        Diagnostic("error", f"L not nef: degree {deg} on wall {wall.rays}")
                    )
                if self.H is not None:
                    hdeg = curve_degree(self.fan, wall, self.H)
                    if hdeg <= 0:
                        entries.append(
                            Diagnostic(
                                "error", f"H not ample: degree {hdeg} on wall {wall.rays}"
                            )
                        )
            if polytope_of(self.fan, self.L).volume() <= 0:
                entries.append(Diagnostic("error", "L not big: sections polytope is flat"))
        return Diagnostics(tuple(entries))


def parse_toric_model(doc: dict) -> ToricModel:
    from .models import _require_keys  # shared strict-schema helper

    _require_keys(doc, {"kind", "label", "rays", "max_cones", "L", "sigma"}, {"H"})

    def int_vectors(key):
        v = doc[key]
        if not isinstance(v, list):
            raise ModelError(f"field {key!r} must be a list")
        out = []
        for row in v:
            if not isinstance(row, list) or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in row
            ):
                raise ModelError(f"field {key!r} must hold integer vectors")
            out.append(tuple(row))
        return tuple(out)

    def int_list(key):
        v = doc[key]
        if not isinstance(v, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in v
        ):
            raise ModelError(f"field {key!r} must be a list of integers")
        return tuple(v)

    try:
        fan = Fan(int_vectors("rays"), int_vectors("max_cones"))
        model = ToricModel(
            label=str(doc["label"]),
            fan=fan,
            L=ToricDivisor(int_list("L")),
            sigma=int_list("sigma"),
            H=ToricDivisor(int_list("H")) if "H" in doc else None,
        )
    except ToricError as exc:
        raise ModelError(str(exc)) from exc
    return model


def serialize_toric_model(model: ToricModel) -> dict:
    doc = {
        "kind": "toric",
        "label": model.label,
        "rays": [list(r) for r in model.fan.rays],
        "max_cones": [list(c) for c in model.fan.max_cones],
        "L": [int(c) for c in model.L.coeffs],
        "sigma": list(model.sigma),
    }
    if model.H is not None:
        doc["H"] = [int(c) for c in model.H.coeffs]
    return doc


def _exceptional_setup(model: ToricModel):
    """Subdivided fan, exceptional ray index, and the pullback map."""
    fan1, e_idx = star_subdivide(model.fan, model.sigma)

    def pullback(div: ToricDivisor) -> ToricDivisor:
        if fan1 is model.fan:
            return div
        new_coeff = sum(div.coeffs[i] for i in model.sigma)
        return ToricDivisor(div.coeffs + (new_coeff,))

    return fan1, e_idx, pullback


def _alpha_samples(fan1, e_idx, pi_a, eps, n):
    """Exact alpha polynomials of pi_a - tE from polytope volumes.

    Volumes are sampled at t_i = i*eps/(n+2); the nodes beyond the fit
    degree act as guards against non-polynomial behavior.
    """
    e_div = ToricDivisor(
        tuple(Fraction(int(i == e_idx)) for i in range(len(fan1.rays)))
    )
    t_nodes = [Fraction(i) * eps / (n + 2) for i in range(n + 3)]
    vol_samples = []
    bdy_samples = []
    for t in t_nodes:
        poly = polytope_of(fan1, pi_a - t * e_div)
        vol_samples.append((t, poly.volume()))
        bdy_samples.append((t, poly.boundary_lattice_volume() / 2))
    try:
        alpha0 = fit_polynomial(vol_samples, n)
        alpha1 = fit_polynomial(bdy_samples, n - 1)
    except WitnessMismatch as exc:
        raise ToricError(f"guard-node mismatch, non-polynomial behavior: {exc}") from exc
    return alpha0, alpha1


def _table_entries(alpha0: UniPoly, alpha1: UniPoly, n: int):
    ae = tuple(
        alpha0.coeff(k) * (-1) ** k * factorial(n) / comb(n, k) for k in range(n + 1)
    )
    kae = tuple(
        alpha1.coeff(k) * (-1) ** k * (-2 * factorial(n - 1)) / comb(n - 1, k)
        for k in range(n)
    )
    return ae, kae


def export_table(model: ToricModel):
    """IntersectionTable of (X, L, Z); a MixedTable when H is present.

    alpha polynomials are interpolated from exact truncated-polytope volumes
    and lattice facet volumes, then matched against the binomial expansion
    to recover the individual intersection numbers.
    """
    diags = model.validate()
    if not diags.ok:
        raise ToricError("; ".join(d.message for d in diags.errors))
    n = model.fan.dim
    fan1, e_idx, pullback = _exceptional_setup(model)
    pi_l = pullback(model.L)
    eps = nef_threshold(fan1, pi_l, e_idx)
    alpha0, alpha1 = _alpha_samples(fan1, e_idx, pi_l, eps, n)
    ae, kae = _table_entries(alpha0, alpha1, n)
    if model.H is None:
        return IntersectionTable(model.label, n, ae, kae, eps)

    pi_h = pullback(model.H)
    s_nodes = [Fraction(j, n + 2) for j in range(n + 3)]
    per_s = [
        _alpha_samples(fan1, e_idx, pi_l + s * pi_h, eps, n) for s in s_nodes
    ]
    mixed: dict[tuple[int, int, int], Fraction] = {}
    kmixed: dict[tuple[int, int, int], Fraction] = {}
    try:
        for k in range(n + 1):
            coeff_in_s = fit_polynomial(
                [(s, a0.coeff(k)) for s, (a0, _) in zip(s_nodes, per_s)], n - k
            )
            for j in range(n - k + 1):
                i = n - k - j
                mixed[(i, j, k)] = (
                    coeff_in_s.coeff(j)
                    * (-1) ** k
                    * factorial(i)
                    * factorial(j)
                    * factorial(k)
                )
        for k in range(n):
            coeff_in_s = fit_polynomial(
                [(s, a1.coeff(k)) for s, (_, a1) in zip(s_nodes, per_s)], n - 1 - k
            )
            for j in range(n - k):
                i = n - 1 - k - j
                kmixed[(i, j, k)] = (
                    coeff_in_s.coeff(j)
                    * (-2)
                    * (-1) ** k
                    * factorial(i)
                    * factorial(j)
                    * factorial(k)
                )
    except WitnessMismatch as exc:
        raise ToricError(f"guard-node mismatch in mixed sampling: {exc}") from exc
    return MixedTable(model.label, n, ae, kae, mixed, kmixed, eps)
