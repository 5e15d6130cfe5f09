"""Exact-rational convex polytope engine.

Everything combinatorial lives here: half-space representations, vertex
enumeration, the face lattice, lattice-point counting, Leray boundary
measures, one-parameter families of sliced polytopes and the associated
(n+1)-dimensional test-configuration polytopes.  All geometry in this
module is carried out over ``fractions.Fraction`` so that counts, volumes
and critical values are exact and can serve as oracles for the floating
point analysis modules.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, sqrt
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction
Point = tuple[Fraction, ...]


def _fr(x) -> Fraction:
    """Coerce ints, strings like '3/4' and Fractions to Fraction (exact)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


def _point(coords) -> Point:
    return tuple(_fr(c) for c in coords)


# ---------------------------------------------------------------------------
# small exact linear algebra over Fraction
# ---------------------------------------------------------------------------

def _solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Solve a square rational system by Gaussian elimination.

    Returns the solution tuple, or None if the matrix is singular.
    """
    n = len(rows)
    a = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col]
        a[col] = [v / inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return tuple(a[r][n] for r in range(n))


def _rank(rows: Sequence[Sequence[Fraction]]) -> int:
    a = [list(r) for r in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(a)) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = a[rank][col]
        a[rank] = [v / inv for v in a[rank]]
        for r in range(len(a)):
            if r != rank and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[rank])]
        rank += 1
        if rank == len(a):
            break
    return rank


def _nullspace_vector(rows: Sequence[Sequence[Fraction]], dim: int):
    """A nonzero rational kernel vector of the given rows, or None.

    Only meaningful when the kernel is one-dimensional; used for
    recession-ray candidates.
    """
    a = [list(r) for r in rows]
    ncols = dim
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(a)) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = a[rank][col]
        a[rank] = [v / inv for v in a[rank]]
        for r in range(len(a)):
            if r != rank and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        return None
    # back-substitute with the first free variable set to 1
    v = [Fraction(0)] * ncols
    v[free[0]] = Fraction(1)
    for r, col in enumerate(pivots):
        v[col] = -a[r][free[0]]
    return tuple(v)


def _affine_dim(points: Sequence[Point]) -> int:
    """Dimension of the affine hull of a point set (-1 for empty)."""
    if not points:
        return -1
    if len(points) == 1:
        return 0
    p0 = points[0]
    diffs = [[p[i] - p0[i] for i in range(len(p0))] for p in points[1:]]
    return _rank(diffs)


def _primitive(vec: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a nonzero rational vector to a primitive integer vector.

    The positive scaling factor is unique, so orientation is preserved.
    """
    den = 1
    for v in vec:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g == 0:
        raise ValueError("cannot primitivize the zero vector")
    return tuple(v // g for v in ints)


# ---------------------------------------------------------------------------
# affine functionals and polytopes
# ---------------------------------------------------------------------------

class AffineFunctional:
    """Affine functional ell(x) = <x, normal> - offset with rational data.

    Facet functionals of a polytope are normalized to primitive integer
    normals; cut functionals of a moving family keep their user scale
    (the Leray measures downstream depend on it).  A zero normal is only
    legal for constant cuts (trivial prisms), never for facets.
    """

    __slots__ = ("normal", "offset")

    def __init__(self, normal, offset):
        self.normal: Point = _point(normal)
        self.offset: Fraction = _fr(offset)

    def value(self, x) -> Fraction:
        return sum(_fr(xi) * ni for xi, ni in zip(x, self.normal)) - self.offset

    def value_float(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts @ self.normal_float() - float(self.offset)

    def normal_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.normal])

    def is_constant(self) -> bool:
        return all(v == 0 for v in self.normal)

    def normalized(self) -> "AffineFunctional":
        """Positive rescaling with primitive integer normal."""
        if self.is_constant():
            raise ValueError("cannot normalize a functional with zero normal")
        prim = _primitive(self.normal)
        idx = next(i for i, v in enumerate(self.normal) if v != 0)
        scale = Fraction(prim[idx]) / self.normal[idx]
        return AffineFunctional(prim, self.offset * scale)

    def shifted(self, t) -> "AffineFunctional":
        """The functional x -> self(x) - t, i.e. the cut at level t."""
        return AffineFunctional(self.normal, self.offset + _fr(t))

    def key(self):
        return (self.normal, self.offset)

    def __eq__(self, other):
        return isinstance(other, AffineFunctional) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        terms = " + ".join(f"{n}*x{i}" for i, n in enumerate(self.normal) if n != 0)
        return f"AffineFunctional({terms or '0'} - {self.offset})"


@dataclass(frozen=True)
class Face:
    """A proper face of a polytope, recorded by its active facet set."""

    active_facets: frozenset
    codim: int
    vertex_ids: tuple
    affine_basis: tuple  # primitive integer (or rational-primitivized) tangent directions


class Polytope:
    """Bounded rational polytope in half-space representation.

    Vertices, the face lattice, triangulations and volumes are computed
    exactly and cached.  Degenerate content (empty or lower-dimensional,
    which arises for slices P(t) of moving families) is permitted when
    ``require_full_dim=False``.
    """

    def __init__(self, dim: int, facets: Iterable[AffineFunctional],
                 require_full_dim: bool = True, _normalize: bool = True):
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError("polytope dimension must be >= 1")
        facets = list(facets)
        if _normalize:
            facets = [f.normalized() for f in facets]
        seen = {}
        for f in facets:
            if f.key() in seen:
                raise ValueError(f"duplicate facet inequality {f!r}")
            seen[f.key()] = f
        self.facets: list[AffineFunctional] = facets
        self._vertices: list[Point] | None = None
        self._faces: dict[int, list[Face]] = {}
        self._triangulation: list[tuple[Point, ...]] | None = None
        self._volume: Fraction | None = None
        if require_full_dim:
            self._validate_full_dim()

    # -- vertices ----------------------------------------------------------

    @property
    def vertices(self) -> list[Point]:
        """All vertices, exact and lexicographically sorted."""
        if self._vertices is None:
            self._vertices = _candidate_vertices(self.facets, self.dim)
        return self._vertices

    def _validate_full_dim(self):
        if len(self.facets) < self.dim + 1:
            raise ValueError(
                f"unbounded polytope: only {len(self.facets)} facets in dimension {self.dim}")
        normals = [f.normal for f in self.facets]
        if _rank(normals) < self.dim:
            raise ValueError("unbounded polytope: facet normals do not span")
        ray = _recession_ray(normals, self.dim)
        if ray is not None:
            raise ValueError(f"unbounded polytope: recession ray {ray}")
        if not self.vertices:
            raise ValueError("empty polytope: no vertex satisfies all inequalities")
        c = self.centroid_of_vertices()
        for f in self.facets:
            if f.value(c) == 0:
                raise ValueError(
                    f"polytope is not full-dimensional: contained in {f!r} = 0")

    def centroid_of_vertices(self) -> Point:
        vs = self.vertices
        n = len(vs)
        return tuple(sum(v[i] for v in vs) / n for i in range(self.dim))

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def is_full_dim(self) -> bool:
        return _affine_dim(self.vertices) == self.dim

    def contains(self, x, strict: bool = False) -> bool:
        pt = _point(x)
        if strict:
            return all(f.value(pt) > 0 for f in self.facets)
        return all(f.value(pt) >= 0 for f in self.facets)

    def bounding_box(self) -> tuple[Point, Point]:
        vs = self.vertices
        lo = tuple(min(v[i] for v in vs) for i in range(self.dim))
        hi = tuple(max(v[i] for v in vs) for i in range(self.dim))
        return lo, hi

    # -- face lattice ------------------------------------------------------

    def faces(self, codim: int) -> list[Face]:
        """Faces of the given codimension (1 <= codim <= dim).

        active_facets is the full set of facets vanishing on the face; the
        spec of a convex polytope guarantees codim-2 faces have exactly two.
        """
        if codim in self._faces:
            return self._faces[codim]
        if not 1 <= codim <= self.dim:
            raise ValueError(f"codim must be in 1..{self.dim}")
        verts = self.vertices
        onfacet = [frozenset(i for i, v in enumerate(verts) if f.value(v) == 0)
                   for f in self.facets]
        target = self.dim - codim
        found: dict[frozenset, Face] = {}
        for combo in itertools.combinations(range(len(self.facets)), codim):
            common = frozenset.intersection(*(onfacet[a] for a in combo))
            if not common:
                continue
            pts = [verts[i] for i in common]
            if _affine_dim(pts) != target:
                continue
            if common in found:
                continue
            active = frozenset(a for a in range(len(self.facets))
                               if common <= onfacet[a])
            basis = _tangent_basis(pts)
            found[common] = Face(active_facets=active, codim=codim,
                                 vertex_ids=tuple(sorted(common)),
                                 affine_basis=basis)
        faces = sorted(found.values(), key=lambda f: f.vertex_ids)
        self._faces[codim] = faces
        return faces

    def facet_vertex_ids(self, a: int) -> tuple:
        f = self.facets[a]
        return tuple(i for i, v in enumerate(self.vertices) if f.value(v) == 0)

    def essential_facets(self) -> list[int]:
        """Indices of facets that actually carry an (n-1)-dimensional face."""
        out = []
        for a in range(len(self.facets)):
            ids = self.facet_vertex_ids(a)
            if _affine_dim([self.vertices[i] for i in ids]) == self.dim - 1:
                out.append(a)
        return out

    # -- triangulation and exact measures -----------------------------------

    def triangulation(self) -> list[tuple[Point, ...]]:
        """Fan from the vertex centroid over recursively triangulated facets.

        Simplex volumes sum to Vol(P) exactly.
        """
        if self._triangulation is not None:
            return self._triangulation
        if self.is_empty or not self.is_full_dim:
            self._triangulation = []
            return self._triangulation
        self._triangulation = self._triangulate_face(
            tuple(range(len(self.vertices))), self.dim)
        return self._triangulation

    def _subface_vertex_sets(self, vertex_ids: tuple, m: int) -> list[tuple]:
        """Vertex sets of the (m-1)-faces of the face spanned by vertex_ids."""
        want = set(vertex_ids)
        codim = self.dim - (m - 1)
        subs = []
        for face in self.faces(codim):
            if set(face.vertex_ids) <= want:
                subs.append(face.vertex_ids)
        return subs

    def _triangulate_face(self, vertex_ids: tuple, m: int) -> list[tuple[Point, ...]]:
        verts = [self.vertices[i] for i in vertex_ids]
        if len(verts) == m + 1:
            return [tuple(verts)]
        if m == 1:
            lo = min(verts)
            hi = max(verts)
            return [(lo, hi)]
        c = tuple(sum(v[i] for v in verts) / len(verts) for i in range(self.dim))
        simplices = []
        for sub in self._subface_vertex_sets(vertex_ids, m):
            for s in self._triangulate_face(sub, m - 1):
                simplices.append(s + (c,))
        return simplices

    def volume(self) -> Fraction:
        """Exact Lebesgue volume."""
        if self._volume is None:
            total = Fraction(0)
            for s in self.triangulation():
                total += _simplex_volume(s)
            self._volume = total
        return self._volume

    def facet_triangulation(self, a: int) -> list[tuple[Point, ...]]:
        """(n-1)-simplices exactly covering facet a."""
        ids = self.facet_vertex_ids(a)
        if _affine_dim([self.vertices[i] for i in ids]) != self.dim - 1:
            return []
        return self._triangulate_face(ids, self.dim - 1)

    def face_triangulation(self, face: Face) -> list[tuple[Point, ...]]:
        m = self.dim - face.codim
        if m == 0:
            return [tuple(self.vertices[i] for i in face.vertex_ids)]
        return self._triangulate_face(face.vertex_ids, m)

    def facet_leray_volume(self, a: int) -> Fraction:
        """Exact Leray measure of facet a: d(sigma) d(ell_a) = dx."""
        return sum((leray_simplex_measure(s, self.facets[a])
                    for s in self.facet_triangulation(a)), Fraction(0))

    def boundary_leray_volume(self) -> Fraction:
        return sum((self.facet_leray_volume(a) for a in range(len(self.facets))),
                   Fraction(0))

    # -- lattice points ------------------------------------------------------

    def lattice_points(self, k: int) -> list[tuple[int, ...]]:
        """Integer points of k*P, via bounding box plus exact membership."""
        if k < 1:
            raise ValueError("scaling factor k must be a positive integer")
        if self.is_empty:
            return []
        lo, hi = self.bounding_box()
        los = [int(np.ceil(float(c * k))) for c in lo]
        his = [int(np.floor(float(c * k))) for c in hi]
        # guard against float rounding on the exact rational bounds
        los = [l - 1 for l in los]
        his = [h + 1 for h in his]
        axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(los, his)]
        if any(len(ax) == 0 for ax in axes):
            return []
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        mask = np.ones(len(pts), dtype=bool)
        for f in self.facets:
            den = 1
            for v in f.normal:
                den = den * v.denominator // gcd(den, v.denominator)
            den = den * f.offset.denominator // gcd(den, f.offset.denominator)
            nu = np.array([int(v * den) for v in f.normal], dtype=np.int64)
            lam = int(f.offset * den)
            mask &= pts @ nu >= k * lam
        kept = pts[mask]
        return [tuple(int(c) for c in row) for row in
                sorted(map(tuple, kept.tolist()))]

    def count_lattice_points(self, k: int) -> int:
        return len(self.lattice_points(k))

    def integrality_divisor(self) -> int:
        """Smallest N with N*P an integral polytope (lcm of vertex denominators)."""
        den = 1
        for v in self.vertices:
            for c in v:
                den = den * c.denominator // gcd(den, c.denominator)
        return den

    def interior_float_grid(self, per_axis: int) -> np.ndarray:
        """Strictly interior float sample points on a bounding-box grid."""
        lo, hi = self.bounding_box()
        axes = [np.linspace(float(l), float(h), per_axis + 2)[1:-1]
                for l, h in zip(lo, hi)]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        margin = 1e-9
        mask = np.ones(len(pts), dtype=bool)
        for f in self.facets:
            mask &= f.value_float(pts) > margin
        pts = pts[mask]
        if len(pts) == 0:
            pts = np.array([[float(c) for c in self.centroid_of_vertices()]])
        return pts

    def __repr__(self):
        return f"Polytope(dim={self.dim}, facets={len(self.facets)}, vertices={len(self.vertices)})"


def _simplex_volume(simplex: Sequence[Point]) -> Fraction:
    n = len(simplex) - 1
    p0 = simplex[0]
    rows = [[p[i] - p0[i] for i in range(n)] for p in simplex[1:]]
    det = _det(rows)
    fact = 1
    for i in range(2, n + 1):
        fact *= i
    return abs(det) / fact


def _det(rows) -> Fraction:
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] / inv
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return det


def leray_simplex_measure(simplex: Sequence[Point], ell: AffineFunctional) -> Fraction:
    """Exact Leray measure of an (n-1)-simplex on the hyperplane {ell = 0}.

    Uses the projection identity d(sigma) = dx_{-j} / |nu_j|: dropping a
    coordinate j with nu_j != 0 keeps everything rational.
    """
    grad = ell.normal
    j = max(range(len(grad)), key=lambda i: abs(grad[i]))
    if grad[j] == 0:
        raise ValueError("Leray measure undefined for zero normal")
    proj = [tuple(c for i, c in enumerate(p) if i != j) for p in simplex]
    return _simplex_volume(proj) / abs(grad[j])


def _tangent_basis(points: Sequence[Point]) -> tuple:
    """Independent primitive integer directions spanning the affine hull."""
    if len(points) < 2:
        return ()
    p0 = points[0]
    basis_rows: list[list[Fraction]] = []
    basis_out = []
    for p in points[1:]:
        d = [p[i] - p0[i] for i in range(len(p0))]
        if all(v == 0 for v in d):
            continue
        if _rank(basis_rows + [d]) > len(basis_rows):
            basis_rows.append(d)
            basis_out.append(_primitive(d))
    return tuple(basis_out)


def _recession_ray(normals: Sequence[Point], dim: int):
    """A nonzero rational v with <nu_a, v> >= 0 for all a, if one exists."""
    if _rank(normals) < dim:
        # kernel of all normals gives a line in the recession cone
        v = _nullspace_vector(list(normals), dim)
        return v
    for combo in itertools.combinations(range(len(normals)), dim - 1):
        rows = [list(normals[a]) for a in combo]
        if rows and _rank(rows) != dim - 1:
            continue
        v = _nullspace_vector(rows, dim)
        if v is None:
            continue
        for cand in (v, tuple(-c for c in v)):
            if all(sum(n[i] * cand[i] for i in range(dim)) >= 0 for n in normals):
                return cand
    return None


def _candidate_vertices(facets: Sequence[AffineFunctional], dim: int) -> list[Point]:
    pts: dict[Point, None] = {}
    for combo in itertools.combinations(range(len(facets)), dim):
        rows = [facets[a].normal for a in combo]
        rhs = [facets[a].offset for a in combo]
        x = _solve(rows, rhs)
        if x is None:
            continue
        if all(f.value(x) >= 0 for f in facets):
            pts[x] = None
    return sorted(pts.keys())


# ---------------------------------------------------------------------------
# spec operations
# ---------------------------------------------------------------------------

def enumerate_vertices(facets: Sequence[AffineFunctional], dim: int) -> list[Point]:
    """Vertices of a bounded full-dimensional polytope, exact and sorted.

    Brute force over all dim-subsets of facet equalities with feasibility
    filtering; raises naming the violated condition otherwise.
    """
    return Polytope(dim, facets).vertices


@dataclass
class VertexCertificate:
    vertex: Point
    edge_directions: tuple
    determinant: int
    simple: bool
    ok: bool
    reason: str = ""


@dataclass
class DelzantReport:
    is_delzant: bool
    is_integral: bool
    certificates: list[VertexCertificate] = field(default_factory=list)


def check_delzant(P: Polytope) -> DelzantReport:
    """Delzant test: n primitive edge directions at each vertex with det +-1.

    Integrality of the facet offsets is reported separately.
    """
    verts = P.vertices
    n = P.dim
    certs = []
    ok_all = True
    for v in verts:
        active = [a for a, f in enumerate(P.facets) if f.value(v) == 0]
        if len(active) != n:
            certs.append(VertexCertificate(
                vertex=v, edge_directions=(), determinant=0, simple=False,
                ok=False, reason=f"non-simple vertex: {len(active)} facets active"))
            ok_all = False
            continue
        dirs = []
        good = True
        for drop in active:
            rows = [list(P.facets[a].normal) for a in active if a != drop]
            d = _nullspace_vector(rows, n) if rows else (Fraction(1),)
            if d is None:
                good = False
                break
            prim = _primitive(d)
            # orient inward: positive on the dropped facet functional
            s = sum(P.facets[drop].normal[i] * prim[i] for i in range(n))
            if s < 0:
                prim = tuple(-c for c in prim)
            dirs.append(prim)
        if not good:
            certs.append(VertexCertificate(
                vertex=v, edge_directions=(), determinant=0, simple=True,
                ok=False, reason="degenerate edge directions"))
            ok_all = False
            continue
        det = int(_det([[Fraction(c) for c in d] for d in dirs]))
        ok = abs(det) == 1
        certs.append(VertexCertificate(
            vertex=v, edge_directions=tuple(dirs), determinant=det,
            simple=True, ok=ok,
            reason="" if ok else f"edge-direction determinant {det} at {v}"))
        ok_all = ok_all and ok
    integral = all(f.offset.denominator == 1 for f in P.facets) and \
        all(c.denominator == 1 for v in verts for c in v)
    return DelzantReport(is_delzant=ok_all, is_integral=integral, certificates=certs)


def count_lattice_points(P: Polytope, k: int) -> int:
    """|Z^n cap kP|, exact."""
    return P.count_lattice_points(k)


def leray_facet_density(ell: AffineFunctional) -> float:
    """Density converting Euclidean (n-1)-measure to the Leray measure dsigma.

    Defined by d(sigma) d(ell) = dx, i.e. 1/||grad ell||_2.
    """
    g = ell.normal_float()
    nrm = float(np.linalg.norm(g))
    if nrm == 0.0:
        raise ValueError("Leray density undefined: zero normal")
    return 1.0 / nrm


def leray_codim2_density(ell_a: AffineFunctional, ell_b: AffineFunctional) -> float:
    """Density for the codimension-2 Leray measure: d(tau) d(ell_a) d(ell_b) = dx."""
    ga = ell_a.normal_float()
    gb = ell_b.normal_float()
    gram = np.array([[ga @ ga, ga @ gb], [ga @ gb, gb @ gb]])
    det = float(np.linalg.det(gram))
    if det <= 0.0 or abs(det) < 1e-30:
        raise ValueError("no codimension-2 face: gradients are parallel")
    return 1.0 / sqrt(det)


def seshadri_constant(P: Polytope, phi: AffineFunctional) -> Fraction:
    """min of phi over the vertices where it is positive.

    Requires phi >= 0 on P (checked at the vertices).
    """
    vals = [phi.value(v) for v in P.vertices]
    if any(v < 0 for v in vals):
        raise ValueError("functional is negative on the polytope")
    pos = [v for v in vals if v > 0]
    if not pos:
        raise ValueError("functional vanishes on all vertices")
    return min(pos)


# ---------------------------------------------------------------------------
# moving families, slices, test configurations
# ---------------------------------------------------------------------------

@dataclass
class Slice:
    """P(t) = P cap {Phi_a >= t} with its facets partitioned new/old.

    ``polytope`` is None when the slice is empty; ``new_facets`` pairs the
    active cut index with the unnormalized functional Phi_a - t whose scale
    defines the Leray measure of that facet.
    """

    t: Fraction
    polytope: Polytope | None
    new_facets: list[tuple[int, AffineFunctional]]
    old_facets: list[int]  # indices into polytope.facets
    new_facet_ids: list[int]  # indices into polytope.facets, aligned with new_facets

    @property
    def is_empty(self) -> bool:
        return self.polytope is None

    @property
    def active_cuts(self) -> list[int]:
        return [a for a, _ in self.new_facets]


class MovingFamily:
    """A base polytope with affine cut functions Phi_a defining P(t)."""

    def __init__(self, base: Polytope, cuts: Sequence[AffineFunctional]):
        self.base = base
        self.cuts = list(cuts)
        for phi in self.cuts:
            if min(phi.value(v) for v in base.vertices) < 0:
                raise ValueError(
                    f"cut {phi!r} is negative on the base polytope; P(0) != P")
        self._criticals: list[Fraction] | None = None

    def slice(self, t) -> Slice:
        """P(t), with facets partitioned into new (active cuts) and old."""
        t = _fr(t)
        shifted = [phi.shifted(t) for phi in self.cuts]
        old_keys = {f.key() for f in self.base.facets}
        keep: list[AffineFunctional] = list(self.base.facets)
        provenance: list[tuple[str, int]] = [("old", a) for a in range(len(self.base.facets))]
        for a, s in enumerate(shifted):
            if s.is_constant():
                if s.offset > 0:  # constant cut already violated
                    return Slice(t, None, [], [], [])
                continue
            if s.normalized().key() in old_keys:
                continue  # cut coincides with an original facet: not "new"
            keep.append(s)
            provenance.append(("new", a))
        # drop exact duplicates among the shifted cuts themselves
        uniq: dict = {}
        for f, prov in zip(keep, provenance):
            k = f.normalized().key() if not f.is_constant() else f.key()
            if k not in uniq:
                uniq[k] = (f, prov)
        keep = [f for f, _ in uniq.values()]
        provenance = [p for _, p in uniq.values()]

        verts = _candidate_vertices([f.normalized() for f in keep], self.base.dim)
        if not verts:
            return Slice(t, None, [], [], [])
        if _affine_dim(verts) < self.base.dim:
            return Slice(t, None, [], [], [])
        # essential facets only
        ess_facets, ess_prov = [], []
        for f, prov in zip(keep, provenance):
            fn = f.normalized()
            on = [v for v in verts if fn.value(v) == 0]
            if _affine_dim(on) == self.base.dim - 1:
                ess_facets.append(f)
                ess_prov.append(prov)
        poly = Polytope(self.base.dim, [f.normalized() for f in ess_facets],
                        require_full_dim=False, _normalize=False)
        new_facets, new_ids, old_ids = [], [], []
        for i, (f, prov) in enumerate(zip(ess_facets, ess_prov)):
            if prov[0] == "new" and t != 0:
                new_facets.append((prov[1], f))
                new_ids.append(i)
            else:
                old_ids.append(i)
        return Slice(t, poly, new_facets, old_ids, new_ids)

    def critical_values(self) -> list[Fraction]:
        """The t at which the combinatorics of P(t) jumps: exact, sorted.

        Computed from the last coordinates of the vertices of the
        test-configuration polytope; 0 is always included.
        """
        if self._criticals is None:
            gamma = build_test_config(self).gamma
            vals = {Fraction(0)}
            vals.update(v[-1] for v in gamma.vertices)
            self._criticals = sorted(vals)
        return self._criticals

    def is_regular(self, t) -> bool:
        return _fr(t) not in self.critical_values()

    def regularity_interval(self, t) -> tuple[Fraction, Fraction]:
        """The open critical interval containing a regular t."""
        t = _fr(t)
        crit = self.critical_values()
        if t in crit:
            raise ValueError(f"t = {t} is a critical value of the family")
        lo = max((c for c in crit if c < t), default=None)
        hi = min((c for c in crit if c > t), default=None)
        if lo is None or t < 0:
            raise ValueError(f"t = {t} is below the family range")
        return lo, (hi if hi is not None else Fraction(10**9))

    def top_critical_value(self) -> Fraction:
        return self.critical_values()[-1]


@dataclass
class RoofRidge:
    """Codimension-2 face of Gamma lying on two roof facets."""

    cut_a: int
    cut_b: int
    vertex_ids: tuple
    horizontal: bool


@dataclass
class TestConfigPolytope:
    """The (n+1)-dimensional polytope Gamma of a toric test configuration."""

    family: MovingFamily
    gamma: Polytope
    roof_facets: dict  # cut index -> facet index in gamma
    side_facets: list[int]
    base_facet: int
    roof_skeleton: list[RoofRidge]

    def roof_functionals(self) -> dict:
        """Unnormalized lifted cut functionals Phi_a(x) - t on R^{n+1}."""
        out = {}
        for a, phi in enumerate(self.family.cuts):
            out[a] = AffineFunctional(tuple(phi.normal) + (Fraction(-1),), phi.offset)
        return out

    def side_leray_volume(self) -> Fraction:
        return sum((self.gamma.facet_leray_volume(i) for i in self.side_facets),
                   Fraction(0))


def build_test_config(family: MovingFamily) -> TestConfigPolytope:
    """Construct Gamma = {x in P, t >= 0, Phi_a(x) - t >= 0} and classify facets."""
    P = family.base
    n = P.dim
    if not family.cuts:
        raise ValueError("unbounded test configuration: the family has no cuts")
    lifted: list[AffineFunctional] = []
    provenance: list[tuple[str, int]] = []
    for a, f in enumerate(P.facets):
        lifted.append(AffineFunctional(tuple(f.normal) + (Fraction(0),), f.offset))
        provenance.append(("side", a))
    base = AffineFunctional((Fraction(0),) * n + (Fraction(1),), 0)
    lifted.append(base)
    provenance.append(("base", -1))
    for a, phi in enumerate(family.cuts):
        lifted.append(AffineFunctional(tuple(phi.normal) + (Fraction(-1),), phi.offset))
        provenance.append(("roof", a))
    try:
        full = Polytope(n + 1, [f.normalized() for f in lifted], _normalize=False)
    except ValueError as exc:
        raise ValueError(f"unbounded or degenerate test configuration: {exc}") from exc

    # keep only essential inequalities so every facet of gamma is a facet
    essential = full.essential_facets()
    gamma = Polytope(n + 1, [full.facets[i] for i in essential], _normalize=False)
    roof, sides, base_id = {}, [], None
    for new_idx, old_idx in enumerate(essential):
        kind, a = provenance[old_idx]
        if kind == "roof":
            roof[a] = new_idx
        elif kind == "side":
            sides.append(new_idx)
        else:
            base_id = new_idx
    if base_id is None:
        raise ValueError("degenerate test configuration: base facet t=0 missing")

    verts = gamma.vertices
    onfacet = {idx: frozenset(i for i, v in enumerate(verts)
                              if gamma.facets[idx].value(v) == 0)
               for idx in range(len(gamma.facets))}
    skeleton = []
    for a, b in itertools.combinations(sorted(roof), 2):
        common = onfacet[roof[a]] & onfacet[roof[b]]
        pts = [verts[i] for i in common]
        if _affine_dim(pts) != n - 1:
            continue
        horiz = len({p[-1] for p in pts}) == 1
        skeleton.append(RoofRidge(cut_a=a, cut_b=b,
                                  vertex_ids=tuple(sorted(common)),
                                  horizontal=horiz))
    return TestConfigPolytope(family=family, gamma=gamma, roof_facets=roof,
                              side_facets=sorted(sides), base_facet=base_id,
                              roof_skeleton=skeleton)


# convenience constructors ---------------------------------------------------

def box(widths) -> Polytope:
    """Axis-aligned box [0,w1] x ... x [0,wn]."""
    n = len(widths)
    facets = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        facets.append(AffineFunctional(e, 0))
        facets.append(AffineFunctional([-v for v in e], -_fr(widths[i])))
    return Polytope(n, facets)


def standard_simplex(n: int, scale=1) -> Polytope:
    """{x >= 0, sum x_i <= scale}."""
    facets = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        facets.append(AffineFunctional(e, 0))
    facets.append(AffineFunctional([-1] * n, -_fr(scale)))
    return Polytope(n, facets)
