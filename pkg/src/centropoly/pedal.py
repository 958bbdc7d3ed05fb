"""Planar parallel pairs, liftings, and the affine cylindrical pedal.

A planar pair (x, u) is a closed planar polygon with a transversal field u
whose increments are tangential, u' = -b x'.  Its lifting places the polygon
in the plane z = 1 with a horizontal field; the affine cylindrical pedal

    Y(i+1/2) = (y(i+1/2), -y(i+1/2) . x(i))

built from the co-normal y (y . x' = 0, y . u = 1) is exactly the dual of
the lifting, with the constant field E = (0, 0, 1) as dual field.  Pairs
(Y, E) with constant E are precisely the constant-curvature pairs, and
every such polygon is the pedal of a planar pair; ``unpedal`` inverts the
construction globally.

The module also carries the planar support used by the spatial flattening
machinery: convexity by winding index, exact fields, planar vertices, and
radial projection onto z = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cyclic import (
    DEFAULT_TOL,
    EdgeSeq,
    NodeSeq,
    ToleranceConfig,
    area2,
    as_vec2,
    as_vec3,
    det3,
    edge_diff,
    strict_signs,
)
from .duality import DualPair, dual_pair
from .errors import (
    DegenerateSign,
    DualityResidual,
    NonProjectable,
    NonTransversal,
    NotExact,
    NotGeneric,
    NotPlanarDual,
)
from .invariants import FramedPolygon, is_constant_curvature, tangential_ratio

_E3 = np.array([0.0, 0.0, 1.0])

# Total-turning test for the winding index; the index is an integer so this
# only needs to separate 2*pi from its multiples.
TURNING_TOL = 1e-6


class PlanarPair:
    """A planar polygon x with a transversal planar field u.

    Transversality means [x'(i+1/2), u(i)] > 0 on every edge.  The optional
    planar origin shifts x before any lifting.
    """

    __slots__ = ("x", "u", "origin2", "__dict__")

    def __init__(self, x: NodeSeq, u: NodeSeq, origin2=(0.0, 0.0)):
        if x.values.ndim != 2 or x.values.shape[1] != 2:
            raise ValueError("x must hold 2-vectors")
        if u.values.shape != x.values.shape:
            raise ValueError("u must hold one 2-vector per node")
        self.x = x
        self.u = u
        self.origin2 = as_vec2(origin2)
        if not np.all(self.beta_values > 0.0):
            k = int(np.argmin(self.beta_values))
            raise NonTransversal(f"planar field is not transversal at edge slot {k}")

    @property
    def n(self) -> int:
        return self.x.n

    @cached_property
    def centered(self) -> np.ndarray:
        return self.x.values - self.origin2

    @cached_property
    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.centered, -1, axis=0) - self.centered

    @cached_property
    def beta_values(self) -> np.ndarray:
        """[x'(i+1/2), u(i)] in slot i."""
        return area2(self.edge_vectors, self.u.values)

    def __repr__(self):
        return f"PlanarPair(n={self.n})"


def planar_curvature(pp: PlanarPair, tol: ToleranceConfig = DEFAULT_TOL) -> EdgeSeq:
    """Edge curvatures of a parallel planar field: u' = -b x'."""
    du = np.roll(pp.u.values, -1, axis=0) - pp.u.values
    return EdgeSeq(tangential_ratio(du, pp.edge_vectors, tol))


def co_normal(pp: PlanarPair) -> EdgeSeq:
    """Co-normal covectors y(i+1/2) with y . x' = 0 and y . u(i) = 1.

    Transversality makes the 2x2 system uniquely solvable; in closed form y
    is the quarter-turn of x' divided by [x', u].
    """
    e = pp.edge_vectors
    rot = np.stack([-e[:, 1], e[:, 0]], axis=1)
    return EdgeSeq(rot / pp.beta_values[:, None])


def lift(pp: PlanarPair) -> FramedPolygon:
    """Lift to the spatial pair X = (x, 1), U = (u, 0) about the origin.

    Local convexity of the lift is equivalent to positive consecutive
    edge-vector areas of x and is validated by the framed-polygon
    constructor; transversality carries over edge by edge.
    """
    n = pp.n
    X = NodeSeq(np.column_stack([pp.centered, np.ones(n)]))
    U = NodeSeq(np.column_stack([pp.u.values, np.zeros(n)]))
    return FramedPolygon(X, U)


@dataclass(frozen=True)
class PedalResult:
    """Pedal polygon Y = (y, -y . x) with its planar co-normals and heights."""

    Y: EdgeSeq
    y: EdgeSeq
    heights: EdgeSeq


def cylindrical_pedal(pp: PlanarPair, tol: ToleranceConfig = DEFAULT_TOL) -> PedalResult:
    """Affine cylindrical pedal of a parallel planar pair.

    Cross-checked against the dual of the lifting: the pedal with the
    constant field (0, 0, 1) must reproduce dual_pair(lift(pp)), and the
    resulting pair must have constant curvature.
    """
    planar_curvature(pp, tol)  # parallelism gate
    y = co_normal(pp).values
    heights = -np.einsum("ij,ij->i", y, pp.centered)
    Yv = np.column_stack([y, heights])

    D = dual_pair(lift(pp), tol)
    scale = max(float(np.max(np.abs(Yv))), 1.0)
    if np.max(np.abs(D.Y.values - Yv)) > tol.tol_residual * scale:
        raise DualityResidual("pedal deviates from the dual of the lifting")
    if np.max(np.abs(D.V.values - _E3)) > tol.tol_residual:
        raise DualityResidual("dual field of the lifting is not the vertical constant")
    shifted = FramedPolygon(NodeSeq(Yv), NodeSeq(np.tile(_E3, (pp.n, 1))))
    constant, _ = is_constant_curvature(shifted, tol)
    if not constant:
        raise DualityResidual("pedal pair failed the constant-curvature check")
    return PedalResult(Y=EdgeSeq(Yv), y=EdgeSeq(y), heights=EdgeSeq(heights))


def constant_field_frame(E) -> np.ndarray:
    """A unimodular matrix whose third row is E, rows built by Gram-Schmidt.

    The first two rows orthonormalize the coordinate axes least aligned with
    E; one of them is rescaled so the determinant is exactly one.  For
    E = (0, 0, 1) this is the identity.
    """
    E = as_vec3(E)
    norm = np.linalg.norm(E)
    if norm == 0.0:
        raise ValueError("the constant field must be nonzero")
    ehat = E / norm
    first, second = np.argsort(np.abs(E), kind="stable")[:2]
    a = np.eye(3)[first] - np.dot(np.eye(3)[first], ehat) * ehat
    a /= np.linalg.norm(a)
    b = np.eye(3)[second] - np.dot(np.eye(3)[second], ehat) * ehat - np.dot(np.eye(3)[second], a) * a
    b /= np.linalg.norm(b)
    if np.dot(np.cross(a, b), E) < 0.0:
        a, b = b, a
    M = np.stack([a / norm, b, E])
    return M


def unpedal(Y, E, tol: ToleranceConfig = DEFAULT_TOL) -> PlanarPair:
    """Recover the planar pair whose pedal is the polygon Y transversal to constant E.

    The dual of (Y, E) is a planar pair lying in the plane E . p = 1 with a
    field parallel to that plane; an affine normalization with unit
    determinant maps the plane to z = 1.  Accepts Y as either an EdgeSeq or
    a NodeSeq; slot k of the result pairs with slots (k-1, k) of Y, so
    pedals invert with no index shift.
    """
    E = as_vec3(E)
    Yv = Y.values if isinstance(Y, (NodeSeq, EdgeSeq)) else np.asarray(Y, dtype=float)
    bd = det3(np.roll(Yv, 1, axis=0), Yv, np.broadcast_to(E, Yv.shape))
    if np.all(bd < 0.0):
        Yv = Yv[::-1]
        bd = det3(np.roll(Yv, 1, axis=0), Yv, np.broadcast_to(E, Yv.shape))
    if not np.all(bd > 0.0):
        raise NonTransversal("the constant field is not transversal to the polygon")
    Xv = np.cross(np.roll(Yv, 1, axis=0), Yv) / bd[:, None]
    dY = Yv - np.roll(Yv, 1, axis=0)
    Uv = np.cross(dY, np.broadcast_to(E, Yv.shape)) / bd[:, None]

    plane = Xv @ E
    if np.max(np.abs(plane - 1.0)) > tol.tol_residual:
        raise NotPlanarDual("dual polygon left the incidence plane")
    M = constant_field_frame(E)
    Xn = Xv @ M.T
    Un = Uv @ M.T
    if np.max(np.abs(Un[:, 2])) > tol.tol_residual * max(1.0, float(np.max(np.abs(Un)))):
        raise NotPlanarDual("dual field left the incidence plane direction space")
    pp = PlanarPair(NodeSeq(Xn[:, :2]), NodeSeq(Un[:, :2]))

    back = cylindrical_pedal(pp, tol).Y.values
    target = Yv @ np.linalg.inv(M)  # (M^-T Y) rowwise
    if np.max(np.abs(back - target)) > tol.tol_residual * max(1.0, float(np.max(np.abs(target)))):
        raise NotPlanarDual("re-pedaled pair failed to reproduce the input polygon")
    return pp


def is_convex(poly: NodeSeq, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Convexity with orientation: strict left turns and total turning 2*pi.

    Local turn signs alone admit star polygons that wind more than once;
    requiring the summed exterior angles to equal 2*pi (winding index one)
    excludes them.  Three collinear consecutive nodes have no strict turn
    sign and raise DegenerateSign.
    """
    e = np.roll(poly.values, -1, axis=0) - poly.values
    prev = np.roll(e, 1, axis=0)
    turns = area2(prev, e)
    signs = strict_signs(turns, tol)
    if np.any(signs == 0):
        raise DegenerateSign("three consecutive nodes are collinear")
    if not np.all(signs == 1):
        return False
    angles = np.arctan2(turns, np.einsum("ij,ij->i", prev, e))
    return bool(abs(float(np.sum(angles)) - 2.0 * np.pi) <= TURNING_TOL)


def is_exact(y: NodeSeq, v: NodeSeq, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[bool, EdgeSeq | None]:
    """Test v' = -b y' slotwise and return the curvatures when exact."""
    dy = np.roll(y.values, -1, axis=0) - y.values
    dv = np.roll(v.values, -1, axis=0) - v.values
    try:
        b = tangential_ratio(dv, dy, tol)
    except Exception:
        return False, None
    return True, EdgeSeq(b)


def planar_vertices(y: NodeSeq, v: NodeSeq, tol: ToleranceConfig = DEFAULT_TOL) -> list[int]:
    """Vertex edges of an exact planar pair, labeled in the half-integer-node frame.

    The stored slots of y are read as the nodes y(k+1/2), so edge i joins
    slots i-1 and i; index i is returned when the curvature difference
    changes sign across that edge.  These labels coincide with the
    flattening node labels of a source spatial polygon under duality.
    """
    ok, b = is_exact(y, v, tol)
    if not ok:
        raise NotExact("the field is not exact with respect to the polygon")
    d = edge_diff(b).values
    signs = strict_signs(d, tol)
    if np.any(signs == 0):
        raise NotGeneric("a curvature difference has no strict sign")
    flips = signs * np.roll(signs, -1) < 0
    n = y.n
    return sorted((int(j) + 1) % n for j in np.nonzero(flips)[0])


@dataclass(frozen=True)
class RadialInstance:
    """A spatial polygon X(i) = lam(i) * (gamma(i), 1) over a planar polygon gamma."""

    gamma: NodeSeq
    lam: NodeSeq
    X: NodeSeq
    gamma_convex: bool
    origin_interior: bool


def make_radial_instance(gamma: NodeSeq, lam: NodeSeq, tol: ToleranceConfig = DEFAULT_TOL) -> RadialInstance:
    """Assemble X = lam * (gamma, 1), re-centering gamma when (0,0) is not interior."""
    if np.any(lam.values <= 0.0):
        raise ValueError("radial scales must be positive")
    g = gamma.values
    if _origin_interior(g):
        interior = True
    else:
        shift = _area_centroid(g)
        g = g - shift
        interior = _origin_interior(g)
    X = NodeSeq(np.column_stack([g * lam.values[:, None], lam.values]))
    try:
        convex = is_convex(NodeSeq(g), tol)
    except DegenerateSign:
        convex = False
    return RadialInstance(NodeSeq(g), lam, X, convex, interior)


def radial_projection(X: NodeSeq, origin=(0.0, 0.0, 0.0), tol: ToleranceConfig = DEFAULT_TOL) -> RadialInstance:
    """Split X - O into radial scales and the projection onto the plane z = 1.

    lam(i) is the third coordinate of X(i) - O and must have a strict
    positive sign; convexity of the projection is reported, not required.
    """
    r = X.values - as_vec3(origin)
    lam = r[:, 2]
    signs = strict_signs(lam, tol)
    if np.any(signs != 1):
        k = int(np.argmin(lam))
        raise NonProjectable(f"node slot {k} does not project onto z = 1")
    gamma = r[:, :2] / lam[:, None]
    return make_radial_instance(NodeSeq(gamma), NodeSeq(lam), tol)


def _origin_interior(g: np.ndarray) -> bool:
    return bool(np.all(area2(g, np.roll(g, -1, axis=0)) > 0.0))


def _area_centroid(g: np.ndarray) -> np.ndarray:
    x, y = g[:, 0], g[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    w = x * yn - xn * y
    area = 0.5 * np.sum(w)
    cx = np.sum((x + xn) * w) / (6.0 * area)
    cy = np.sum((y + yn) * w) / (6.0 * area)
    return np.array([cx, cy])


def dual_planar_parts(inst: RadialInstance, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[NodeSeq, NodeSeq, DualPair]:
    """Dual pair of (X, (0,0,1)) split into its planar parts (y, v).

    For a radial instance the dual polygon satisfies Y . E = 1 and the dual
    field V . E = 0 exactly, so Y = (y, 1) and V = (v, 0); the planar slots
    are returned as node sequences in the half-integer frame.
    """
    n = inst.X.n
    P = FramedPolygon(inst.X, NodeSeq(np.tile(_E3, (n, 1))))
    D = dual_pair(P, tol)
    Yv, Vv = D.Y.values, D.V.values
    if np.max(np.abs(Yv[:, 2] - 1.0)) > tol.tol_residual:
        raise DualityResidual("dual polygon is not a lifted planar polygon")
    if np.max(np.abs(Vv[:, 2])) > tol.tol_residual * max(1.0, float(np.max(np.abs(Vv)))):
        raise DualityResidual("dual field is not horizontal")
    return NodeSeq(Yv[:, :2]), NodeSeq(Vv[:, :2]), D
