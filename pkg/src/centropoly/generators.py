"""Reproducible random instances and the canonical fixtures.

All randomness flows through numpy's default generator (PCG64 seeded by a
SeedSequence), which is platform independent; identical configurations give
bit-identical instances.  Batch drivers derive per-instance seeds as
``[master_seed, index]`` so batches are order independent.

Random convex polygons are built from edge directions: n angles jittered
around the regular spacing (gaps bounded away from zero, so consecutive
node triples never get needle-thin) with random edge lengths projected onto
the closure constraint.  Angle-sorted edges make the polygon strictly
convex with exactly n vertices by construction; it is then centered at its
area centroid (so the origin is strictly interior) and scaled to mean
vertex radius one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cyclic import DEFAULT_TOL, NodeSeq, ToleranceConfig, area2, node_diff, second_diff
from .errors import (
    GenerationFailed,
    NotLocallyConvex,
    SingularNormalization,
)
from .invariants import FramedPolygon, _alpha_values, delta, is_equal_volume, is_generic
from .pedal import (
    PlanarPair,
    RadialInstance,
    cylindrical_pedal,
    is_convex,
    make_radial_instance,
)

_E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class GenConfig:
    """Knobs for instance generation; seed may be an int or a sequence of ints."""

    seed: object = 0
    n: int = 8
    lambda_range: tuple[float, float] = (0.5, 2.0)
    perturb_scale: float = 1e-2
    max_retries: int = 64

    def __post_init__(self):
        lo, hi = self.lambda_range
        if self.n < 3:
            raise ValueError("polygons need at least 3 nodes")
        if not (0.0 < lo <= hi):
            raise ValueError("lambda_range must satisfy 0 < lo <= hi")
        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")
        if self.perturb_scale < 0.0:
            raise ValueError("perturb_scale must be nonnegative")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _convex_from_rng(rng: np.random.Generator, n: int) -> np.ndarray:
    """One convex-polygon draw: jittered edge directions, closure-projected lengths.

    Direction gaps stay within [0.1, 1.9] of the regular spacing and edge
    lengths within [0.7, 1.3] before the closure correction, which keeps
    every consecutive node triple well conditioned at any n.
    """
    for _ in range(1000):
        jitter = rng.uniform(-0.45, 0.45, n)
        theta = 2.0 * np.pi * (np.arange(n) + jitter) / n
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        lengths = rng.uniform(0.7, 1.3, n)
        # least-norm correction so the edge vectors sum to zero
        D = dirs.T
        lengths = lengths - D.T @ np.linalg.solve(D @ D.T, D @ lengths)
        if np.min(lengths) < 0.2:
            continue
        pts = np.cumsum(lengths[:, None] * dirs, axis=0)
        pts = np.vstack([np.zeros(2), pts[:-1]])
        pts = pts - _area_centroid(pts)
        return pts / np.mean(np.linalg.norm(pts, axis=1))
    raise GenerationFailed("edge lengths kept collapsing under the closure correction")


def _area_centroid(g: np.ndarray) -> np.ndarray:
    x, y = g[:, 0], g[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    w = x * yn - xn * y
    area = 0.5 * np.sum(w)
    cx = np.sum((x + xn) * w) / (6.0 * area)
    cy = np.sum((y + yn) * w) / (6.0 * area)
    return np.array([cx, cy])


def random_convex_polygon(cfg: GenConfig, tol: ToleranceConfig = DEFAULT_TOL) -> NodeSeq:
    """A strictly convex polygon with exactly cfg.n vertices and (0,0) strictly inside."""
    rng = cfg.rng()
    for _ in range(cfg.max_retries):
        pts = _convex_from_rng(rng, cfg.n)
        poly = NodeSeq(pts)
        try:
            if is_convex(poly, tol) and np.all(area2(pts, np.roll(pts, -1, axis=0)) > 0.0):
                return poly
        except Exception:
            pass
    raise GenerationFailed(f"no convex polygon with {cfg.n} vertices after {cfg.max_retries} tries")


def random_radial_instance(cfg: GenConfig, tol: ToleranceConfig = DEFAULT_TOL) -> RadialInstance:
    """A generic spatial polygon lam(i) * (gamma(i), 1) over a random convex gamma.

    Radial scales are log-uniform on lambda_range; the draw is repeated until
    every torsion volume has a strict sign.  Local convexity about the origin
    is automatic for positive scales over a convex projection.
    """
    rng = cfg.rng()
    lo, hi = cfg.lambda_range
    for _ in range(cfg.max_retries):
        gamma = NodeSeq(_convex_from_rng(rng, cfg.n))
        lam = NodeSeq(np.exp(rng.uniform(np.log(lo), np.log(hi), cfg.n)))
        try:
            if not is_convex(gamma, tol):
                continue
        except Exception:
            continue
        inst = make_radial_instance(gamma, lam, tol)
        if inst.origin_interior and is_generic(inst.X, tol):
            return inst
    raise GenerationFailed(f"no generic radial instance after {cfg.max_retries} tries")


def _tangent_kernel(edges: np.ndarray) -> np.ndarray:
    """Orthonormal basis of curvature sequences b with sum b(k) X'(k) = 0."""
    _, s, vt = np.linalg.svd(edges.T, full_matrices=True)
    rank = int(np.sum(s > 1e-12 * s[0]))
    return vt[rank:].T


def _parallel_field(positions: np.ndarray, edges: np.ndarray, beta0: np.ndarray,
                    rng: np.random.Generator) -> np.ndarray | None:
    """A non-constant parallel perturbation of a constant transversal field.

    Draws a curvature sequence from the closure kernel plus a random constant,
    integrates it into a field increment W, and caps the amplitude so every
    edge keeps at least half of the base transversality margin.
    """
    n, dim = edges.shape
    kernel = _tangent_kernel(edges)
    if kernel.shape[1] == 0:
        return None
    raw = kernel @ (kernel.T @ rng.standard_normal(n))
    wiggle = raw - raw.mean()
    if np.max(np.abs(wiggle)) < 1e-8:
        return None
    wiggle = wiggle / np.max(np.abs(wiggle))
    b = wiggle + rng.uniform(-1.0, 1.0)
    w0 = rng.uniform(-1.0, 1.0, dim)
    increments = -b[:, None] * edges
    W = w0 + np.vstack([np.zeros(dim), np.cumsum(increments[:-1], axis=0)])
    if dim == 3:
        contrib = np.einsum(
            "ij,ij->i", np.cross(positions, np.roll(positions, -1, axis=0)), W
        )
    else:
        contrib = area2(edges, W)
    top = float(np.max(np.abs(contrib)))
    if top == 0.0:
        return None
    s = 0.5 * float(np.min(beta0)) / top
    return s * W


def random_framed_polygon(cfg: GenConfig, tol: ToleranceConfig = DEFAULT_TOL) -> FramedPolygon:
    """A generic framed polygon whose parallel field has non-constant curvature.

    The polygon is a random radial instance; the field is the vertical
    constant plus a kernel-sampled parallel perturbation kept inside the
    transversality margin, so construction never fails validation.
    """
    rng = cfg.rng()
    lo, hi = cfg.lambda_range
    for _ in range(cfg.max_retries):
        gamma = _convex_from_rng(rng, cfg.n)
        lam = np.exp(rng.uniform(np.log(lo), np.log(hi), cfg.n))
        X = np.column_stack([gamma * lam[:, None], lam])
        if not is_generic(NodeSeq(X), tol):
            continue
        edges = np.roll(X, -1, axis=0) - X
        beta0 = np.cross(X, np.roll(X, -1, axis=0)) @ _E3
        W = _parallel_field(X, edges, beta0, rng)
        if W is None:
            continue
        U = np.tile(_E3, (cfg.n, 1)) + W
        try:
            P = FramedPolygon(NodeSeq(X), NodeSeq(U))
        except Exception:
            continue
        return P
    raise GenerationFailed(f"no framed polygon after {cfg.max_retries} tries")


def random_planar_pair(cfg: GenConfig, tol: ToleranceConfig = DEFAULT_TOL) -> PlanarPair:
    """A convex planar polygon with a random parallel field of non-constant curvature."""
    rng = cfg.rng()
    for _ in range(cfg.max_retries):
        x = _convex_from_rng(rng, cfg.n)
        try:
            if not is_convex(NodeSeq(x), tol):
                continue
        except Exception:
            continue
        edges = np.roll(x, -1, axis=0) - x
        base = -x  # inward field, curvature 1, beta = [x(i), x(i+1)]
        beta0 = area2(edges, base)
        if np.min(beta0) <= 0.0:
            continue
        W = _parallel_field(x, edges, beta0, rng)
        if W is None:
            continue
        try:
            return PlanarPair(NodeSeq(x), NodeSeq(base + W))
        except Exception:
            continue
    raise GenerationFailed(f"no planar pair after {cfg.max_retries} tries")


def equal_volume_normalize(X: NodeSeq, tol: ToleranceConfig = DEFAULT_TOL) -> NodeSeq:
    """Radial rescaling mu(i) X(i) with node volumes identically one.

    alpha transforms multiplicatively, alpha -> mu(i-1) mu(i) mu(i+1) alpha,
    so the problem is the circulant linear system nu(i-1)+nu(i)+nu(i+1) =
    -log alpha(i) in nu = log mu, solved by FFT.  For n divisible by 3 the
    circulant has a two-dimensional kernel (modes k = n/3, 2n/3); the data
    must be orthogonal to it or the normalization does not exist.
    """
    a = _alpha_values(X.values)
    if np.all(a < 0.0):
        X = NodeSeq(X.values[::-1])
        a = _alpha_values(X.values)
    if not np.all(a > 0.0):
        raise NotLocallyConvex("normalization needs a locally convex polygon")
    n = X.n
    rhs = -np.log(a)
    spectrum = np.fft.fft(rhs)
    eigs = 1.0 + 2.0 * np.cos(2.0 * np.pi * np.arange(n) / n)
    coeffs = np.zeros(n, dtype=complex)
    if n % 3 == 0:
        singular = np.array([n // 3, 2 * n // 3])
        leak = np.abs(spectrum[singular])
        if np.max(leak) > tol.tol_residual * max(1.0, float(np.max(np.abs(spectrum)))):
            raise SingularNormalization(
                "period divisible by 3: the rescaling system is singular for this polygon"
            )
        keep = np.ones(n, dtype=bool)
        keep[singular] = False
        coeffs[keep] = spectrum[keep] / eigs[keep]
    else:
        coeffs = spectrum / eigs
    mu = np.exp(np.real(np.fft.ifft(coeffs)))
    out = NodeSeq(mu[:, None] * X.values)
    if not is_equal_volume(out, tol=tol):
        raise SingularNormalization("rescaled polygon missed the unit-volume target")
    return out


def _newton_equal_area(p: np.ndarray, max_iter: int = 80) -> np.ndarray | None:
    """Radial multipliers mu with unit consecutive edge-vector areas, or None."""
    n = p.shape[0]
    a = area2(p, np.roll(p, -1, axis=0))
    b = np.roll(a, 1)
    c = area2(np.roll(p, 1, axis=0), np.roll(p, -1, axis=0))
    base = b + a - c  # areas at mu = 1
    if np.min(base) <= 0.0:
        return None
    mu = np.full(n, 1.0 / np.sqrt(np.mean(base)))

    def F(m):
        return m * np.roll(m, -1) * a + np.roll(m, 1) * m * b - np.roll(m, 1) * np.roll(m, -1) * c - 1.0

    f = F(mu)
    for _ in range(max_iter):
        if np.max(np.abs(f)) <= 1e-13:
            return mu
        J = np.zeros((n, n))
        idx = np.arange(n)
        J[idx, (idx - 1) % n] += mu * b - np.roll(mu, -1) * c
        J[idx, idx] += np.roll(mu, -1) * a + np.roll(mu, 1) * b
        J[idx, (idx + 1) % n] += mu * a - np.roll(mu, 1) * c
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        for _ in range(40):
            trial = mu + t * step
            if np.min(trial) > 0.0:
                ft = F(trial)
                if np.max(np.abs(ft)) < np.max(np.abs(f)):
                    mu, f = trial, ft
                    break
            t *= 0.5
        else:
            return None
    return mu if np.max(np.abs(f)) <= 1e-12 else None


def equal_area_normalize(x: NodeSeq, max_iter: int = 80) -> NodeSeq:
    """Rescale nodes radially so consecutive edge-vector areas are all one.

    Unlike the spatial case there is no closed-form log-linear system, so a
    damped Newton iteration solves the quadratic conditions directly; the
    polygon must be strictly convex with the origin strictly inside.
    """
    mu = _newton_equal_area(x.values, max_iter)
    if mu is None:
        raise GenerationFailed("equal-area rescaling did not converge")
    return NodeSeq(mu[:, None] * x.values)


def random_equal_area_polygon(cfg: GenConfig, tol: ToleranceConfig = DEFAULT_TOL) -> NodeSeq:
    """A random convex polygon rescaled to unit consecutive edge-vector areas."""
    rng = cfg.rng()
    for _ in range(cfg.max_retries):
        p = _convex_from_rng(rng, cfg.n)
        mu = _newton_equal_area(p)
        if mu is None:
            continue
        out = NodeSeq(mu[:, None] * p)
        e = node_diff(out).values
        areas = area2(e, np.roll(e, -1, axis=0))
        if np.max(np.abs(areas - 1.0)) <= 1e-12:
            return out
    raise GenerationFailed(f"no equal-area polygon after {cfg.max_retries} tries")


def random_unimodular_matrix(rng: np.random.Generator, max_cond: float = 50.0) -> np.ndarray:
    """A random 3x3 matrix with determinant one and bounded condition number."""
    while True:
        M = rng.uniform(-1.0, 1.0, (3, 3))
        det = np.linalg.det(M)
        if abs(det) < 1e-3:
            continue
        M = M / np.cbrt(det)
        if np.linalg.cond(M) <= max_cond:
            return M


def random_equal_volume_polygon(cfg: GenConfig, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[NodeSeq, NodeSeq]:
    """An equal-volume polygon carrying a parallel unimodular transversal field.

    Not every equal-volume polygon admits one: the natural-field integration
    closes up only when the structure function tau sums to zero around the
    cycle.  Pedals of equal-area planar pairs always satisfy the closure, so
    the instance is built as such a pedal pushed through a random unimodular
    map.  Returns (X, U) with U parallel and unimodular.
    """
    rng = cfg.rng()
    for _ in range(cfg.max_retries):
        p = _convex_from_rng(rng, cfg.n)
        mu = _newton_equal_area(p)
        if mu is None:
            continue
        x = NodeSeq(mu[:, None] * p)
        pp = PlanarPair(x, second_diff(x))
        Yv = cylindrical_pedal(pp, tol).Y.values
        M = random_unimodular_matrix(rng)
        X = NodeSeq(Yv @ M.T)
        U = NodeSeq(np.tile(_E3 @ M.T, (cfg.n, 1)))
        if is_equal_volume(X, tol=tol) and is_generic(X, tol):
            return X, U
    raise GenerationFailed(f"no equal-volume instance after {cfg.max_retries} tries")


def perturb_to_generic(X: NodeSeq, cfg: GenConfig, tol: ToleranceConfig = DEFAULT_TOL) -> NodeSeq:
    """Add uniform node noise until the polygon is generic and still locally convex.

    Already-generic input is returned untouched.  Noise magnitude is
    perturb_scale times the polygon diameter, redrawn up to max_retries.
    """
    if is_generic(X, tol) and np.all(_alpha_values(X.values) > 0.0):
        return X
    rng = cfg.rng()
    spread = X.values - X.values.mean(axis=0)
    diameter = 2.0 * float(np.max(np.linalg.norm(spread, axis=1)))
    for _ in range(cfg.max_retries):
        noise = rng.uniform(-1.0, 1.0, X.values.shape) * cfg.perturb_scale * diameter
        trial = NodeSeq(X.values + noise)
        if is_generic(trial, tol) and np.all(_alpha_values(trial.values) > 0.0):
            return trial
    raise GenerationFailed(f"perturbation stayed degenerate after {cfg.max_retries} tries")


def planted_coplanar_instance(
    cfg: GenConfig, edge: int | None = None, tol: ToleranceConfig = DEFAULT_TOL
) -> tuple[FramedPolygon, int]:
    """A framed polygon with exactly one coplanar consecutive node quadruple.

    One node of a generic radial instance is projected onto the plane of its
    three quadruple partners, zeroing a single torsion volume while every
    other stays strictly signed.  Returns the polygon (field: the vertical
    constant) and the edge slot whose torsion vanishes.
    """
    rng = cfg.rng()
    lo, hi = cfg.lambda_range
    for _ in range(cfg.max_retries):
        gamma = _convex_from_rng(rng, cfg.n)
        lam = np.exp(rng.uniform(np.log(lo), np.log(hi), cfg.n))
        X = np.column_stack([gamma * lam[:, None], lam])
        if not is_generic(NodeSeq(X), tol):
            continue
        i = int(rng.integers(cfg.n)) if edge is None else edge % cfg.n
        moved = X.copy()
        p0, p1, p2, p3 = X[(i - 1) % cfg.n], X[i], X[(i + 1) % cfg.n], X[(i + 2) % cfg.n]
        normal = np.cross(p1 - p0, p3 - p0)
        norm = np.linalg.norm(normal)
        if norm == 0.0:
            continue
        normal /= norm
        moved[(i + 1) % cfg.n] = p2 - np.dot(p2 - p0, normal) * normal
        d = delta(NodeSeq(moved)).values
        scale = float(np.max(np.abs(d)))
        strict = np.abs(d) > 10.0 * tol.tol_sign * scale
        planted_ok = abs(d[i]) <= 0.1 * tol.tol_sign * scale
        strict[i] = True
        if not (planted_ok and np.all(strict)):
            continue
        try:
            P = FramedPolygon(NodeSeq(moved), NodeSeq(np.tile(_E3, (cfg.n, 1))))
        except Exception:
            continue
        return P, i
    raise GenerationFailed(f"no planted coplanar instance after {cfg.max_retries} tries")


def fixtures() -> dict[str, object]:
    """The canonical instances used across the documentation and tests."""
    square = NodeSeq([(1.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (-1.0, -1.0, 1.0), (1.0, -1.0, 1.0)])
    vertical = NodeSeq(np.tile(_E3, (4, 1)))
    lifted_square = FramedPolygon(square, vertical)

    half = NodeSeq([(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)])
    half_square_pair = PlanarPair(half, second_diff(half))

    angles = np.pi * np.arange(6) / 3.0
    heights = 1.0 + np.array([0.10, 0.04, -0.05, -0.03, 0.06, -0.07])
    hexagon = NodeSeq(np.column_stack([np.cos(angles), np.sin(angles), heights]))
    perturbed_hexagon = FramedPolygon(hexagon, NodeSeq(np.tile(_E3, (6, 1))))

    planted, planted_edge = planted_coplanar_instance(GenConfig(seed=2024, n=6))

    pedal = cylindrical_pedal(half_square_pair)
    constant_curvature_pair = FramedPolygon(NodeSeq(pedal.Y.values), NodeSeq(np.tile(_E3, (4, 1))))

    return {
        "lifted_square": lifted_square,
        "half_square_pair": half_square_pair,
        "perturbed_hexagon": perturbed_hexagon,
        "planted_coplanar_hexagon": planted,
        "planted_coplanar_edge": planted_edge,
        "constant_curvature_pair": constant_curvature_pair,
    }
