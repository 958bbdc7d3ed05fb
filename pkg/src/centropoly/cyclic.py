"""Cyclic sequences on integer and half-integer lattices, and 3-vector primitives.

A closed polygon with n nodes carries data on two staggered cyclic lattices:
node quantities live at integer indices i (mod n), edge quantities at
half-integers.  ``EdgeSeq`` stores the value for index k + 1/2 in slot k, so
no fractional indices appear anywhere in code.

Discrete derivatives move between the lattices::

    node_diff(g)[k] = g(k+1) - g(k)        value at k + 1/2
    edge_diff(h)[i] = h(i+1/2) - h(i-1/2)  value at i

so ``edge_diff(node_diff(g))`` is the second difference g''.

Sign predicates use a relative dead-band (``tol_sign`` times a caller-supplied
magnitude scale) rather than an absolute epsilon, so every analysis is
invariant under global rescaling of the polygon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSign


@dataclass(frozen=True)
class ToleranceConfig:
    """Relative tolerances: dead-band for sign predicates, bound for identities."""

    tol_sign: float = 1e-9
    tol_residual: float = 1e-9

    def __post_init__(self):
        if not (0.0 < self.tol_sign < 1.0):
            raise ValueError("tol_sign must lie strictly between 0 and 1")
        if not (0.0 < self.tol_residual < 1.0):
            raise ValueError("tol_residual must lie strictly between 0 and 1")


DEFAULT_TOL = ToleranceConfig()


def _as_cyclic_values(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim not in (1, 2):
        raise ValueError("slots must hold scalars or flat vectors")
    if arr.shape[0] < 3:
        raise ValueError("cyclic sequences need period n >= 3")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sequence entries must all be finite")
    arr.setflags(write=False)
    return arr


class _CyclicSeq:
    """Shared behaviour of NodeSeq and EdgeSeq: cyclic slot access over an array."""

    __slots__ = ("values",)

    def __init__(self, values):
        object.__setattr__(self, "values", _as_cyclic_values(values))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, slot: int):
        return self.values[slot % self.n]

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, values={self.values!r})"


class NodeSeq(_CyclicSeq):
    """Cyclic sequence indexed by integers; slot i holds the value at node i."""


class EdgeSeq(_CyclicSeq):
    """Cyclic sequence indexed by half-integers; slot k holds the value at k + 1/2."""


def node_diff(g: NodeSeq) -> EdgeSeq:
    """First difference of a node sequence: slot k gets g(k+1) - g(k)."""
    v = g.values
    return EdgeSeq(np.roll(v, -1, axis=0) - v)


def edge_diff(h: EdgeSeq) -> NodeSeq:
    """First difference of an edge sequence: slot i gets h(i+1/2) - h(i-1/2)."""
    v = h.values
    return NodeSeq(v - np.roll(v, 1, axis=0))


def second_diff(g: NodeSeq) -> NodeSeq:
    """Second difference g'': edge_diff(node_diff(g))."""
    return edge_diff(node_diff(g))


def det3(a, b, c):
    """3x3 determinant with rows a, b, c, by cofactor expansion.

    Broadcasts over leading axes, so (n, 3) arrays give n determinants.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    return (
        a[..., 0] * (b[..., 1] * c[..., 2] - b[..., 2] * c[..., 1])
        - a[..., 1] * (b[..., 0] * c[..., 2] - b[..., 2] * c[..., 0])
        + a[..., 2] * (b[..., 0] * c[..., 1] - b[..., 1] * c[..., 0])
    )


def cross3(a, b) -> np.ndarray:
    """Vector product; satisfies det3(a, b, c) == cross3(a, b) . c."""
    return np.cross(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def area2(a, b):
    """Signed area form of two planar vectors (the 2x2 determinant)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def as_vec3(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector components must be finite")
    return arr


def as_vec2(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(2)
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector components must be finite")
    return arr


def sign_of(value: float, scale: float, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Dead-banded sign: +-1 outside tol_sign * scale, 0 inside."""
    band = tol.tol_sign * scale
    if value > band:
        return 1
    if value < -band:
        return -1
    return 0


def strict_signs(values, tol: ToleranceConfig = DEFAULT_TOL, scale: float | None = None) -> np.ndarray:
    """Dead-banded signs of a whole sequence, scaled by its own max magnitude."""
    arr = values.values if isinstance(values, _CyclicSeq) else np.asarray(values, dtype=float)
    if scale is None:
        scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    band = tol.tol_sign * scale
    out = np.zeros(arr.shape, dtype=int)
    out[arr > band] = 1
    out[arr < -band] = -1
    return out


def cyclic_sign_changes(values, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[int, list[int]]:
    """Count cyclically adjacent strict sign flips.

    Returns ``(count, junctions)`` where junction j sits between slots j and
    j+1 (mod n).  Every entry must have a strict sign under the dead-band;
    a zero raises DegenerateSign since ties cannot be classified.  The count
    is always even on a cycle.
    """
    s = strict_signs(values, tol)
    zeros = np.nonzero(s == 0)[0]
    if zeros.size:
        raise DegenerateSign(f"entry at slot {int(zeros[0])} has no strict sign")
    flips = s * np.roll(s, -1) < 0
    junctions = [int(j) for j in np.nonzero(flips)[0]]
    return len(junctions), junctions
