"""Time-dependent face weights and the spider-move/contraction recursion.

Each face (i, j) carries a 4-tuple (w^a, w^b, w^c, w^d) of the weights of its
top, right, bottom and left edges (clockwise from the topmost edge).  Both
parities are stored redundantly: every edge weight appears in exactly two face
tuples, which makes the consistency of one update step testable.

One step rewrites the tuples of the faces with the parity of the step index by
the spider move (cyclic a<->c, b<->d swap divided by the face constant
Delta = w^a w^c + w^b w^d) and the tuples of the opposite parity by pulling
each neighbor's rescaled entry.  For the two-periodic initial field the square
of the step is, after a unit diagonal shift, multiplication by 2c with
c = a / (1 + a^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import TorusLattice

A_, B_, C_, D_ = 0, 1, 2, 3  # tuple slots: top, right, bottom, left


@dataclass
class ModelParams:
    """Two-periodic weight parameter a in (0, 1]; c = a/(1+a^2) <= 1/2."""

    a: float

    def __post_init__(self):
        if not 0 < self.a <= 1:
            raise ValueError(f"a must be in (0, 1], got {self.a}")

    @property
    def c(self):
        return self.a / (1.0 + self.a * self.a)


@dataclass
class WeightField:
    """Per-face weight tuples at shuffle time k."""

    L: int
    k: int
    w: np.ndarray  # shape (n, n, 4), w[i, j] = (w^a, w^b, w^c, w^d)

    @property
    def n(self):
        return 2 * self.L

    def copy(self):
        return WeightField(self.L, self.k, self.w.copy())

    def consistency_defect(self):
        """Max relative mismatch between the two tuples describing one edge."""
        w = self.w
        scale = np.abs(w).max()
        top = np.abs(w[:, :, A_] - np.roll(w[:, :, C_], -1, axis=1))
        right = np.abs(w[:, :, B_] - np.roll(w[:, :, D_], -1, axis=0))
        return max(top.max(), right.max()) / scale


def two_periodic_init(L, params):
    """w_0: a(1,1,1,1) on even faces with both coordinates even, (1,1,1,1) on
    both-odd even faces; odd-face tuples derived from the shared edges."""
    lat = TorusLattice(L)
    h_w, v_w = lat.edge_weight_arrays(params.a)
    n = lat.n
    w = np.empty((n, n, 4))
    w[:, :, A_] = np.roll(h_w, -1, axis=1)  # top edge of (i,j) = h-edge at (i, j+1)
    w[:, :, B_] = np.roll(v_w, -1, axis=0)  # right edge = v-edge at (i+1, j)
    w[:, :, C_] = h_w                       # bottom edge = h-edge at (i, j)
    w[:, :, D_] = v_w                       # left edge = v-edge at (i, j)
    return WeightField(int(L), 0, w)


def face_delta(field, i=None, j=None):
    """Delta = w^a w^c + w^b w^d, per face or for one face."""
    w = field.w
    d = w[:, :, A_] * w[:, :, C_] + w[:, :, B_] * w[:, :, D_]
    if i is None:
        return d
    return float(d[i % field.n, j % field.n])


def spider_step(field):
    """One spider-move/contraction step: w_k -> w_{k+1}.

    Faces of parity k mod 2 get their own tuple rotated (a<->c, b<->d) and
    divided by their Delta; faces of parity (k+1) mod 2 get the displayed
    neighbor recursion.  All entries stay positive.
    """
    n = field.n
    w = field.w
    delta = face_delta(field)
    ii = np.arange(n)[:, None]
    jj = np.arange(n)[None, :]
    moved = (ii + jj) % 2 == field.k % 2  # faces where the spider move acts

    new = np.empty_like(w)
    r = w / delta[:, :, None]
    # spider-moved faces: (c, d, a, b) / Delta
    new[:, :, A_] = np.where(moved, r[:, :, C_], np.roll(r[:, :, A_], -1, axis=1))
    new[:, :, B_] = np.where(moved, r[:, :, D_], np.roll(r[:, :, B_], -1, axis=0))
    new[:, :, C_] = np.where(moved, r[:, :, A_], np.roll(r[:, :, C_], 1, axis=1))
    new[:, :, D_] = np.where(moved, r[:, :, B_], np.roll(r[:, :, D_], 1, axis=0))

    out = WeightField(field.L, field.k + 1, new)
    assert np.all(new > 0)
    return out


def creation_probabilities(field, i=None, j=None):
    """(p_horizontal, p_vertical) = (w^a w^c, w^b w^d) / Delta for each face."""
    w = field.w
    d = w[:, :, A_] * w[:, :, C_] + w[:, :, B_] * w[:, :, D_]
    p_h = w[:, :, A_] * w[:, :, C_] / d
    p_v = w[:, :, B_] * w[:, :, D_] / d
    if i is None:
        return p_h, p_v
    return float(p_h[i % field.n, j % field.n]), float(p_v[i % field.n, j % field.n])
