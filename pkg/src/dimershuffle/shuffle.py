"""The random shuffling maps F_k, the composed update T, and height tracking.

One F step acts on all faces of one parity: faces carrying two parallel
dimers are emptied, a single dimer slides to the opposite edge of its face,
and an empty face receives a horizontal pair with probability w^a w^c / Delta
(else a vertical pair).  T applies F_0 then F_1 and shifts the configuration
one step down-left; thanks to the projective 2-periodicity of the weights the
same two creation-probability tables drive every step.

The reference-face height h(f_0) is tracked incrementally in exact quarter
units: per step the increment is (1_{e' in eta'} - 1/4) + (1/4 - 1_{e in eta})
where e is the right edge of f_0 in the pre-step configuration and e' the top
edge of f_0 in the intermediate shifted configuration.

All updates are vectorized over faces (and over replicas via a leading batch
axis); results are identical to a sequential face scan because the three
passes read only the pre-pass state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .lattice import DOWN, DimerConfig, LEFT, RIGHT, TorusLattice, UP
from .weights import ModelParams, creation_probabilities, spider_step, two_periodic_init


class RngStream:
    """Counter-based uniforms: the draw for (k, i, j) depends only on
    (seed, k, i, j), independent of iteration order and thread count."""

    def __init__(self, seed):
        self.seed = int(seed)

    def uniforms(self, k, shape):
        gen = Generator(Philox(key=self.seed, counter=[0, 0, 0, int(k)]))
        return gen.random(shape)


def apply_F_raw(dirs, p_h, sigma, u, check=False):
    """One F pass over the faces of parity sigma.

    dirs: int8 (..., n, n) match directions; p_h: (n, n) horizontal-pair
    creation probabilities; u: uniforms shaped like dirs.  Returns a new
    direction array.
    """
    n = dirs.shape[-1]
    single = dirs.ndim == 2
    db = dirs[None] if single else dirs
    ub = u[None] if single else u

    occ_b = db == RIGHT
    occ_t = np.roll(occ_b, -1, axis=2)
    occ_l = db == UP
    occ_r = np.roll(occ_l, -1, axis=1)

    ii = np.arange(n)[:, None]
    jj = np.arange(n)[None, :]
    pm = (ii + jj) % 2 == sigma

    count = (occ_b.astype(np.int8) + occ_t.astype(np.int8)
             + occ_l.astype(np.int8) + occ_r.astype(np.int8))
    if check:
        two = pm & (count == 2)
        assert np.all(((occ_b & occ_t) | (occ_l & occ_r))[two]), "non-parallel dimer pair on a face"
        assert not np.any(pm & (count > 2)), "face with more than two boundary dimers"

    new = np.full_like(db, -1)

    def scatter(mask, writes):
        b, i, j = np.nonzero(mask & pm)
        for di, dj, val in writes:
            new[b, (i + di) % n, (j + dj) % n] = val

    one = count == 1
    scatter(one & occ_b, [(0, 1, RIGHT), (1, 1, LEFT)])                      # bottom -> top
    scatter(one & occ_t, [(0, 0, RIGHT), (1, 0, LEFT)])                      # top -> bottom
    scatter(one & occ_l, [(1, 0, UP), (1, 1, DOWN)])                      # left -> right
    scatter(one & occ_r, [(0, 0, UP), (0, 1, DOWN)])                      # right -> left
    empty = count == 0
    horiz = empty & (ub < p_h)
    scatter(horiz, [(0, 0, RIGHT), (1, 0, LEFT), (0, 1, RIGHT), (1, 1, LEFT)])
    scatter(empty & ~horiz, [(0, 0, UP), (0, 1, DOWN), (1, 0, UP), (1, 1, DOWN)])

    if check:
        assert np.all(new >= 0), "vertex left unmatched by the F pass"
    return new[0] if single else new


@dataclass
class TrackedState:
    """Configuration plus the tracked reference height h(f_0), in quarters."""

    config: DimerConfig
    h0_quarters: int = 0
    k: int = 0


class ShuffleDynamics:
    """The torus growth chain for one (L, a); holds the two creation tables."""

    def __init__(self, L, a):
        self.lattice = TorusLattice(L)
        self.a = float(a)
        self.w0 = two_periodic_init(L, ModelParams(a))
        self.w1 = spider_step(self.w0)
        self.p_h0 = creation_probabilities(self.w0)[0]
        self.p_h1 = creation_probabilities(self.w1)[0]

    def apply_F(self, cfg, k, rng, check=False):
        """F_k on a configuration, with the weight table w_{k mod 2}."""
        p_h = self.p_h0 if k % 2 == 0 else self.p_h1
        u = rng.uniforms(k, cfg.dirs.shape)
        return DimerConfig(cfg.lattice, apply_F_raw(cfg.dirs, p_h, k % 2, u, check=check))

    def apply_T(self, cfg, rng, t=0, check=False):
        """T = tau_{(-1,-1)} . F_1 . F_0, with per-step RNG counters (2t, 2t+1)."""
        half = self.apply_F(cfg, 2 * t, rng, check=check)
        full = self.apply_F(half, 2 * t + 1, rng, check=check)
        return full.translate(-1, -1)

    def step_with_height(self, state, rng, check=False):
        """Advance one T step and the tracked h(f_0) with the same draws."""
        cfg = state.config
        half = self.apply_F(cfg, 2 * state.k, rng, check=check)
        inc = 4 * int(half.dirs[1, 1] == RIGHT) - 4 * int(cfg.dirs[1, 0] == UP)
        u1 = rng.uniforms(2 * state.k + 1, cfg.dirs.shape)
        nxt = DimerConfig(cfg.lattice,
                          apply_F_raw(half.dirs, self.p_h1, 1, u1, check=check))
        return TrackedState(nxt.translate(-1, -1), state.h0_quarters + inc, state.k + 1)

    def evolve(self, state, n_steps, rng, observers=()):
        """Run n_steps T updates; each observer is called once per step."""
        for _ in range(int(n_steps)):
            state = self.step_with_height(state, rng)
            for obs in observers:
                obs(state)
        return state

    # --- batched form used by the Monte Carlo harness ---------------------

    def run_batch(self, dirs, n_steps, seed, record_heights=True):
        """Advance a (B, n, n) stack of replicas; returns (dirs, heights).

        heights[b, t] is h(f_0) after t steps, in quarter units, per replica.
        The draw for (replica, step, face) is a fixed function of the seed.
        """
        B = dirs.shape[0]
        n = dirs.shape[-1]
        hq = np.zeros(B, dtype=np.int64)
        heights = np.empty((B, n_steps + 1), dtype=np.int64) if record_heights else None
        if record_heights:
            heights[:, 0] = 0
        rng = RngStream(seed)
        for t in range(int(n_steps)):
            u0 = rng.uniforms(2 * t, (B, n, n))
            half = apply_F_raw(dirs, self.p_h0, 0, u0)
            hq += 4 * (half[:, 1, 1] == RIGHT).astype(np.int64) - 4 * (dirs[:, 1, 0] == UP).astype(np.int64)
            u1 = rng.uniforms(2 * t + 1, (B, n, n))
            dirs = np.roll(apply_F_raw(half, self.p_h1, 1, u1), (-1, -1), axis=(1, 2))
            if record_heights:
                heights[:, t + 1] = hq
        return dirs, heights


def apply_F(cfg, field, k, rng, check=False):
    """F_k driven by an explicit weight field (general-k form)."""
    p_h = creation_probabilities(field)[0]
    u = rng.uniforms(k, cfg.dirs.shape)
    return DimerConfig(cfg.lattice, apply_F_raw(cfg.dirs, p_h, k % 2, u, check=check))


def apply_T(cfg, rng, a, t=0, check=False):
    return ShuffleDynamics(cfg.lattice.L, a).apply_T(cfg, rng, t=t, check=check)


def step_with_height(state, rng, a, check=False):
    return ShuffleDynamics(state.config.lattice.L, a).step_with_height(state, rng, check=check)


def evolve(state, n_steps, rng, a, observers=()):
    return ShuffleDynamics(state.config.lattice.L, a).evolve(state, n_steps, rng, observers=observers)
