"""Exact finite-torus Gibbs measures, a fixed-sector Metropolis sampler, and
exhaustive push-forward oracles for stationarity tests.

The sector measure puts weight proportional to a^{N_a} on matchings with a
fixed winding pair.  For L <= 2 all of it is exactly computable: the sector is
enumerated, and the law of the shuffling update is obtained by branching over
every creation choice at the empty faces of both half-steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import DimerConfig, TorusLattice, matchings_by_sector, staircase_config, winding_numbers
from .shuffle import ShuffleDynamics, apply_F_raw
from .weights import ModelParams, creation_probabilities, spider_step, two_periodic_init

A_, B_, C_, D_ = 0, 1, 2, 3


@dataclass
class SectorDistribution:
    L: int
    a: float
    delta: tuple
    table: dict  # config key (bytes) -> probability
    configs: dict  # config key -> DimerConfig

    def check_normalized(self, tol=1e-12):
        return abs(sum(self.table.values()) - 1.0) < tol


@dataclass
class SamplerConfig:
    sweeps: int
    burn_in: int
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 0 or self.burn_in < 0:
            raise ValueError("sweeps and burn_in must be >= 0")


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def exact_distribution(L, a, delta):
    """pi^(L)_Delta: weight proportional to a^{N_a} within the sector."""
    sectors = matchings_by_sector(L)
    delta = tuple(delta)
    if delta not in sectors:
        raise ValueError(f"empty sector {delta} at L={L}")
    configs = sectors[delta]
    weights = np.array([a ** cfg.n_a_dimers() for cfg in configs])
    weights /= weights.sum()
    return SectorDistribution(L, a, delta,
                              {c.key(): w for c, w in zip(configs, weights)},
                              {c.key(): c for c in configs})


def distribution_from_field(L, field, delta):
    """Gibbs measure with weight prod_e w_e for an arbitrary weight field."""
    sectors = matchings_by_sector(L)
    delta = tuple(delta)
    if delta not in sectors:
        raise ValueError(f"empty sector {delta} at L={L}")
    h_w = field.w[:, :, C_]  # bottom edge of face (x, y) = horizontal edge at (x, y)
    v_w = field.w[:, :, D_]  # left edge of face (x, y) = vertical edge at (x, y)
    configs = sectors[delta]
    weights = np.array([
        float(np.prod(h_w[cfg.h_occupied()]) * np.prod(v_w[cfg.v_occupied()]))
        for cfg in configs
    ])
    weights /= weights.sum()
    return SectorDistribution(L, None, delta,
                              {c.key(): w for c, w in zip(configs, weights)},
                              {c.key(): c for c in configs})


def _branch_F(dirs, p_h, sigma):
    """All outcomes of one F pass: list of (dirs_out, probability).

    Branches over the creation choice at every empty face of parity sigma;
    deletion and sliding are deterministic.
    """
    n = dirs.shape[-1]
    occ_b = dirs == 0
    occ_t = np.roll(occ_b, -1, axis=1)
    occ_l = dirs == 1
    occ_r = np.roll(occ_l, -1, axis=0)
    ii = np.arange(n)[:, None]
    jj = np.arange(n)[None, :]
    pm = (ii + jj) % 2 == sigma
    count = occ_b.astype(int) + occ_t + occ_l + occ_r
    empty = np.argwhere(pm & (count == 0))
    out = []
    m = len(empty)
    u = np.empty((n, n))
    for mask in range(1 << m):
        u[:] = 0.5  # unused entries
        prob = 1.0
        for b, (i, j) in enumerate(empty):
            if mask >> b & 1:
                u[i, j] = 0.0  # horizontal pair
                prob *= p_h[i, j]
            else:
                u[i, j] = 1.0  # vertical pair
                prob *= 1.0 - p_h[i, j]
        out.append((apply_F_raw(dirs, p_h, sigma, u), prob))
    return out


def push_forward_exact(L, a, delta, corrupt=0.0):
    """Exact law of T(eta) for eta ~ pi^(L)_Delta, by exhaustive branching.

    `corrupt` shifts the second-pass creation probabilities (test hook for the
    negative control); the physical dynamics has corrupt=0.
    """
    if L not in (1, 2):
        raise ValueError("push_forward_exact is limited to L in {1, 2}")
    start = exact_distribution(L, a, delta)
    dyn = ShuffleDynamics(L, a)
    p_h1 = np.clip(dyn.p_h1 + corrupt, 1e-9, 1 - 1e-9)
    lat = TorusLattice(L)
    table = {}
    configs = {}
    for key, p0 in start.table.items():
        dirs = start.configs[key].dirs
        for half, p1 in _branch_F(dirs, dyn.p_h0, 0):
            for full, p2 in _branch_F(half, p_h1, 1):
                out = np.roll(full, (-1, -1), axis=(0, 1))
                k = out.tobytes()
                table[k] = table.get(k, 0.0) + p0 * p1 * p2
                if k not in configs:
                    configs[k] = DimerConfig(lat, out.copy())
    return SectorDistribution(L, a, tuple(delta), table, configs)


def push_forward_F0_exact(L, a, delta):
    """Exact law of F_0(eta) for eta ~ pi^(L)_Delta (no shift, no second pass)."""
    if L not in (1, 2):
        raise ValueError("push_forward_F0_exact is limited to L in {1, 2}")
    start = exact_distribution(L, a, delta)
    dyn = ShuffleDynamics(L, a)
    lat = TorusLattice(L)
    table = {}
    configs = {}
    for key, p0 in start.table.items():
        dirs = start.configs[key].dirs
        for half, p1 in _branch_F(dirs, dyn.p_h0, 0):
            k = half.tobytes()
            table[k] = table.get(k, 0.0) + p0 * p1
            if k not in configs:
                configs[k] = DimerConfig(lat, half.copy())
    return SectorDistribution(L, a, tuple(delta), table, configs)


def mcmc_sample(L, a, delta, cfg, return_chain=False):
    """Metropolis chain on single-face rotations at fixed winding.

    Proposal: a uniformly random face; not-flippable proposals are no-ops.
    Acceptance min(1, a^{Delta N_a}) gives detailed balance for pi^(L)_Delta.
    """
    lat = TorusLattice(L)
    n = lat.n
    current = staircase_config(L, delta).dirs.copy()
    h_w, v_w = lat.edge_weight_arrays(2.0)
    h_is_a = (h_w == 2.0).astype(np.int64)
    v_is_a = (v_w == 2.0).astype(np.int64)
    rng = np.random.default_rng(cfg.seed)
    chain = []
    log_a = np.log(a) if a != 1.0 else 0.0
    for sweep in range(cfg.burn_in + cfg.sweeps):
        faces = rng.integers(0, n, size=(n * n, 2))
        us = rng.random(n * n)
        for (i, j), uu in zip(faces, us):
            ip, jp = (i + 1) % n, (j + 1) % n
            b = current[i, j] == 0
            t = current[i, jp] == 0
            if b and t:
                dna = (v_is_a[i, j] + v_is_a[ip, j]) - (h_is_a[i, j] + h_is_a[i, jp])
                if a == 1.0 or uu < np.exp(dna * log_a):
                    current[i, j] = 1
                    current[i, jp] = 3
                    current[ip, j] = 1
                    current[ip, jp] = 3
            elif current[i, j] == 1 and current[ip, j] == 1:
                dna = (h_is_a[i, j] + h_is_a[i, jp]) - (v_is_a[i, j] + v_is_a[ip, j])
                if a == 1.0 or uu < np.exp(dna * log_a):
                    current[i, j] = 0
                    current[ip, j] = 2
                    current[i, jp] = 0
                    current[ip, jp] = 2
        if return_chain and sweep >= cfg.burn_in:
            chain.append(current.tobytes())
    out = DimerConfig(lat, current)
    assert winding_numbers(out) == tuple(delta)
    if return_chain:
        return out, chain
    return out


EDGE_CLASSES = ("e1", "e2", "e3", "e4")


def edge_class_mask(L, edge_class):
    """(is_horizontal, boolean position mask) for one of the four edge classes.

    e1/e3: horizontal edges with an 'a'/'1' face above; e2/e4: vertical edges
    with an 'a'/'1' face to the left.
    """
    n = 2 * L
    x = np.arange(n)[:, None]
    y = np.arange(n)[None, :]
    if edge_class == "e1":
        return True, (x % 2 == 0) & (y % 2 == 0)
    if edge_class == "e2":
        return False, (x % 2 == 1) & (y % 2 == 0)
    if edge_class == "e3":
        return True, (x % 2 == 1) & (y % 2 == 1)
    if edge_class == "e4":
        return False, (x % 2 == 0) & (y % 2 == 1)
    raise ValueError(f"edge_class must be one of {EDGE_CLASSES}")


def edge_occupation_estimate(samples, edge_class, n_batches=8):
    """Mean occupation of an edge class, averaged over its (2Z)^2 translates
    and over samples, with a batched standard error."""
    if len(samples) < 2:
        raise ValueError("need at least 2 samples")
    L = samples[0].lattice.L
    horiz, mask = edge_class_mask(L, edge_class)
    vals = np.array([
        float(np.mean((s.h_occupied() if horiz else s.v_occupied())[mask]))
        for s in samples
    ])
    nb = min(n_batches, len(vals))
    batches = np.array_split(vals, nb)
    means = np.array([b.mean() for b in batches])
    return float(vals.mean()), float(means.std(ddof=1) / np.sqrt(nb))


def exact_edge_expectation(dist, edge_class):
    """Expected edge-class occupation under an exact sector distribution."""
    horiz, mask = edge_class_mask(dist.L, edge_class)
    total = 0.0
    for key, p in dist.table.items():
        cfg = dist.configs[key]
        occ = cfg.h_occupied() if horiz else cfg.v_occupied()
        total += p * float(np.mean(occ[mask]))
    return total
