"""Torus geometry, dimer configurations, windings, heights and small-size oracles.

The lattice is the square torus with side ``2L``.  Vertices are colored
white/black by coordinate-sum parity (white = even sum), so every face with a
white top-right vertex is "even".  Even faces carry an alternating label
``a``/``1``; every edge inherits the label value of the unique even face it
borders.  Heights live on faces and are stored exactly, in quarter units.

A dimer configuration is stored as a direction array ``dirs[x, y] in
{RIGHT, UP, LEFT, DOWN}`` pointing from each vertex to its matched partner.
On the degenerate torus L=1 parallel edges wrapping in opposite directions
are distinct; the direction encoding keeps them apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# direction codes and displacement tables
RIGHT, UP, LEFT, DOWN = 0, 1, 2, 3
DX = np.array([1, 0, -1, 0])
DY = np.array([0, 1, 0, -1])
OPP = np.array([2, 3, 0, 1])

#: height change per crossing is sigma * (4*occupied - 1) quarter units
QUARTER = 4


class TorusLattice:
    """Geometry of the 2L x 2L torus: parities, labels, and index helpers."""

    def __init__(self, L):
        if L <= 0:
            raise ValueError(f"L must be >= 1, got {L}")
        self.L = int(L)
        self.n = 2 * int(L)

    def is_even_face(self, i, j):
        """Faces with a white top-right vertex have even coordinate sum."""
        return (i + j) % 2 == 0

    def face_label(self, i, j):
        """'a' for even faces with both coordinates even, '1' for both odd."""
        if not self.is_even_face(i, j):
            raise ValueError(f"face {(i, j)} is odd and carries no label")
        return "a" if i % 2 == 0 else "1"

    def edge_weight_arrays(self, a):
        """Per-edge static weights (h_w[x, y] for edge {(x,y),(x+1,y)}, v_w likewise).

        The weight of an edge is the label value of the even face it borders.
        """
        n = self.n
        x = np.arange(n)[:, None]
        y = np.arange(n)[None, :]
        # horizontal edge at (x, y): bordering faces (x, y) above and (x, y-1) below
        h_even_j = np.where((x + y) % 2 == 0, y, (y - 1) % n)
        h_w = np.where((x % 2 == 0) & (h_even_j % 2 == 0), float(a), 1.0)
        # vertical edge at (x, y): bordering faces (x-1, y) left and (x, y) right
        v_even_i = np.where((x + y) % 2 == 0, x, (x - 1) % n)
        v_w = np.where((v_even_i % 2 == 0) & (y % 2 == 0), float(a), 1.0)
        return h_w, v_w

    @property
    def n_vertices(self):
        return self.n * self.n

    @property
    def n_faces(self):
        return self.n * self.n

    @property
    def n_edges(self):
        return 2 * self.n * self.n


def build_torus(L):
    return TorusLattice(L)


@dataclass
class DimerConfig:
    """A perfect matching, stored as per-vertex match directions."""

    lattice: TorusLattice
    dirs: np.ndarray  # int8, shape (n, n), dirs[x, y] in {RIGHT, UP, LEFT, DOWN}

    def copy(self):
        return DimerConfig(self.lattice, self.dirs.copy())

    def key(self):
        """Hashable identity of the configuration."""
        return self.dirs.tobytes()

    def is_valid(self):
        return config_is_valid(self.dirs)

    def h_occupied(self):
        """Boolean (n,n): horizontal edge {(x,y),(x+1,y)} occupied."""
        return self.dirs == RIGHT

    def v_occupied(self):
        """Boolean (n,n): vertical edge {(x,y),(x,y+1)} occupied."""
        return self.dirs == UP

    def n_a_dimers(self):
        """Number of dimers on 'a'-labeled edges."""
        h_w, v_w = self.lattice.edge_weight_arrays(2.0)  # 2.0 marks 'a' edges
        return int(np.sum((self.dirs == RIGHT) & (h_w == 2.0))
                   + np.sum((self.dirs == UP) & (v_w == 2.0)))

    def translate(self, nx, ny):
        """tau_{(nx,ny)}: move every dimer by (nx, ny)."""
        return DimerConfig(self.lattice, np.roll(self.dirs, (nx, ny), axis=(0, 1)))


def config_is_valid(dirs):
    """Involution check: the matched partner points back along the same edge."""
    n = dirs.shape[-1]
    x = np.arange(n)[:, None]
    y = np.arange(n)[None, :]
    px = (x + DX[dirs]) % n
    py = (y + DY[dirs]) % n
    return bool(np.all(dirs[px, py] == OPP[dirs]))


def brick_config(L):
    """Reference all-horizontal pattern: dimers {(2i, y), (2i+1, y)}; winding (0, 0)."""
    lat = TorusLattice(L)
    n = lat.n
    dirs = np.empty((n, n), dtype=np.int8)
    dirs[0::2, :] = RIGHT
    dirs[1::2, :] = LEFT
    return DimerConfig(lat, dirs)


def winding_numbers(cfg):
    """Signed dimer counts along the fixed horizontal/vertical face paths at the origin.

    Delta_1 sums over vertical edges at (x, 0) with sign +1 for even x (white
    vertex to the right of the rightward path); Delta_2 sums over horizontal
    edges at (0, y) with sign +1 for odd y.
    """
    n = cfg.lattice.n
    v_occ = cfg.v_occupied()
    h_occ = cfg.h_occupied()
    sx = np.where(np.arange(n) % 2 == 0, 1, -1)
    sy = np.where(np.arange(n) % 2 == 1, 1, -1)
    d1 = int(np.sum(sx * v_occ[:, 0]))
    d2 = int(np.sum(sy * h_occ[0, :]))
    return (d1, d2)


def winding_along_row(cfg, j):
    """Delta_1 evaluated along the face row j (homologous path; for tests)."""
    n = cfg.lattice.n
    v_occ = cfg.v_occupied()
    s = np.where((np.arange(n) + j) % 2 == 0, 1, -1)
    return int(np.sum(s * v_occ[:, j % n]))


def _sigma_h(i, j):
    """Sign for crossing the horizontal edge at (i, j+1) walking up from face (i, j)."""
    return 1 if (i + j) % 2 == 0 else -1


def _sigma_v(i, j):
    """Sign for crossing the vertical edge at (i+1, j) walking right from face (i, j)."""
    return 1 if (i + j) % 2 == 1 else -1


def height_gradient(cfg, f, f2):
    """h(f2) - h(f) in quarter units, along the canonical staircase path.

    The path moves right from f to the column of f2 (minimal non-negative
    displacement), then up.  Each crossed edge contributes
    sigma_e * (4*occupied - 1) quarter units.
    """
    n = cfg.lattice.n
    h_occ = cfg.h_occupied()
    v_occ = cfg.v_occupied()
    i, j = f[0] % n, f[1] % n
    q = 0
    for _ in range((f2[0] - f[0]) % n):
        e = v_occ[(i + 1) % n, j]
        q += _sigma_v(i, j) * (QUARTER * int(e) - 1)
        i = (i + 1) % n
    for _ in range((f2[1] - f[1]) % n):
        e = h_occ[i, (j + 1) % n]
        q += _sigma_h(i, j) * (QUARTER * int(e) - 1)
        j = (j + 1) % n
    return q


def height_gradient_along(cfg, f, steps):
    """Gradient accumulated along an explicit face path ('R'/'U'/'L'/'D' steps)."""
    n = cfg.lattice.n
    h_occ = cfg.h_occupied()
    v_occ = cfg.v_occupied()
    i, j = f[0] % n, f[1] % n
    q = 0
    for s in steps:
        if s == "R":
            q += _sigma_v(i, j) * (QUARTER * int(v_occ[(i + 1) % n, j]) - 1)
            i = (i + 1) % n
        elif s == "L":
            i = (i - 1) % n
            q -= _sigma_v(i, j) * (QUARTER * int(v_occ[(i + 1) % n, j]) - 1)
        elif s == "U":
            q += _sigma_h(i, j) * (QUARTER * int(h_occ[i, (j + 1) % n]) - 1)
            j = (j + 1) % n
        elif s == "D":
            j = (j - 1) % n
            q -= _sigma_h(i, j) * (QUARTER * int(h_occ[i, (j + 1) % n]) - 1)
        else:
            raise ValueError(f"bad step {s!r}")
    return q


def face_boundary_state(cfg, i, j):
    """(bottom, top, left, right) occupation of the face (i, j) boundary."""
    n = cfg.lattice.n
    d = cfg.dirs
    b = d[i % n, j % n] == RIGHT
    t = d[i % n, (j + 1) % n] == RIGHT
    l = d[i % n, j % n] == UP
    r = d[(i + 1) % n, j % n] == UP
    return bool(b), bool(t), bool(l), bool(r)


def elementary_rotation(cfg, f):
    """Flip two parallel dimers on the face f, or return None if not flippable."""
    n = cfg.lattice.n
    i, j = f[0] % n, f[1] % n
    b, t, l, r = face_boundary_state(cfg, i, j)
    new = cfg.dirs.copy()
    ip, jp = (i + 1) % n, (j + 1) % n
    if b and t:
        new[i, j] = UP
        new[i, jp] = DOWN
        new[ip, j] = UP
        new[ip, jp] = DOWN
    elif l and r:
        new[i, j] = RIGHT
        new[ip, j] = LEFT
        new[i, jp] = RIGHT
        new[ip, jp] = LEFT
    else:
        return None
    return DimerConfig(cfg.lattice, new)


# ---------------------------------------------------------------------------
# Seed configurations of prescribed winding: maximal height below a plane.
# ---------------------------------------------------------------------------
#
# A function H on faces (in quarter units) is the height of some matching iff
# every directed step between adjacent faces satisfies H(f') - H(f) <= cap,
# where cap is +3 across a crossing with sigma=+1 and +1 with sigma=-1, and H
# has the structural residues mod 4 (both allowed increments of a crossing are
# congruent, so the residues are configuration independent).  The maximal such
# H below a plane of slope delta/L is computed by min-plus relaxation; the
# matching is read off the crossings of absolute increment 3.

def _brick_height_quarters(L):
    """Height field of the brick pattern (single-valued: winding (0,0))."""
    n = 2 * L
    cfg = brick_config(L)
    H = np.zeros((n, n), dtype=np.int64)
    for i in range(1, n):
        H[i, 0] = H[i - 1, 0] + _sigma_v(i - 1, 0) * (QUARTER * int(cfg.v_occupied()[i, 0]) - 1)
    h_occ = cfg.h_occupied()
    for j in range(1, n):
        H[:, j] = H[:, j - 1]
        for i in range(n):
            H[i, j] += _sigma_h(i, j - 1) * (QUARTER * int(h_occ[i, j]) - 1)
    return H


def staircase_config(L, delta):
    """Deterministic configuration with the prescribed interior winding.

    The maximal height function below the plane of slope delta/L is computed
    exactly (heights scaled by L to stay integer); correctness is enforced
    post hoc by winding_numbers rather than assumed.
    """
    lat = TorusLattice(L)
    n = lat.n
    d1, d2 = int(delta[0]), int(delta[1])
    if abs(d1) + abs(d2) >= L:
        raise ValueError(f"winding {delta} is not interior to the slope square for L={L}")

    ii = np.arange(n)[:, None]
    jj = np.arange(n)[None, :]
    even = (ii + jj) % 2 == 0
    # caps (in quarters): sideways crossings allow +3 from odd faces, upward /
    # downward crossings allow +3 from even faces
    cap_side = np.where(even, 1, 3)
    cap_vert = np.where(even, 3, 1)

    # scaled integer heights H' = L*H; linear part g'(f) = 2*(d1*fx + d2*fy)
    g = 2 * (d1 * ii + d2 * jj)
    res = (L * _brick_height_quarters(L) - g) % (4 * L)  # residues of phi mod 4L
    phi = res.copy()

    # relaxation: phi(f') <= phi(f) + L*cap(f->f') - g'(f') + g'(f), per direction
    for _ in range(8 * n * n):
        before = phi
        phi = np.minimum(phi, np.roll(phi, 1, axis=0) + (L * np.roll(cap_side, 1, axis=0) - 2 * d1))
        phi = np.minimum(phi, np.roll(phi, -1, axis=0) + (L * np.roll(cap_side, -1, axis=0) + 2 * d1))
        phi = np.minimum(phi, np.roll(phi, 1, axis=1) + (L * np.roll(cap_vert, 1, axis=1) - 2 * d2))
        phi = np.minimum(phi, np.roll(phi, -1, axis=1) + (L * np.roll(cap_vert, -1, axis=1) + 2 * d2))
        if np.array_equal(before, phi):
            break
    else:
        raise RuntimeError("height relaxation did not converge")

    H = phi + g  # scaled quarter heights of the fundamental domain
    # the vertical edge at (x, y) separates faces (x-1, y) | (x, y); the
    # horizontal edge at (x, y) separates faces (x, y-1) | (x, y); the height
    # increment across an occupied edge has magnitude 3 (scaled: 3L), and the
    # wrap picks up the full winding increment 4*L*delta_i
    Hleft = np.roll(H, 1, axis=0)
    Hleft[0, :] -= 4 * L * d1
    v_occ = np.abs(H - Hleft) == 3 * L
    Hdown = np.roll(H, 1, axis=1)
    Hdown[:, 0] -= 4 * L * d2
    h_occ = np.abs(H - Hdown) == 3 * L

    dirs = np.full((n, n), -1, dtype=np.int8)
    for x, y in zip(*np.nonzero(h_occ)):
        assert dirs[x, y] == -1 and dirs[(x + 1) % n, y] == -1
        dirs[x, y] = RIGHT
        dirs[(x + 1) % n, y] = LEFT
    for x, y in zip(*np.nonzero(v_occ)):
        assert dirs[x, y] == -1 and dirs[x, (y + 1) % n] == -1
        dirs[x, y] = UP
        dirs[x, (y + 1) % n] = DOWN
    assert np.all(dirs >= 0), "height rounding did not produce a perfect matching"

    cfg = DimerConfig(lat, dirs)
    assert cfg.is_valid()
    if winding_numbers(cfg) != (d1, d2):
        raise RuntimeError(f"height rounding produced winding {winding_numbers(cfg)}, wanted {(d1, d2)}")
    return cfg


# ---------------------------------------------------------------------------
# Exhaustive enumeration for L <= 2 (exact oracles)
# ---------------------------------------------------------------------------

def enumerate_matchings(L):
    """All perfect matchings of the torus, L in {1, 2} (guard against blowup)."""
    if L not in (1, 2):
        raise ValueError(f"enumerate_matchings only supports L in {{1, 2}}, got {L}")
    lat = TorusLattice(L)
    n = lat.n
    dirs = np.full((n, n), -1, dtype=np.int8)
    out = []
    order = [(x, y) for y in range(n) for x in range(n)]

    def rec(idx):
        while idx < len(order) and dirs[order[idx]] != -1:
            idx += 1
        if idx == len(order):
            out.append(DimerConfig(lat, dirs.copy()))
            return
        x, y = order[idx]
        for d in (RIGHT, UP, LEFT, DOWN):
            px, py = (x + DX[d]) % n, (y + DY[d]) % n
            if dirs[px, py] != -1 or (px, py) == (x, y):
                continue
            dirs[x, y] = d
            dirs[px, py] = OPP[d]
            rec(idx + 1)
            dirs[x, y] = -1
            dirs[px, py] = -1

    rec(0)
    assert len({c.key() for c in out}) == len(out)
    return out


def matchings_by_sector(L):
    """Enumerated matchings partitioned by winding pair."""
    sectors = {}
    for cfg in enumerate_matchings(L):
        sectors.setdefault(winding_numbers(cfg), []).append(cfg)
    return sectors


def count_matchings_permanent(L):
    """Independent matching count via the permanent of the black/white
    biadjacency matrix (multi-edges counted with multiplicity)."""
    n = 2 * L
    blacks = [(x, y) for x in range(n) for y in range(n) if (x + y) % 2 == 1]
    whites = [(x, y) for x in range(n) for y in range(n) if (x + y) % 2 == 0]
    windex = {w: i for i, w in enumerate(whites)}
    m = len(blacks)
    A = np.zeros((m, m), dtype=np.int64)
    for bi, (x, y) in enumerate(blacks):
        for d in (RIGHT, UP, LEFT, DOWN):
            w = ((x + DX[d]) % n, (y + DY[d]) % n)
            A[bi, windex[w]] += 1
    return _permanent_ryser(A)


def _permanent_ryser(A):
    n = A.shape[0]
    total = 0
    for s in range(1, 1 << n):
        cols = [j for j in range(n) if s >> j & 1]
        prod = 1
        for i in range(n):
            rowsum = 0
            for j in cols:
                rowsum += A[i, j]
            prod *= rowsum
            if prod == 0:
                break
        total += (-1) ** (n - len(cols)) * prod
    return int(total)
