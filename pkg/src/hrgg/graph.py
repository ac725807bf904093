"""Graph construction from point clouds.

Adjacency is CSR-style: a flat ``indices`` array with per-vertex slices
given by ``indptr``, rows sorted ascending.  Edges connect pairs at
hyperbolic distance in (0, R] (coincident points are never adjacent).

Two build strategies:

* ``naive``  - blocked all-pairs threshold test (any d);
* ``sweep``  - d = 2 only: sort by azimuth and scan, per vertex, the
  angular window given by its largest possible connection angle
  (the threshold against the smallest radius present).

Both produce identical edge sets; ``auto`` picks the sweep for d = 2
above 2000 vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import connection_cos_gap
from .sampling import PointCloud

__all__ = [
    "Graph",
    "build_hyperbolic_graph",
    "build_euclidean_graph",
    "restrict_annulus",
    "save_graph",
    "load_graph",
]

_SWEEP_MIN_VERTICES = 2000
_PAIR_BLOCK = 2 ** 22  # cap on candidate pairs evaluated per chunk


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with CSR adjacency and a per-vertex payload.

    The payload is the depth t for hyperbolic builds and the Euclidean
    norm for Euclidean builds.
    """

    num_vertices: int
    indptr: np.ndarray
    indices: np.ndarray
    vertex_payload: np.ndarray
    build_meta: dict = field(default_factory=dict)

    @property
    def num_edges(self) -> int:
        return self.indices.shape[0] // 2

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        pos = np.searchsorted(row, v)
        return bool(pos < row.shape[0] and row[pos] == v)

    def edge_array(self) -> np.ndarray:
        """All edges as an (E, 2) array with u < v."""
        src = np.repeat(np.arange(self.num_vertices), self.degrees)
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def validate(self) -> None:
        """Check symmetry, sortedness and absence of self-loops."""
        src = np.repeat(np.arange(self.num_vertices), self.degrees)
        if np.any(src == self.indices):
            raise AssertionError("self-loop present")
        for v in range(self.num_vertices):
            row = self.neighbors(v)
            if row.size > 1 and np.any(np.diff(row) <= 0):
                raise AssertionError("row not strictly sorted")
        # symmetry: the reversed edge list must be the same set
        fwd = {(int(a), int(b)) for a, b in zip(src, self.indices)}
        if {(b, a) for a, b in fwd} != fwd:
            raise AssertionError("adjacency not symmetric")


def _csr_from_pairs(n: int, u: np.ndarray, v: np.ndarray):
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.lexsort((dst, src))
    src = src[order]
    dst = dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst.astype(np.int64, copy=False)


def _coincidence_groups(t: np.ndarray, directions: np.ndarray):
    """Group ids of exactly coincident points, or None if all distinct."""
    if t.shape[0] < 2:
        return None
    stacked = np.column_stack([t, directions])
    _, inverse, counts = np.unique(stacked, axis=0, return_inverse=True,
                                   return_counts=True)
    if counts.max() == 1:
        return None
    return inverse.reshape(-1)


def _edge_pairs_naive(cloud: PointCloud, groups):
    n = len(cloud)
    r = cloud.radii
    D = cloud.directions
    R, zeta = cloud.R, cloud.params.zeta
    us, vs = [], []
    block = max(1, _PAIR_BLOCK // max(n, 1))
    for i0 in range(0, n, block):
        i1 = min(n, i0 + block)
        dots = D[i0:i1] @ D.T
        gap = connection_cos_gap(r[i0:i1, None], r[None, :], R, zeta)
        mask = (gap > 0.0) & (dots >= 1.0 - gap)
        rows = np.arange(i0, i1)[:, None]
        cols = np.arange(n)[None, :]
        mask &= rows < cols
        if groups is not None:
            mask &= groups[i0:i1, None] != groups[None, :]
        ii, jj = np.nonzero(mask)
        us.append(ii + i0)
        vs.append(jj)
    if not us:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(us), np.concatenate(vs)


def _edge_pairs_sweep(cloud: PointCloud, groups):
    """d = 2 angular sweep; returns pairs in the cloud's original ids.

    The deepest ~sqrt(N) points get angular windows too wide to prune,
    so they are tested against every point directly; the remaining
    (shallow) points are scanned within the window set by the largest
    connection angle against the shallowest deep-pass survivor.
    """
    n = len(cloud)
    R, zeta = cloud.R, cloud.params.zeta
    theta = np.mod(cloud.angles[:, 0], 2.0 * np.pi)
    order = np.argsort(theta, kind="stable")
    th = theta[order]
    r = cloud.radii[order]
    g = groups[order] if groups is not None else None

    k_deep = min(n, math.isqrt(n) + 16)
    deep = np.zeros(n, dtype=bool)
    deep[np.argsort(r, kind="stable")[:k_deep]] = True
    cols = np.arange(n)
    chunks: list[tuple[np.ndarray, np.ndarray]] = []

    # pass 1: deep rows against all columns (deep-deep kept once)
    deep_pos = np.flatnonzero(deep)
    row_block = max(1, _PAIR_BLOCK // max(n, 1))
    for i0 in range(0, deep_pos.size, row_block):
        rows = deep_pos[i0:i0 + row_block]
        dth = np.abs(th[rows][:, None] - th[None, :])
        dth = np.minimum(dth, 2.0 * np.pi - dth)
        gap = connection_cos_gap(r[rows][:, None], r[None, :], R, zeta)
        mask = (gap > 0.0) & (np.cos(dth) >= 1.0 - gap)
        mask &= ~deep[None, :] | (cols[None, :] > rows[:, None])
        if g is not None:
            mask &= g[rows][:, None] != g[None, :]
        ii, jj = np.nonzero(mask)
        chunks.append((rows[ii], jj))

    # pass 2: angular windows among the shallow points
    shallow_pos = np.flatnonzero(~deep)
    if shallow_pos.size > 1:
        r_floor = r[shallow_pos].min()
        gap_max = np.clip(connection_cos_gap(r[shallow_pos],
                                             np.full(shallow_pos.size, r_floor),
                                             R, zeta), 0.0, 2.0)
        width = np.minimum(2.0 * np.arcsin(np.sqrt(gap_max / 2.0)), np.pi)
        # three copies so windows centered at th + 2*pi wrap both ways
        ext_th = np.concatenate([th, th + 2.0 * np.pi, th + 4.0 * np.pi])
        center = th[shallow_pos] + 2.0 * np.pi
        lo = np.searchsorted(ext_th, center - width, side="left")
        hi = np.searchsorted(ext_th, center + width, side="right")
        counts = hi - lo
        bounds = np.cumsum(counts)
        start = 0
        while start < shallow_pos.size:
            base = bounds[start - 1] if start else 0
            stop = int(np.searchsorted(bounds, base + _PAIR_BLOCK, side="left")) + 1
            stop = min(stop, shallow_pos.size)
            cnt = counts[start:stop]
            total = int(cnt.sum())
            if total:
                i_pos = np.repeat(shallow_pos[start:stop], cnt)
                starts = np.repeat(lo[start:stop], cnt)
                steps = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
                j_pos = (starts + steps) % n
                keep = ~deep[j_pos] & (i_pos < j_pos)
                i_pos, j_pos = i_pos[keep], j_pos[keep]
                dth = np.abs(th[i_pos] - th[j_pos])
                dth = np.minimum(dth, 2.0 * np.pi - dth)
                gap = connection_cos_gap(r[i_pos], r[j_pos], R, zeta)
                mask = (gap > 0.0) & (np.cos(dth) >= 1.0 - gap)
                if g is not None:
                    mask &= g[i_pos] != g[j_pos]
                chunks.append((i_pos[mask], j_pos[mask]))
            start = stop

    if chunks:
        us = np.concatenate([c[0] for c in chunks])
        vs = np.concatenate([c[1] for c in chunks])
    else:
        us = np.empty(0, np.int64)
        vs = np.empty(0, np.int64)
    # back to original vertex ids; dedupe window wrap-around ties
    us, vs = order[us], order[vs]
    lohi = np.sort(np.column_stack([us, vs]), axis=1)
    if lohi.shape[0]:
        lohi = np.unique(lohi, axis=0)
    return lohi[:, 0], lohi[:, 1]


def build_hyperbolic_graph(cloud: PointCloud, strategy: str = "auto") -> Graph:
    """Graph with edges between pairs at hyperbolic distance in (0, R]."""
    n = len(cloud)
    if strategy == "auto":
        strategy = "sweep" if (cloud.params.d == 2 and n > _SWEEP_MIN_VERTICES) else "naive"
    if strategy == "sweep" and cloud.params.d != 2:
        raise ValueError("the angular sweep requires d = 2")
    if strategy not in ("naive", "sweep"):
        raise ValueError(f"unknown build strategy {strategy!r}")

    groups = _coincidence_groups(cloud.t, cloud.directions)
    if n == 0:
        u = v = np.empty(0, np.int64)
    elif strategy == "naive":
        u, v = _edge_pairs_naive(cloud, groups)
    else:
        u, v = _edge_pairs_sweep(cloud, groups)
    indptr, indices = _csr_from_pairs(n, u, v)
    meta = {"model": "hyperbolic", "R": cloud.R, "d": cloud.params.d,
            "zeta": cloud.params.zeta, "strategy": strategy,
            "annulus_gamma": cloud.annulus_gamma}
    return Graph(num_vertices=n, indptr=indptr, indices=indices,
                 vertex_payload=cloud.t.copy(), build_meta=meta)


def restrict_annulus(cloud: PointCloud, gamma: float) -> PointCloud:
    """Points with depth t <= gamma * R; gamma = 1 keeps everything."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    mask = cloud.t <= gamma * cloud.R
    return cloud.subset(mask, annulus_gamma=gamma)


def build_euclidean_graph(points: np.ndarray, s: float) -> Graph:
    """Graph on Euclidean points with edges at distance in (0, s]."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be an (N, d) array")
    n = points.shape[0]
    s2 = float(s) ** 2
    us, vs = [], []
    block = max(1, _PAIR_BLOCK // max(n, 1))
    for i0 in range(0, n, block):
        i1 = min(n, i0 + block)
        diff = points[i0:i1, None, :] - points[None, :, :]
        dist2 = np.einsum("ijk,ijk->ij", diff, diff)
        mask = (dist2 > 0.0) & (dist2 <= s2)
        rows = np.arange(i0, i1)[:, None]
        cols = np.arange(n)[None, :]
        mask &= rows < cols
        ii, jj = np.nonzero(mask)
        us.append(ii + i0)
        vs.append(jj)
    u = np.concatenate(us) if us else np.empty(0, np.int64)
    v = np.concatenate(vs) if vs else np.empty(0, np.int64)
    indptr, indices = _csr_from_pairs(n, u, v)
    meta = {"model": "euclidean", "R": float(s)}
    return Graph(num_vertices=n, indptr=indptr, indices=indices,
                 vertex_payload=np.linalg.norm(points, axis=1) if n else np.empty(0),
                 build_meta=meta)


# ---------------------------------------------------------------------------
# edge-list file format


def save_graph(g: Graph, path) -> Path:
    """Edge list: header '# vertices=<N> R=<R> model=<...>', then 'u v' with u < v."""
    path = Path(path)
    model = g.build_meta.get("model", "hyperbolic")
    R = g.build_meta.get("R", 0.0)
    with path.open("w") as fh:
        fh.write(f"# vertices={g.num_vertices} R={R!r} model={model}\n")
        for a, b in g.edge_array():
            fh.write(f"{a} {b}\n")
    return path


def load_graph(path) -> Graph:
    """Rebuild adjacency from an edge list (payload unavailable: zeros)."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if not header.startswith("# "):
            raise ValueError("missing edge-list header")
        fields = dict(part.split("=", 1) for part in header[2:].split())
        n = int(fields["vertices"])
        pairs = [tuple(map(int, line.split())) for line in fh if line.strip()]
    if pairs:
        arr = np.asarray(pairs, dtype=np.int64)
        u, v = arr[:, 0], arr[:, 1]
    else:
        u = v = np.empty(0, np.int64)
    indptr, indices = _csr_from_pairs(n, u, v)
    meta = {"model": fields.get("model", "hyperbolic"), "R": float(fields.get("R", 0.0))}
    return Graph(num_vertices=n, indptr=indptr, indices=indices,
                 vertex_payload=np.zeros(n), build_meta=meta)
