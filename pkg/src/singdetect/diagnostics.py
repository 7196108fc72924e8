"""Zero-level-set tracing and the radius diagnostic for fitted detectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .data import RectDomain

# cell edges: 0 bottom, 1 right, 2 top, 3 left; corners BL, BR, TR, TL
_CASES = {
    0b0001: [(3, 0)], 0b0010: [(0, 1)], 0b0011: [(3, 1)], 0b0100: [(1, 2)],
    0b0110: [(0, 2)], 0b0111: [(3, 2)], 0b1000: [(2, 3)], 0b1001: [(2, 0)],
    0b1011: [(2, 1)], 0b1100: [(1, 3)], 0b1101: [(1, 0)], 0b1110: [(0, 3)],
}


@dataclass(frozen=True, eq=False)
class TracedCurve:
    segments: list[np.ndarray]
    grid_resolution: int
    domain: RectDomain
    tolerance: float = 0.0

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def empty(self) -> bool:
        return not self.segments

    def vertices(self) -> np.ndarray:
        if not self.segments:
            return np.empty((0, 2))
        return np.vstack(self.segments)

    def length(self) -> float:
        return float(sum(np.linalg.norm(np.diff(s, axis=0), axis=1).sum() for s in self.segments))

    def write_csv(self, stream: IO[str]) -> None:
        stream.write("segment_id,x,y\n")
        for sid, seg in enumerate(self.segments):
            for x, y in seg:
                stream.write(f"{sid},{format(x, '.17g')},{format(y, '.17g')}\n")


@dataclass(frozen=True, eq=False)
class RadiusSamples:
    values: np.ndarray
    points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    @property
    def count(self) -> int:
        return int(self.values.size)


def _bisect(f, a: np.ndarray, b: np.ndarray, fa: np.ndarray, eps: float,
            max_iter: int = 60) -> np.ndarray:
    """Roots on segments ``[a, b]`` with a sign change, vectorised over rows."""
    a, b = a.copy(), b.copy()
    root = 0.5 * (a + b)
    done = np.abs(fa) <= eps
    root[done] = a[done]
    pos_a = fa > 0
    for _ in range(max_iter):
        if done.all():
            break
        mid = 0.5 * (a + b)
        fm = f(mid)
        hit = ~done & (np.abs(fm) <= eps)
        root[~done] = mid[~done]
        done |= hit
        same = (fm > 0) == pos_a
        a = np.where(same[:, None], mid, a)
        b = np.where(same[:, None], b, mid)
    return root


def trace_zero_set(model, domain: RectDomain, resolution: int = 256) -> TracedCurve:
    """Polylines approximating ``{f = 0}`` inside ``domain`` by marching squares.

    Crossing points on grid edges are refined by bisection; saddle cells are
    split according to the sign of ``f`` at the cell centre.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    f = model if callable(model) else None
    if f is None:
        raise TypeError("model must be callable on an (N, 2) array")
    n = resolution
    xs = np.linspace(domain.xmin, domain.xmax, n + 1)
    ys = np.linspace(domain.ymin, domain.ymax, n + 1)
    GX, GY = np.meshgrid(xs, ys, indexing="ij")
    V = np.asarray(f(np.column_stack([GX.ravel(), GY.ravel()])), dtype=np.float64).reshape(n + 1, n + 1)
    scale = float(np.abs(V).max())
    eps = 1e-6 * scale
    if scale == 0.0:
        return TracedCurve([], n, domain, eps)
    P = V > 0

    # crossing edges; ids: horizontal (i,j)-(i+1,j) -> i*(n+1)+j, vertical offset by H
    H = n * (n + 1)
    hx = P[:-1, :] != P[1:, :]
    vx = P[:, :-1] != P[:, 1:]
    hi, hj = np.nonzero(hx)
    vi, vj = np.nonzero(vx)
    a = np.vstack([np.column_stack([xs[hi], ys[hj]]), np.column_stack([xs[vi], ys[vj]])])
    b = np.vstack([np.column_stack([xs[hi + 1], ys[hj]]), np.column_stack([xs[vi], ys[vj + 1]])])
    fa = np.concatenate([V[hi, hj], V[vi, vj]])
    roots = _bisect(lambda p: np.asarray(f(p), dtype=np.float64), a, b, fa, eps)
    ids = np.concatenate([hi * (n + 1) + hj, H + vi * n + vj])
    where = {int(e): r for e, r in zip(ids, range(ids.size))}

    def edge_id(i, j, e):
        if e == 0:
            return i * (n + 1) + j
        if e == 2:
            return i * (n + 1) + j + 1
        if e == 3:
            return H + i * n + j
        return H + (i + 1) * n + j

    code = (P[:-1, :-1].astype(int) | (P[1:, :-1].astype(int) << 1)
            | (P[1:, 1:].astype(int) << 2) | (P[:-1, 1:].astype(int) << 3))
    links: list[tuple[int, int]] = []
    ci, cj = np.nonzero((code != 0) & (code != 15))
    for i, j in zip(ci.tolist(), cj.tolist()):
        c = int(code[i, j])
        if c in (0b0101, 0b1010):
            centre = np.array([[0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])]])
            centre_pos = bool(np.asarray(f(centre))[0] > 0)
            bl_pos = bool(c & 1)
            if centre_pos == bl_pos:
                # BL and TR joined through the centre: cut off BR and TL corners
                pairs = [(0, 1), (2, 3)]
            else:
                pairs = [(3, 0), (1, 2)]
        else:
            pairs = _CASES[c]
        for e1, e2 in pairs:
            links.append((where[edge_id(i, j, e1)], where[edge_id(i, j, e2)]))

    return TracedCurve(_chain(links, roots), n, domain, eps)


def _chain(links: list[tuple[int, int]], roots: np.ndarray) -> list[np.ndarray]:
    """Join cell segments that share a crossing point into polylines."""
    adj: dict[int, list[int]] = {}
    for u, v in links:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    used: set[frozenset] = set()
    visited: set[int] = set()
    out = []

    def walk(start: int) -> list[int]:
        path = [start]
        visited.add(start)
        cur = start
        while True:
            nxt = None
            for cand in adj[cur]:
                key = frozenset((cur, cand))
                if key not in used:
                    nxt = cand
                    used.add(key)
                    break
            if nxt is None:
                return path
            path.append(nxt)
            visited.add(nxt)
            if nxt == start:
                return path
            cur = nxt

    # open chains first (ends have degree 1), then closed loops
    for node in sorted(adj):
        if len(adj[node]) == 1 and node not in visited:
            out.append(walk(node))
    for node in sorted(adj):
        if node not in visited:
            out.append(walk(node))
    return [roots[p] for p in out if len(p) >= 2]


def radius_function(curve: TracedCurve, n_samples: int = 100) -> RadiusSamples:
    """Distance to the origin at ``n_samples`` points spread evenly by arc length.

    Samples sit at the midpoints of ``n_samples`` equal arc-length bins,
    taken over the segments in order.
    """
    if curve.empty:
        raise ValueError("cannot sample an empty curve")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    pieces = [(s[:-1], s[1:]) for s in curve.segments]
    starts = np.vstack([p[0] for p in pieces])
    ends = np.vstack([p[1] for p in pieces])
    lens = np.linalg.norm(ends - starts, axis=1)
    total = lens.sum()
    if total == 0.0:
        pts = np.repeat(starts[:1], n_samples, axis=0)
    else:
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        s = (np.arange(n_samples) + 0.5) * (total / n_samples)
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, lens.size - 1)
        t = np.where(lens[k] > 0, (s - cum[k]) / np.where(lens[k] > 0, lens[k], 1.0), 0.0)
        pts = starts[k] + t[:, None] * (ends[k] - starts[k])
    return RadiusSamples(np.hypot(pts[:, 0], pts[:, 1]), pts)
