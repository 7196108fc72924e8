"""Synthetic refinement-like point sets around a known singular curve.

Batch 0 is a uniform grid over the domain (a coarse mesh). Each later batch
``i`` lies in the tube of half-width ``w0 * q**i`` around the zero set of
``F*``, plus a few uniform "outliers", so batches tighten toward the curve
the way adaptive refinement does.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .basis import Basis
from .data import BatchedPointSet, PointSet, RectDomain

SQUARE = RectDomain(-1.0, 1.0, -1.0, 1.0)
HALF_STRIP = RectDomain(0.0, 1.0, -1.0, 1.0)

# batch sizes for batches 1..17; with the 5x5 grid this totals 322 points
DEFAULT_BATCH_SIZES = (18,) * 8 + (17,) * 9


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class CurveSpec:
    """A singular curve ``{F* = 0}`` with ``F*`` a polynomial in monomial order."""

    name: str
    degree: int
    coefficients: tuple[float, ...]
    domain: RectDomain = SQUARE

    def __post_init__(self):
        basis = Basis.poly(self.degree)
        if len(self.coefficients) != basis.k:
            raise ValueError(f"degree {self.degree} needs {basis.k} coefficients, "
                             f"got {len(self.coefficients)}")

    @property
    def basis(self) -> Basis:
        return Basis.poly(self.degree)

    @property
    def exact(self) -> np.ndarray:
        c = np.asarray(self.coefficients, dtype=np.float64)
        return c / np.linalg.norm(c)

    def F(self, xy) -> np.ndarray:
        return self.basis.design_matrix(xy) @ np.asarray(self.coefficients)

    def tube_distance(self, xy) -> np.ndarray:
        """First-order distance ``|F| / max(||grad F||, 1e-8)`` to the zero set."""
        c = np.asarray(self.coefficients)
        dx, dy = self.basis.gradient_matrices(xy)
        g = np.hypot(dx @ c, dy @ c)
        return np.abs(self.F(xy)) / np.maximum(g, 1e-8)

    @classmethod
    def circle(cls, r: float = 0.5, domain: RectDomain = SQUARE) -> "CurveSpec":
        # x^2 + y^2 - r^2
        return cls("circle", 2, (-r * r, 0.0, 1.0, 0.0, 0.0, 1.0), domain)

    @classmethod
    def lshape(cls, x0: float = -1.0, y0: float = -1.0, domain: RectDomain = SQUARE) -> "CurveSpec":
        # (x - x0)(y - y0) = x0 y0 - x0 y - y0 x + xy
        return cls("lshape", 2, (x0 * y0, -x0, 0.0, -y0, 1.0, 0.0), domain)

    @classmethod
    def xshape(cls, domain: RectDomain = SQUARE) -> "CurveSpec":
        return cls("xshape", 2, (0.0, 0.0, -1.0, 0.0, 0.0, 1.0), domain)

    @classmethod
    def semicircles(cls, r1: float = 0.5, r2: float = 0.75,
                    domain: RectDomain = HALF_STRIP) -> "CurveSpec":
        # (s - a)(s - b) with s = x^2 + y^2: s^2 - (a + b) s + ab
        a, b = r1 * r1, r2 * r2
        basis = Basis.poly(4)
        c = np.zeros(basis.k)
        for (i, j), v in {(0, 0): a * b, (2, 0): -(a + b), (0, 2): -(a + b),
                          (4, 0): 1.0, (0, 4): 1.0, (2, 2): 2.0}.items():
            c[basis.terms.index(("xy", i, j))] = v
        return cls("semicircles", 4, tuple(c), domain)

    @classmethod
    def custom_poly(cls, coefficients, degree: int,
                    domain: RectDomain = SQUARE) -> "CurveSpec":
        return cls("poly", degree, tuple(float(v) for v in coefficients), domain)

    @classmethod
    def from_file(cls, path) -> "CurveSpec":
        """JSON ``{"degree": n, "coefficients": [...], "domain": {...}?}``."""
        doc = json.loads(Path(path).read_text())
        domain = RectDomain.from_dict(doc["domain"]) if doc.get("domain") else SQUARE
        return cls.custom_poly(doc["coefficients"], int(doc["degree"]), domain)

    @classmethod
    def named(cls, name: str) -> "CurveSpec":
        if name.startswith("poly:"):
            return cls.from_file(name[5:])
        makers = {"circle": cls.circle, "lshape": cls.lshape, "xshape": cls.xshape,
                  "semicircles": cls.semicircles}
        if name not in makers:
            raise ValueError(f"unknown curve {name!r}; choose from {sorted(makers)} or poly:<file>")
        return makers[name]()


@dataclass(frozen=True)
class GenParams:
    n_batches: int = 17
    batch_sizes: tuple[int, ...] = DEFAULT_BATCH_SIZES
    grid: int = 5
    w0: float = 0.3
    q: float = 0.25
    outlier_fraction: float = 0.0
    seed: int = 0
    oversample: int = 20
    max_draws: int = 1_000_000

    def __post_init__(self):
        if self.n_batches < 0:
            raise ValueError("n_batches must be >= 0")
        if self.grid < 2:
            raise ValueError("grid must have at least 2 nodes per side")
        if not self.w0 > 0:
            raise ValueError("w0 must be positive")
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if not 0.0 <= self.outlier_fraction <= 1.0:
            raise ValueError("outlier_fraction must lie in [0, 1]")
        if self.oversample < 1:
            raise ValueError("oversample must be >= 1")
        if any(s < 0 for s in self.batch_sizes):
            raise ValueError("batch sizes must be >= 0")

    def size_of(self, i: int) -> int:
        """Tube points in batch ``i >= 1``; the schedule's last entry repeats."""
        if not self.batch_sizes:
            return 0
        return self.batch_sizes[min(i - 1, len(self.batch_sizes) - 1)]

    def tube_width(self, i: int) -> float:
        return self.w0 * self.q ** i

    def to_dict(self) -> dict:
        d = asdict(self)
        d["batch_sizes"] = list(self.batch_sizes)
        return d


def grid_points(domain: RectDomain, n: int) -> np.ndarray:
    xs = np.linspace(domain.xmin, domain.xmax, n)
    ys = np.linspace(domain.ymin, domain.ymax, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def _uniform(rng: np.random.Generator, domain: RectDomain, n: int) -> np.ndarray:
    u = rng.random((n, 2))
    return np.column_stack([domain.xmin + u[:, 0] * (domain.xmax - domain.xmin),
                            domain.ymin + u[:, 1] * (domain.ymax - domain.ymin)])


def _project(spec: CurveSpec, pts: np.ndarray, iters: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Newton steps ``p -= F grad F / |grad F|^2`` toward the zero set; returns unit normals too."""
    c = np.asarray(spec.coefficients)
    basis = spec.basis
    for _ in range(iters):
        f = spec.F(pts)
        dx, dy = basis.gradient_matrices(pts)
        g = np.column_stack([dx @ c, dy @ c])
        g2 = np.maximum(np.sum(g * g, axis=1), 1e-16)
        step = (f / g2)[:, None] * g
        # damp long jumps so far-away starts do not overshoot wildly
        norm = np.linalg.norm(step, axis=1, keepdims=True)
        step = np.where(norm > 0.25, step * (0.25 / np.maximum(norm, 1e-300)), step)
        pts = pts - step
    dx, dy = basis.gradient_matrices(pts)
    g = np.column_stack([dx @ c, dy @ c])
    normals = g / np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-8)
    return pts, normals


def _tube_candidates(rng, spec: CurveSpec, width: float, n: int, max_draws: int) -> np.ndarray:
    """Points within ``width`` of the zero set: project, offset along the normal, then check."""
    out = np.empty((0, 2))
    drawn = 0
    chunk = 1024
    while out.shape[0] < n:
        if drawn >= max_draws:
            raise GenerationError(
                f"only {out.shape[0]} of {n} points found within {width:.3g} of the "
                f"{spec.name} curve after {drawn} draws; is the zero set inside the domain?")
        start = _uniform(rng, spec.domain, chunk)
        offset = rng.uniform(-1.0, 1.0, chunk)
        drawn += chunk
        foot, normal = _project(spec, start)
        cand = foot + (offset * width)[:, None] * normal
        ok = spec.domain.contains(cand) & (spec.tube_distance(cand) <= width)
        out = np.vstack([out, cand[ok]])
    return out


def _farthest_points(cand: np.ndarray, existing: np.ndarray, n: int) -> np.ndarray:
    """Greedily pick ``n`` candidates, each farthest from everything already placed."""
    d2 = np.full(cand.shape[0], np.inf)
    for chunk in np.array_split(existing, max(1, existing.shape[0] // 512)):
        if chunk.size:
            diff = cand[:, None, :] - chunk[None, :, :]
            d2 = np.minimum(d2, np.einsum("ijk,ijk->ij", diff, diff).min(axis=1))
    picked = []
    for _ in range(n):
        j = int(np.argmax(d2))
        picked.append(j)
        diff = cand - cand[j]
        d2 = np.minimum(d2, np.einsum("ij,ij->i", diff, diff))
        d2[j] = -1.0
    return cand[picked]


def generate(spec: CurveSpec, params: GenParams | None = None) -> BatchedPointSet:
    """Deterministic (under ``params.seed``) batched point set around ``spec``.

    New tube points are chosen to fill the largest gaps left by all earlier
    batches, the way refinement inserts nodes between existing ones.
    """
    params = params or GenParams()
    rng = np.random.default_rng(params.seed)
    placed = grid_points(spec.domain, params.grid)
    batches = [PointSet(placed, spec.domain)]
    for i in range(1, params.n_batches + 1):
        n = params.size_of(i)
        cand = _tube_candidates(rng, spec, params.tube_width(i), params.oversample * n,
                                params.max_draws)
        tube = _farthest_points(cand, placed, n)
        n_out = math.ceil(params.outlier_fraction * n)
        pts = np.vstack([tube, _uniform(rng, spec.domain, n_out)]) if n_out else tube
        placed = np.vstack([placed, pts])
        batches.append(PointSet(pts, spec.domain))
    return BatchedPointSet(tuple(batches), spec.domain)


def circle_distance(xy, r: float = 0.5) -> np.ndarray:
    """Exact Euclidean distance to the origin-centred circle of radius ``r``."""
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    return np.abs(np.hypot(xy[:, 0], xy[:, 1]) - r)
