"""Unit-norm weighted least squares for the detection coefficients.

Every point carries the pseudo-label 0, so maximising the Gaussian
likelihood over ``||c|| = 1`` is the same as minimising
``L(c) = sum_x w_x f(x)^2 = c^T G c`` with ``w_x = 1 / (2 sigma_x^2)``.
The minimiser on the unit sphere is the eigenvector of ``G`` for its
smallest eigenvalue, which is what :func:`solve_unit_norm_min` returns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import Basis, eval_features
from .data import BatchedPointSet, merge_batches
from .filtering import FilterReport, KdeParams, KnnParams, apply_filter
from .linalg import jacobi_eigh

RANK_DEFICIENT = "rank_deficient"
NON_UNIQUE = "non_unique"


@dataclass(frozen=True)
class WeightScheme:
    """How each point is weighted in the loss.

    ``uniform``: sigma^2 = 1 for every point (weight 1/2).
    ``per_batch``: explicit sigma_i per batch.
    ``schedule``: sigma_i^2 = b^(2(R - i)) / 2, i.e. weight b^(-2(R - i)).
    """

    kind: str = "uniform"
    sigmas: tuple[float, ...] = ()
    base: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "per_batch", "schedule"):
            raise ValueError(f"unknown weight scheme {self.kind!r}")
        if self.kind == "per_batch":
            if not self.sigmas or not all(s > 0 and math.isfinite(s) for s in self.sigmas):
                raise ValueError("per-batch sigmas must be positive and finite")
            object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        if self.kind == "schedule" and not self.base >= 1.0:
            raise ValueError(f"schedule base must be >= 1, got {self.base}")

    @classmethod
    def uniform(cls) -> "WeightScheme":
        return cls("uniform")

    @classmethod
    def schedule(cls, base: float) -> "WeightScheme":
        return cls("schedule", base=float(base))

    @classmethod
    def per_batch(cls, sigmas) -> "WeightScheme":
        return cls("per_batch", sigmas=tuple(sigmas))

    @classmethod
    def parse(cls, text: str) -> "WeightScheme":
        """``uniform``, ``schedule:<b>`` or ``sigmas:<s0>,<s1>,...``."""
        kind, _, arg = text.strip().partition(":")
        try:
            if kind == "uniform" and not arg:
                return cls.uniform()
            if kind == "schedule" and arg:
                return cls.schedule(float(arg))
            if kind == "sigmas" and arg:
                return cls.per_batch(float(s) for s in arg.split(","))
        except ValueError as exc:
            raise ValueError(f"bad weight spec {text!r}: {exc}") from None
        raise ValueError(f"bad weight spec {text!r}; expected uniform, schedule:<b> "
                         f"or sigmas:<csv>")

    def __str__(self) -> str:
        if self.kind == "uniform":
            return "uniform"
        if self.kind == "schedule":
            return f"schedule:{self.base:g}"
        return "sigmas:" + ",".join(f"{s:g}" for s in self.sigmas)

    def batch_weights(self, R: int) -> np.ndarray:
        """Loss weight ``1 / (2 sigma_i^2)`` of each batch ``i = 0..R``."""
        if self.kind == "uniform":
            return np.full(R + 1, 0.5)
        if self.kind == "schedule":
            return self.base ** (-2.0 * (R - np.arange(R + 1)))
        if len(self.sigmas) != R + 1:
            raise ValueError(f"{len(self.sigmas)} sigmas given for {R + 1} batches")
        return 1.0 / (2.0 * np.square(self.sigmas))

    def point_weights(self, X) -> np.ndarray:
        if isinstance(X, BatchedPointSet):
            return self.batch_weights(X.R)[X.batch_index()]
        if self.kind != "uniform":
            raise ValueError(f"weight scheme {self} needs batched (Type II) data")
        return np.full(len(X), 0.5)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    G: np.ndarray
    n_points: int
    warnings: tuple[str, ...] = ()

    @property
    def k(self) -> int:
        return self.G.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.G))

    def loss(self, c) -> float:
        c = np.asarray(c, dtype=np.float64)
        return float(c @ self.G @ c)


def assemble_gram(X, basis: Basis, weights: WeightScheme | None = None) -> GramMatrix:
    """``G = sum_x w_x phi(x) phi(x)^T``."""
    weights = weights or WeightScheme.uniform()
    w = weights.point_weights(X)
    pts = merge_batches(X).points
    Phi = basis.design_matrix(pts)
    G = Phi.T @ (w[:, None] * Phi)
    G = 0.5 * (G + G.T)
    n_eff = int(np.count_nonzero(w > 0))
    warnings = (RANK_DEFICIENT,) if basis.k > n_eff else ()
    return GramMatrix(G, len(pts), warnings)


def _canonical_sign(c: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(c)))
    return -c if c[i] < 0 else c


@dataclass(frozen=True, eq=False)
class FitReport:
    coefficients: np.ndarray
    residual: float
    eigen_gap: float
    eigenvalues: np.ndarray
    basis: Basis | None = None
    weights: WeightScheme | None = None
    n_points: int = 0
    warnings: tuple[str, ...] = ()
    filter_report: FilterReport | None = None

    @property
    def model(self) -> "DetectionModel":
        if self.basis is None:
            raise ValueError("fit report carries no basis")
        return DetectionModel(self.basis, self.coefficients)

    def to_dict(self) -> dict:
        out = {
            "basis": str(self.basis) if self.basis is not None else None,
            "labels": self.basis.labels if self.basis is not None else None,
            "coefficients": self.coefficients.tolist(),
            "residual": float(self.residual),
            "eigen_gap": float(self.eigen_gap),
            "weights": str(self.weights) if self.weights is not None else None,
            "n_points": int(self.n_points),
            "sign_convention": "largest |coefficient| positive",
            "warnings": list(self.warnings),
        }
        if self.filter_report is not None:
            out["filter"] = {k: v for k, v in self.filter_report.to_dict().items()
                             if k in ("params", "n_input", "n_kept", "threshold")}
        return out


def solve_unit_norm_min(gram: GramMatrix | np.ndarray) -> FitReport:
    """Minimise ``c^T G c`` over the unit sphere via the smallest eigenpair."""
    if isinstance(gram, GramMatrix):
        G, warnings, n_points = gram.G, list(gram.warnings), gram.n_points
    else:
        G, warnings, n_points = np.asarray(gram, dtype=np.float64), [], 0
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("Gram matrix must be square")
    if G.shape[0] < 2:
        raise ValueError("need a basis of at least two functions")
    if not np.all(np.isfinite(G)):
        raise ValueError("Gram matrix has non-finite entries")
    scale = max(np.abs(G).max(), np.finfo(float).tiny)
    if np.abs(G - G.T).max() > 1e-12 * scale:
        raise ValueError("Gram matrix is not symmetric")

    w, V = jacobi_eigh(G)
    gap = float(w[1] - w[0])
    c = _canonical_sign(V[:, 0])
    if gap < 1e-8 * max(1.0, float(w[-1])):
        warnings.append(NON_UNIQUE)
        tied = np.flatnonzero(w - w[0] <= 1e-8 * max(1.0, float(w[-1])))
        candidates = [tuple(_canonical_sign(V[:, j])) for j in tied]
        c = np.array(max(candidates))
    c = c / np.linalg.norm(c)
    return FitReport(c, float(w[0]), gap, w, n_points=n_points,
                     warnings=tuple(dict.fromkeys(warnings)))


def fit(X, basis: Basis, weights: WeightScheme | None = None,
        filter_params: KdeParams | KnnParams | None = None) -> FitReport:
    """Fit a detection function, optionally after density filtering.

    With ``filter_params`` the data is merged, filtered and fitted with
    uniform weights; otherwise ``weights`` applies to the raw data.
    """
    frep = None
    if filter_params is not None:
        frep = apply_filter(merge_batches(X), filter_params)
        X, weights = frep.kept, WeightScheme.uniform()
    weights = weights or WeightScheme.uniform()
    gram = assemble_gram(X, basis, weights)
    rep = solve_unit_norm_min(gram)
    return FitReport(rep.coefficients, rep.residual, rep.eigen_gap, rep.eigenvalues,
                     basis, weights, gram.n_points, rep.warnings, frep)


@dataclass(frozen=True, eq=False)
class DetectionModel:
    basis: Basis
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.float64).ravel()
        if c.size != self.basis.k:
            raise ValueError(f"expected {self.basis.k} coefficients, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        nrm = np.linalg.norm(c)
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError(f"coefficients must have unit norm, got {nrm:.6g}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def normalized(cls, basis: Basis, coefficients) -> "DetectionModel":
        c = np.asarray(coefficients, dtype=np.float64)
        nrm = np.linalg.norm(c)
        if nrm == 0.0:
            raise ValueError("the zero vector cannot be normalised")
        return cls(basis, c / nrm)

    def __call__(self, xy) -> np.ndarray:
        return self.basis.design_matrix(xy) @ self.coefficients


def evaluate_detection(model: DetectionModel, p) -> float:
    return float(eval_features(model.basis, p) @ model.coefficients)


def coefficient_error(c, c_ref) -> float:
    """Sign-aligned Euclidean distance, ``min(||c - r||, ||c + r||)``."""
    c = np.asarray(c, dtype=np.float64)
    r = np.asarray(c_ref, dtype=np.float64)
    return float(min(np.linalg.norm(c - r), np.linalg.norm(c + r)))
