"""Basis families for the detection function ``f(x) = sum_i c_i phi_i(x)``.

Two families are supported:

* ``poly:n`` -- all monomials ``x^i y^j`` with ``i + j <= n``. The term
  ``x^i y^j`` sits at position ``i(n+2) - i(i+1)/2 + j``, so for ``n = 2``
  the order is ``[1, y, y^2, x, xy, x^2]``.
* ``fourier:J:M`` -- polar terms ``r^j cos(m t)`` and ``r^j sin(m t)`` for
  ``j <= J``, ``m <= M``, ordered j-major, m-minor, cosine before sine. The
  ``m = 0`` sine terms vanish identically and are left out.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def monomial_index(n: int, i: int, j: int) -> int:
    """Position of the coefficient of ``x^i y^j`` in a degree-``n`` basis."""
    if n < 0 or i < 0 or j < 0 or i + j > n:
        raise ValueError(f"powers (i={i}, j={j}) out of range for degree {n}")
    return i * (n + 2) - i * (i + 1) // 2 + j


def _power_label(var: str, p: int) -> str:
    if p == 0:
        return ""
    return var if p == 1 else f"{var}^{p}"


@dataclass(frozen=True)
class Basis:
    kind: str
    degree: int = 0
    J: int = 0
    M: int = 0

    def __post_init__(self):
        if self.kind == "poly":
            if self.degree < 0:
                raise ValueError("polynomial degree must be >= 0")
        elif self.kind == "fourier":
            if self.J < 0 or self.M < 0:
                raise ValueError("Fourier orders J, M must be >= 0")
        else:
            raise ValueError(f"unknown basis kind {self.kind!r}")

    @classmethod
    def poly(cls, degree: int) -> "Basis":
        return cls("poly", degree=degree)

    @classmethod
    def fourier(cls, J: int, M: int) -> "Basis":
        return cls("fourier", J=J, M=M)

    @classmethod
    def parse(cls, text: str) -> "Basis":
        """Parse ``poly:<n>`` or ``fourier:<J>:<M>``."""
        parts = text.strip().split(":")
        try:
            if parts[0] == "poly" and len(parts) == 2:
                return cls.poly(int(parts[1]))
            if parts[0] == "fourier" and len(parts) == 3:
                return cls.fourier(int(parts[1]), int(parts[2]))
        except ValueError:
            pass
        raise ValueError(f"bad basis spec {text!r}; expected poly:<n> or fourier:<J>:<M>")

    def __str__(self) -> str:
        if self.kind == "poly":
            return f"poly:{self.degree}"
        return f"fourier:{self.J}:{self.M}"

    @property
    def k(self) -> int:
        if self.kind == "poly":
            return (self.degree + 1) * (self.degree + 2) // 2
        return (self.J + 1) * (self.M + 1) + (self.J + 1) * self.M

    @property
    def terms(self) -> list[tuple]:
        """Term keys in canonical order.

        ``("xy", i, j)`` for monomials, ``("cos"|"sin", j, m)`` for polar terms.
        """
        if self.kind == "poly":
            n = self.degree
            keys = [None] * self.k
            for i in range(n + 1):
                for j in range(n - i + 1):
                    keys[monomial_index(n, i, j)] = ("xy", i, j)
            return keys
        keys = []
        for j in range(self.J + 1):
            for m in range(self.M + 1):
                keys.append(("cos", j, m))
                if m > 0:
                    keys.append(("sin", j, m))
        return keys

    @property
    def labels(self) -> list[str]:
        out = []
        for key in self.terms:
            if key[0] == "xy":
                _, i, j = key
                out.append((_power_label("x", i) + _power_label("y", j)) or "1")
            else:
                trig, j, m = key
                rpart = _power_label("r", j)
                if m == 0:
                    out.append(rpart or "1")
                    continue
                angle = "t" if m == 1 else f"{m}t"
                out.append(f"{rpart} {trig}({angle})".strip())
        return out

    def design_matrix(self, xy) -> np.ndarray:
        """Feature vectors of many points as rows of an ``(N, k)`` array."""
        xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
        x, y = xy[:, 0], xy[:, 1]
        out = np.empty((xy.shape[0], self.k))
        if self.kind == "poly":
            n = self.degree
            xp = np.ones((n + 1, x.size))
            yp = np.ones((n + 1, y.size))
            for p in range(1, n + 1):
                xp[p] = xp[p - 1] * x
                yp[p] = yp[p - 1] * y
            for col, (_, i, j) in enumerate(self.terms):
                out[:, col] = xp[i] * yp[j]
            return out

        r = np.hypot(x, y)
        theta = np.arctan2(y, x)
        col = 0
        rp = np.ones_like(r)
        for j in range(self.J + 1):
            for m in range(self.M + 1):
                out[:, col] = rp * np.cos(m * theta)
                col += 1
                if m > 0:
                    out[:, col] = rp * np.sin(m * theta)
                    col += 1
            rp = rp * r
        return out

    def gradient_matrices(self, xy) -> tuple[np.ndarray, np.ndarray]:
        """Partial derivatives of every monomial feature w.r.t. x and y."""
        if self.kind != "poly":
            raise NotImplementedError("gradients are only provided for monomial bases")
        xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
        x, y = xy[:, 0], xy[:, 1]
        dx = np.zeros((xy.shape[0], self.k))
        dy = np.zeros_like(dx)
        for col, (_, i, j) in enumerate(self.terms):
            if i > 0:
                dx[:, col] = i * x ** (i - 1) * y ** j
            if j > 0:
                dy[:, col] = j * x ** i * y ** (j - 1)
        return dx, dy


def eval_features(basis: Basis, p) -> np.ndarray:
    """Feature vector ``phi(p)`` of a single point, length ``basis.k``."""
    return basis.design_matrix(np.asarray(p, dtype=np.float64).reshape(1, 2))[0]
