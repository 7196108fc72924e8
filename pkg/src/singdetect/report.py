"""Coefficient tables: fitted vs exact, matched by term and sign-aligned."""
from __future__ import annotations

import numpy as np

from .basis import Basis
from .synthgen import CurveSpec

# exact zero-set functions in polar form, keyed by (trig, r power, angular order)
_POLAR_EXACT = {
    "circle": {("cos", 0, 0): -0.25, ("cos", 2, 0): 1.0},
    "xshape": {("cos", 1, 2): 1.0},
    "semicircles": {("cos", 0, 0): 0.375, ("cos", 1, 0): -1.25, ("cos", 2, 0): 1.0},
}


def exact_coefficients(name: str, basis: Basis) -> np.ndarray:
    """Normalised coefficients of a named exact curve expressed in ``basis``."""
    out = np.zeros(basis.k)
    keys = basis.terms
    if basis.kind == "poly":
        spec = CurveSpec.named(name)
        for key, v in zip(spec.basis.terms, spec.coefficients):
            if v == 0.0:
                continue
            if key not in keys:
                raise ValueError(f"{name} needs degree {spec.degree}; basis is {basis}")
            out[keys.index(key)] = v
    else:
        if name not in _POLAR_EXACT:
            raise ValueError(f"no polar form known for {name!r}")
        for key, v in _POLAR_EXACT[name].items():
            if key not in keys:
                raise ValueError(f"{name} needs term {key}; basis is {basis}")
            out[keys.index(key)] = v
    return out / np.linalg.norm(out)


def align_sign(c, ref) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    return -c if np.linalg.norm(c + ref) < np.linalg.norm(c - ref) else c


def coefficient_table(basis: Basis, fitted, exact=None, title: str | None = None) -> str:
    """Plain-text table, one row per term, with an error column when ``exact`` is given."""
    fitted = np.asarray(fitted, dtype=np.float64)
    rows = []
    if exact is not None:
        fitted = align_sign(fitted, exact)
        head = f"{'term':<12}{'fitted':>14}{'exact':>14}{'|error|':>12}"
        for lab, f, e in zip(basis.labels, fitted, exact):
            rows.append(f"{lab:<12}{f:>14.6g}{e:>14.6g}{abs(f - e):>12.3e}")
        err = float(np.linalg.norm(fitted - exact))
        foot = f"{'||error||':<12}{'':>28}{err:>12.3e}"
    else:
        head = f"{'term':<12}{'fitted':>14}"
        rows = [f"{lab:<12}{f:>14.6g}" for lab, f in zip(basis.labels, fitted)]
        foot = None
    rule = "-" * len(head)
    lines = ([title] if title else []) + [head, rule, *rows, rule]
    if foot:
        lines.append(foot)
    return "\n".join(lines) + "\n"
