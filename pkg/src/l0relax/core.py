"""Problem data model, validation, and instance serialization.

An instance is the quadruple (X, y, lam, mu) of the penalized least-squares
problem

    min_b 0.5*|X b - y|^2 + 0.5*mu*|b|^2 + lam*|b|_0

with the constant 0.5*y'y always included, so objective values are absolute
and comparable across solvers.  The stabilized Gram matrix G = X'X + mu*I
must be positive definite; every solver works through GramCache.

Serialization formats:

* JSON single file: {"lambda": float, "mu": float, "X": [[...]], "y": [...]}
* CSV with header ``y,x1,...,xp`` (one observation per row) plus a JSON
  sidecar at <path>.json holding {"lambda": ..., "mu": ...}.

All floats are written with 17 significant digits, so save/load round-trips
are bit-exact.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from . import numerics
from .numerics import NotPDError

# Smallest eigenvalue of G accepted as positive definite.  Matches the
# conditioning the downstream Cholesky factorizations can tolerate.
PD_TOL = 1e-10


def _frozen_array(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProblemInstance:
    """Immutable problem data (X, y, lam, mu); validated on construction."""

    X: np.ndarray
    y: np.ndarray
    lam: float
    mu: float

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"X must be a nonempty 2-D matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if not np.all(np.isfinite(y)):
            raise ValueError("y contains non-finite entries")
        if y.shape[0] != X.shape[0]:
            raise ValueError(
                f"y has length {y.shape[0]} but X has {X.shape[0]} rows"
            )
        lam = float(self.lam)
        mu = float(self.mu)
        if not np.isfinite(lam) or lam < 0:
            raise ValueError("lam must be a finite nonnegative real")
        if not np.isfinite(mu) or mu < 0:
            raise ValueError("mu must be a finite nonnegative real")
        object.__setattr__(self, "X", _frozen_array(X))
        object.__setattr__(self, "y", _frozen_array(y))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class GramCache:
    """G = X'X + mu*I, c = X'y, y'y, and the smallest eigenvalue of G."""

    G: np.ndarray
    c: np.ndarray
    yty: float
    lambda_min_G: float

    def __post_init__(self):
        object.__setattr__(self, "G", _frozen_array(self.G))
        object.__setattr__(self, "c", _frozen_array(self.c))


@dataclass(frozen=True)
class FitResult:
    """A feasible (L0) solution: coefficients, exact support, objective."""

    b: np.ndarray
    support: tuple
    objective: float
    method: str

    def __post_init__(self):
        object.__setattr__(self, "b", _frozen_array(self.b))
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))


def build_gram(instance):
    """Form GramCache; raises NotPDError when lambda_min(G) <= 1e-10.

    A failure signals the caller should raise mu to stabilize X'X.
    """
    X, y = instance.X, instance.y
    G = X.T @ X + instance.mu * np.eye(instance.p)
    G = 0.5 * (G + G.T)
    c = X.T @ y
    lam_min = numerics.min_eigenvalue(G)
    if lam_min <= PD_TOL:
        raise NotPDError(
            f"X'X + mu*I is not positive definite (lambda_min = {lam_min:.3e}); "
            "increase mu"
        )
    return GramCache(G=G, c=c, yty=float(y @ y), lambda_min_G=lam_min)


def objective_l0(instance, b):
    """0.5*|Xb - y|^2 + 0.5*mu*|b|^2 + lam*|b|_0, with exact-zero support."""
    b = np.asarray(b, dtype=float)
    if b.shape != (instance.p,):
        raise ValueError(f"b must have shape ({instance.p},), got {b.shape}")
    r = instance.X @ b - instance.y
    nnz = int(np.count_nonzero(b))
    return float(0.5 * (r @ r) + 0.5 * instance.mu * (b @ b) + instance.lam * nnz)


def make_fit_result(instance, b, method):
    """Package b into a FitResult with support/objective derived from b."""
    b = np.asarray(b, dtype=float)
    support = tuple(int(i) for i in np.flatnonzero(b))
    return FitResult(
        b=b, support=support, objective=objective_l0(instance, b), method=method
    )


# ---------------------------------------------------------------------------
# Serialization

def _fmt(x):
    """Render a float with 17 significant digits (binary64 round-trip safe)."""
    return format(float(x), ".17g")


def _json_instance_text(instance):
    xrows = ",\n    ".join(
        "[" + ", ".join(_fmt(v) for v in row) + "]" for row in instance.X
    )
    yvals = ", ".join(_fmt(v) for v in instance.y)
    return (
        "{\n"
        f'  "lambda": {_fmt(instance.lam)},\n'
        f'  "mu": {_fmt(instance.mu)},\n'
        f'  "X": [\n    {xrows}\n  ],\n'
        f'  "y": [{yvals}]\n'
        "}\n"
    )


def save_instance(instance, path, format=None):
    """Write an instance as JSON or CSV (+ JSON sidecar <path>.json)."""
    fmt = _infer_format(path, format)
    if fmt == "json":
        with open(path, "w") as fh:
            fh.write(_json_instance_text(instance))
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y"] + [f"x{j + 1}" for j in range(instance.p)])
        for yi, row in zip(instance.y, instance.X):
            writer.writerow([_fmt(yi)] + [_fmt(v) for v in row])
    with open(os.fspath(path) + ".json", "w") as fh:
        fh.write(
            "{\n"
            f'  "lambda": {_fmt(instance.lam)},\n'
            f'  "mu": {_fmt(instance.mu)}\n'
            "}\n"
        )


def _infer_format(path, format):
    if format is not None:
        fmt = format.lower()
        if fmt not in ("csv", "json"):
            raise ValueError(f"unknown instance format {format!r}")
        return fmt
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".csv":
        return "csv"
    if ext == ".json":
        return "json"
    raise ValueError(f"cannot infer format from {path!r}; pass format=")


def load_instance(path, format=None):
    """Read an instance back; validates shape, finiteness, and metadata."""
    fmt = _infer_format(path, format)
    if fmt == "json":
        with open(path) as fh:
            data = json.load(fh)
        for key in ("lambda", "mu", "X", "y"):
            if key not in data:
                raise ValueError(f"instance JSON missing key {key!r}")
        X, y = data["X"], data["y"]
        lengths = {len(row) for row in X}
        if len(lengths) > 1:
            raise ValueError("ragged rows in X")
        return ProblemInstance(X=X, y=y, lam=data["lambda"], mu=data["mu"])
    sidecar = os.fspath(path) + ".json"
    if not os.path.exists(sidecar):
        raise ValueError(
            f"CSV instance {path!r} needs sidecar {sidecar!r} with lambda/mu"
        )
    with open(sidecar) as fh:
        meta = json.load(fh)
    for key in ("lambda", "mu"):
        if key not in meta:
            raise ValueError(f"sidecar missing key {key!r}")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not header or header[0] != "y":
            raise ValueError("CSV instance must start with header y,x1,...,xp")
        width = len(header)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ValueError(f"ragged CSV row at line {line_no}")
            rows.append([float(v) for v in row])
    if not rows:
        raise ValueError("CSV instance has no observations")
    arr = np.asarray(rows, dtype=float)
    return ProblemInstance(
        X=arr[:, 1:], y=arr[:, 0], lam=meta["lambda"], mu=meta["mu"]
    )
