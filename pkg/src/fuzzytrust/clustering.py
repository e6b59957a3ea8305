"""Fuzzy C-means over normalized feature matrices.

Produces a ClusterModel (centers, per-dimension fuzzy spreads,
normalization parameters) that downstream code turns into a Mamdani
rulebase.  Fitting is plain alternating optimization with a seeded
random membership initialization, so a fixed seed gives bit-identical
models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDataError, NonFiniteDataError, TooFewPointsError

SPREAD_FLOOR = 0.01  # keeps generated Gaussian input sets non-degenerate


@dataclass(frozen=True)
class ClusterConfig:
    c: int = 25
    m: float = 2.0
    tol: float = 1e-6
    max_iter: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.c < 1:
            raise ValueError(f"cluster count must be >= 1, got {self.c}")
        if not (self.m > 1.0):
            raise ValueError(f"fuzzifier must be > 1, got {self.m}")
        if not (self.tol > 0.0):
            raise ValueError(f"tolerance must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")

    def to_dict(self) -> dict:
        return {"c": self.c, "m": self.m, "tol": self.tol, "max_iter": self.max_iter, "seed": self.seed}


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Fitted cluster geometry in normalized [0, 1] feature space."""

    centers: np.ndarray  # c x d
    spreads: np.ndarray  # c x d, floored at SPREAD_FLOOR
    norm_params: tuple[tuple[float, float], ...]  # per-dimension (min, max)
    m: float
    objective_trace: tuple[float, ...]
    config: ClusterConfig

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        spreads = np.asarray(self.spreads, dtype=float)
        centers.setflags(write=False)
        spreads.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "spreads", spreads)
        object.__setattr__(self, "norm_params", tuple((float(a), float(b)) for a, b in self.norm_params))
        object.__setattr__(self, "objective_trace", tuple(float(v) for v in self.objective_trace))

    @property
    def c(self) -> int:
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]

    def to_dict(self) -> dict:
        return {
            "format": "cluster-model",
            "version": 1,
            "centers": self.centers.tolist(),
            "spreads": self.spreads.tolist(),
            "norm_params": [list(p) for p in self.norm_params],
            "m": self.m,
            "objective_trace": list(self.objective_trace),
            "config": self.config.to_dict(),
        }

    @classmethod
    def from_dict(cls, data) -> "ClusterModel":
        if data.get("format") != "cluster-model":
            raise ValueError("not a cluster model document")
        return cls(
            centers=np.array(data["centers"], dtype=float),
            spreads=np.array(data["spreads"], dtype=float),
            norm_params=tuple(tuple(p) for p in data["norm_params"]),
            m=float(data["m"]),
            objective_trace=tuple(data["objective_trace"]),
            config=ClusterConfig(**data["config"]),
        )


def save_model(model: ClusterModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2)
        fh.write("\n")


def load_model(path) -> ClusterModel:
    with open(path, "r", encoding="utf-8") as fh:
        return ClusterModel.from_dict(json.load(fh))


def normalize(data: np.ndarray) -> tuple[np.ndarray, tuple[tuple[float, float], ...]]:
    """Min-max scale each column into [0, 1].

    Constant columns map to 0.5 uniformly; their recorded (min, max)
    still allows apply_normalization to reproduce that choice.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise EmptyDataError("normalize requires a non-empty 2-D matrix")
    if not np.all(np.isfinite(data)):
        raise NonFiniteDataError("normalize requires finite values")
    mins = data.min(axis=0)
    maxs = data.max(axis=0)
    params = tuple((float(mn), float(mx)) for mn, mx in zip(mins, maxs))
    return apply_normalization(data, params), params


def apply_normalization(data: np.ndarray, norm_params) -> np.ndarray:
    """Scale columns with stored (min, max), clamping into [0, 1]."""
    data = np.asarray(data, dtype=float)
    out = np.empty_like(data)
    for j, (mn, mx) in enumerate(norm_params):
        col = data[..., j]
        if mx > mn:
            out[..., j] = np.clip((col - mn) / (mx - mn), 0.0, 1.0)
        else:
            out[..., j] = 0.5
    return out


def _membership_from_sq_distances(d2: np.ndarray, m: float) -> np.ndarray:
    """Standard FCM membership update from squared distances (n x c).

    A point at distance zero from some center gets full membership in
    the nearest coincident center (lowest index on ties).
    """
    n, c = d2.shape
    exponent = 1.0 / (m - 1.0)
    with np.errstate(divide="ignore"):
        inv = d2 ** -exponent
    U = np.empty_like(d2)
    singular = (d2 == 0.0).any(axis=1)
    regular = ~singular
    U[regular] = inv[regular] / inv[regular].sum(axis=1, keepdims=True)
    if singular.any():
        U[singular] = 0.0
        hit_rows = np.where(singular)[0]
        hit_cols = np.argmax(d2[singular] == 0.0, axis=1)
        U[hit_rows, hit_cols] = 1.0
    return U


def fcm_fit(
    data: np.ndarray,
    cfg: ClusterConfig,
    norm_params: tuple[tuple[float, float], ...] | None = None,
) -> ClusterModel:
    """Alternate membership/center updates until the objective decrease
    drops below ``cfg.tol`` or ``cfg.max_iter`` is reached.

    ``data`` is expected in normalized [0, 1] coordinates; pass the
    ``norm_params`` that produced it so the model can renormalize new
    points later (identity per dimension when omitted).
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDataError("fcm_fit requires a non-empty 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise NonFiniteDataError("fcm_fit requires finite values")
    n, d = X.shape
    if n < cfg.c:
        raise TooFewPointsError(f"need at least {cfg.c} points for {cfg.c} clusters, got {n}")
    if norm_params is None:
        norm_params = tuple((0.0, 1.0) for _ in range(d))

    rng = np.random.default_rng(cfg.seed)
    U = rng.random((n, cfg.c))
    U /= U.sum(axis=1, keepdims=True)

    centers = np.zeros((cfg.c, d))
    trace: list[float] = []
    for _ in range(cfg.max_iter):
        Um = U ** cfg.m
        weight = Um.sum(axis=0)
        new_centers = (Um.T @ X) / np.where(weight > 0.0, weight, 1.0)[:, None]
        centers = np.where(weight[:, None] > 0.0, new_centers, centers)
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        U = _membership_from_sq_distances(d2, cfg.m)
        objective = float(((U ** cfg.m) * d2).sum())
        trace.append(objective)
        if len(trace) > 1 and abs(trace[-2] - trace[-1]) < cfg.tol:
            break

    Um = U ** cfg.m
    weight = Um.sum(axis=0)
    diffs = X[:, None, :] - centers[None, :, :]
    variance = (Um[:, :, None] * diffs ** 2).sum(axis=0) / np.where(weight > 0.0, weight, 1.0)[:, None]
    spreads = np.maximum(np.sqrt(variance), SPREAD_FLOOR)

    return ClusterModel(
        centers=centers,
        spreads=spreads,
        norm_params=norm_params,
        m=cfg.m,
        objective_trace=tuple(trace),
        config=cfg,
    )


def membership_row(model: ClusterModel, x: np.ndarray) -> np.ndarray:
    """Cluster memberships of one normalized point; entries sum to 1."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise ValueError(f"expected a {model.d}-vector, got shape {x.shape}")
    d2 = ((model.centers - x[None, :]) ** 2).sum(axis=1)[None, :]
    return _membership_from_sq_distances(d2, model.m)[0]
