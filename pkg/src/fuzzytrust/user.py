"""User-side trust: request-rate bookkeeping, the weighted baseline
formula, and the cluster-derived Mamdani model.

The baseline model scores a user as 1 minus a weighted sum of their
unauthorized/bogus/bad request rates.  The fuzzy model clusters users
jointly over (bad, bogus, unauthorized, total, trust) and emits one
rule per cluster: inputs near cluster i imply trust near cluster i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .clustering import ClusterConfig, ClusterModel, apply_normalization, fcm_fit, normalize
from .errors import InvalidModelError, ZeroTotalRequestsError
from .fuzzy import FuzzyInferenceSystem, FuzzyRule, Gaussian, LinguisticVariable, Triangular

DEFAULT_THRESHOLD = 0.5
TRUST_OUTPUT_MIN_HALFWIDTH = 0.05

# Column layout of the joint feature matrix and the corpus CSV.
FEATURE_COLUMNS = ("bad", "bogus", "unauthorized", "total")
TRUST_COLUMN = 4

# Input variables in rulebase declaration order, with their matrix column.
USER_FIS_INPUTS = (
    ("bad_requests", 0),
    ("unauthorized_requests", 2),
    ("bogus_requests", 1),
    ("total_requests", 3),
)


@dataclass(frozen=True)
class UserBehaviorCounters:
    """Per-user HTTP status counts over one observation window.

    bad = status 400, unauthorized = 401 or 403, bogus = 404.
    """

    user_id: str
    uar: int  # unauthorized requests
    bor: int  # bogus requests
    bar: int  # bad requests
    tr: int  # total requests
    window: tuple[str, str] | None = None

    def __post_init__(self):
        for name in ("uar", "bor", "bar", "tr"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.tr < self.uar + self.bor + self.bar:
            raise ValueError(
                f"user {self.user_id!r}: total {self.tr} is less than "
                f"categorized requests {self.uar + self.bor + self.bar}"
            )

    def feature_vector(self) -> np.ndarray:
        """Counts in matrix column order (bad, bogus, unauthorized, total)."""
        return np.array([self.bar, self.bor, self.uar, self.tr], dtype=float)


@dataclass(frozen=True)
class RequestRates:
    uarr: float
    borr: float
    barr: float

    def __post_init__(self):
        for name in ("uarr", "borr", "barr"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class TrustWeights:
    """Relative severity of unauthorized (w1), bogus (w2) and bad (w3)
    requests; must be non-negative and sum to 1."""

    w1: float = 0.5
    w2: float = 0.2
    w3: float = 0.3

    def __post_init__(self):
        if min(self.w1, self.w2, self.w3) < 0.0:
            raise ValueError("weights must be non-negative")
        if abs(self.w1 + self.w2 + self.w3 - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {self.w1 + self.w2 + self.w3}")


DEFAULT_WEIGHTS = TrustWeights()


def request_rates(counters: UserBehaviorCounters) -> RequestRates:
    """Per-category request rates; undefined (error) when TR is zero."""
    if counters.tr == 0:
        raise ZeroTotalRequestsError(f"user {counters.user_id!r} has no requests in the window")
    return RequestRates(
        uarr=counters.uar / counters.tr,
        borr=counters.bor / counters.tr,
        barr=counters.bar / counters.tr,
    )


def baseline_trust(rates: RequestRates, weights: TrustWeights = DEFAULT_WEIGHTS) -> float:
    """Weighted-rate trust: 1 - (w1*UARR + w2*BORR + w3*BARR)."""
    negative = weights.w1 * rates.uarr + weights.w2 * rates.borr + weights.w3 * rates.barr
    return 1.0 - negative


def classify(trust: float, threshold: float = DEFAULT_THRESHOLD) -> str:
    """"trusted" iff trust strictly exceeds the threshold."""
    if not (0.0 <= trust <= 1.0 and 0.0 <= threshold <= 1.0):
        raise ValueError("trust and threshold must lie in [0, 1]")
    return "trusted" if trust > threshold else "untrusted"


def fit_user_clusters(matrix: np.ndarray, cfg: ClusterConfig | None = None) -> ClusterModel:
    """Cluster the joint 5-column matrix (bad, bogus, unauthorized,
    total, trust).

    Count columns are min-max normalized from the data; the trust
    column keeps its natural [0, 1] scale so cluster trust coordinates
    (and the rulebase built from them) stay in raw trust units.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] != 5:
        raise InvalidModelError(f"expected an n x 5 matrix, got shape {matrix.shape}")
    cfg = cfg or ClusterConfig()
    _, feature_params = normalize(matrix[:, :4])
    norm_params = feature_params + ((0.0, 1.0),)
    normalized = apply_normalization(matrix, norm_params)
    return fcm_fit(normalized, cfg, norm_params)


def build_user_fis(model: ClusterModel, defuzz_resolution: int = 1001) -> FuzzyInferenceSystem:
    """One Gaussian input set and one triangular trust set per cluster,
    and the diagonal rulebase "all inputs in cluster i -> trust in
    cluster i"."""
    if model.d != 5:
        raise InvalidModelError(f"user model needs 5 joint dimensions, got {model.d}")
    labels = tuple(f"cluster_{i + 1}" for i in range(model.c))

    inputs = []
    for var_name, col in USER_FIS_INPUTS:
        sets = tuple(
            (labels[i], Gaussian(float(model.centers[i, col]), float(model.spreads[i, col])))
            for i in range(model.c)
        )
        inputs.append(LinguisticVariable(var_name, (0.0, 1.0), sets))

    trust_sets = []
    for i in range(model.c):
        apex = float(model.centers[i, TRUST_COLUMN])
        halfwidth = max(float(model.spreads[i, TRUST_COLUMN]), TRUST_OUTPUT_MIN_HALFWIDTH)
        trust_sets.append(
            (labels[i], Triangular(max(0.0, apex - halfwidth), apex, min(1.0, apex + halfwidth)))
        )
    output = LinguisticVariable("trust", (0.0, 1.0), tuple(trust_sets))

    rules = tuple(
        FuzzyRule(
            tuple((var_name, labels[i]) for var_name, _ in USER_FIS_INPUTS),
            ("trust", labels[i]),
        )
        for i in range(model.c)
    )
    return FuzzyInferenceSystem(
        inputs=tuple(inputs), output=output, rules=rules, defuzz_resolution=defuzz_resolution
    )


def evaluate_user_trust(
    fis: FuzzyInferenceSystem,
    counters: UserBehaviorCounters,
    norm_params,
) -> float:
    """Normalize the four count features with the training parameters
    (clamped into [0, 1]) and run the fuzzy model."""
    if counters.tr == 0:
        raise ZeroTotalRequestsError(f"user {counters.user_id!r} has no requests in the window")
    features = apply_normalization(counters.feature_vector()[None, :], norm_params[:4])[0]
    inputs = {var_name: float(features[col]) for var_name, col in USER_FIS_INPUTS}
    return fis.infer(inputs)


@dataclass(frozen=True)
class UserTrustModel:
    """Deployable bundle: the fitted rulebase plus the normalization
    parameters needed to feed it raw counters."""

    fis: FuzzyInferenceSystem
    norm_params: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "norm_params", tuple((float(a), float(b)) for a, b in self.norm_params))
        if len(self.norm_params) < 4:
            raise InvalidModelError("user trust model needs normalization parameters for 4 features")

    def evaluate(self, counters: UserBehaviorCounters) -> float:
        return evaluate_user_trust(self.fis, counters, self.norm_params)

    @classmethod
    def from_cluster_model(cls, model: ClusterModel) -> "UserTrustModel":
        return cls(fis=build_user_fis(model), norm_params=model.norm_params)

    def to_dict(self) -> dict:
        return {
            "format": "user-trust-model",
            "version": 1,
            "fis": self.fis.to_dict(),
            "norm_params": [list(p) for p in self.norm_params],
        }

    @classmethod
    def from_dict(cls, data) -> "UserTrustModel":
        if data.get("format") != "user-trust-model":
            raise ValueError("not a user trust model document")
        return cls(
            fis=FuzzyInferenceSystem.from_dict(data["fis"]),
            norm_params=tuple(tuple(p) for p in data["norm_params"]),
        )


def save_user_model(model: UserTrustModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2)
        fh.write("\n")


def load_user_model(path) -> UserTrustModel:
    with open(path, "r", encoding="utf-8") as fh:
        return UserTrustModel.from_dict(json.load(fh))
