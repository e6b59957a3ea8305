"""Generic Mamdani fuzzy inference.

Membership functions, linguistic variables, conjunctive rulebases,
min/max inference and centroid defuzzification over a uniform output
grid.  Systems are immutable after construction and safe to share
across threads; repeated inference reuses a cached output-set grid.

Operator choices: AND = min, implication = min (clip), aggregation =
pointwise max, defuzzification = centroid sampled on ``defuzz_resolution``
points.  All of them are the conventional Mamdani defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterator, Mapping, Union

import numpy as np

from .errors import DegenerateOutputError, MissingInputError

# exp(-z) underflows to exactly 0.0 near z ~ 745; clamping keeps far-field
# Gaussian degrees positive so fully off-manifold inputs still fire weakly
# instead of producing a spurious zero-area aggregate.
_EXP_CLAMP = 700.0


def _eval_result(out: np.ndarray) -> float | np.ndarray:
    return float(out) if out.ndim == 0 else out


def _gauss(x: np.ndarray, center: float, sigma: float) -> np.ndarray:
    z = (x - center) ** 2 / (2.0 * sigma * sigma)
    return np.exp(-np.minimum(z, _EXP_CLAMP))


@dataclass(frozen=True)
class Gaussian:
    """Classic bell curve: degree 1 at ``center``, spread ``sigma``."""

    center: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0):
            raise ValueError(f"gaussian sigma must be > 0, got {self.sigma}")

    def __call__(self, x) -> float | np.ndarray:
        x = np.asarray(x, dtype=float)
        return _eval_result(_gauss(x, self.center, self.sigma))

    def prototype(self) -> float:
        return self.center

    def to_dict(self) -> dict:
        return {"shape": "gaussian", "center": self.center, "sigma": self.sigma}


@dataclass(frozen=True)
class TwoSidedGaussian:
    """Plateau of degree 1 between the two centers, Gaussian lobes outside."""

    left_center: float
    left_sigma: float
    right_center: float
    right_sigma: float

    def __post_init__(self):
        if not (self.left_sigma > 0.0 and self.right_sigma > 0.0):
            raise ValueError("two-sided gaussian lobes need sigma > 0")
        if self.left_center > self.right_center:
            raise ValueError("left_center must not exceed right_center")

    def __call__(self, x) -> float | np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        lo = x < self.left_center
        hi = x > self.right_center
        out = np.where(lo, _gauss(x, self.left_center, self.left_sigma), out)
        out = np.where(hi, _gauss(x, self.right_center, self.right_sigma), out)
        return _eval_result(out)

    def prototype(self) -> float:
        return 0.5 * (self.left_center + self.right_center)

    def to_dict(self) -> dict:
        return {
            "shape": "two_sided_gaussian",
            "left_center": self.left_center,
            "left_sigma": self.left_sigma,
            "right_center": self.right_center,
            "right_sigma": self.right_sigma,
        }


@dataclass(frozen=True)
class Triangular:
    """Linear rise to 1 at ``apex``, linear fall; zero outside [left, right].

    ``left == apex`` or ``apex == right`` gives a half-triangle whose
    vertical edge sits on the apex.
    """

    left: float
    apex: float
    right: float

    def __post_init__(self):
        if not (self.left <= self.apex <= self.right):
            raise ValueError("triangular needs left <= apex <= right")
        if self.left == self.right:
            raise ValueError("triangular support must have positive width")

    def __call__(self, x) -> float | np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.apex > self.left:
            rise = (x - self.left) / (self.apex - self.left)
        else:
            rise = np.where(x >= self.apex, 1.0, 0.0)
        if self.right > self.apex:
            fall = (self.right - x) / (self.right - self.apex)
        else:
            fall = np.where(x <= self.apex, 1.0, 0.0)
        out = np.clip(np.minimum(rise, fall), 0.0, 1.0)
        return _eval_result(out)

    def prototype(self) -> float:
        return self.apex

    def to_dict(self) -> dict:
        return {"shape": "triangular", "left": self.left, "apex": self.apex, "right": self.right}


@dataclass(frozen=True)
class ShoulderLeft:
    """Degree 1 up to ``flat_until``, linear fall to 0 at ``falls_to``."""

    flat_until: float
    falls_to: float

    def __post_init__(self):
        if not (self.flat_until < self.falls_to):
            raise ValueError("shoulder_left needs flat_until < falls_to")

    def __call__(self, x) -> float | np.ndarray:
        x = np.asarray(x, dtype=float)
        fall = (self.falls_to - x) / (self.falls_to - self.flat_until)
        return _eval_result(np.clip(fall, 0.0, 1.0))

    def prototype(self) -> float:
        return self.flat_until

    def to_dict(self) -> dict:
        return {"shape": "shoulder_left", "flat_until": self.flat_until, "falls_to": self.falls_to}


@dataclass(frozen=True)
class ShoulderRight:
    """Degree 0 up to ``rises_from``, linear rise to 1 at ``flat_after``."""

    rises_from: float
    flat_after: float

    def __post_init__(self):
        if not (self.rises_from < self.flat_after):
            raise ValueError("shoulder_right needs rises_from < flat_after")

    def __call__(self, x) -> float | np.ndarray:
        x = np.asarray(x, dtype=float)
        rise = (x - self.rises_from) / (self.flat_after - self.rises_from)
        return _eval_result(np.clip(rise, 0.0, 1.0))

    def prototype(self) -> float:
        return self.flat_after

    def to_dict(self) -> dict:
        return {"shape": "shoulder_right", "rises_from": self.rises_from, "flat_after": self.flat_after}


MembershipFunction = Union[Gaussian, TwoSidedGaussian, Triangular, ShoulderLeft, ShoulderRight]

_MF_SHAPES = {
    "gaussian": Gaussian,
    "two_sided_gaussian": TwoSidedGaussian,
    "triangular": Triangular,
    "shoulder_left": ShoulderLeft,
    "shoulder_right": ShoulderRight,
}


def membership_degree(mf: MembershipFunction, x: float) -> float:
    """Degree of ``x`` in ``mf``; total over all finite ``x``."""
    if not math.isfinite(x):
        raise ValueError(f"membership degree requires finite x, got {x}")
    return float(mf(float(x)))


def mf_from_dict(data: Mapping) -> MembershipFunction:
    params = dict(data)
    shape = params.pop("shape", None)
    cls = _MF_SHAPES.get(shape)
    if cls is None:
        raise ValueError(f"unknown membership shape {shape!r}")
    return cls(**params)


@dataclass(frozen=True)
class LinguisticVariable:
    """A named real variable with an ordered list of labelled fuzzy sets."""

    name: str
    domain: tuple[float, float]
    sets: tuple[tuple[str, MembershipFunction], ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))
        object.__setattr__(self, "sets", tuple((label, mf) for label, mf in self.sets))
        lo, hi = self.domain
        if not (lo < hi):
            raise ValueError(f"variable {self.name!r}: domain must satisfy lo < hi")
        if not self.sets:
            raise ValueError(f"variable {self.name!r}: needs at least one set")
        labels = [label for label, _ in self.sets]
        if len(set(labels)) != len(labels):
            raise ValueError(f"variable {self.name!r}: duplicate set labels")
        for label, mf in self.sets:
            if not self._support_intersects(mf, lo, hi):
                raise ValueError(f"variable {self.name!r}: set {label!r} has no support in the domain")

    @staticmethod
    def _support_intersects(mf: MembershipFunction, lo: float, hi: float) -> bool:
        if isinstance(mf, (Gaussian, TwoSidedGaussian)):
            return True  # Gaussians are positive everywhere
        if isinstance(mf, Triangular):
            return mf.left < hi and mf.right > lo
        if isinstance(mf, ShoulderLeft):
            return lo < mf.falls_to
        return hi > mf.rises_from

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.sets)

    def mf(self, label: str) -> MembershipFunction:
        for set_label, mf in self.sets:
            if set_label == label:
                return mf
        raise KeyError(f"variable {self.name!r} has no set {label!r}")

    def clamp(self, x: float) -> float:
        if not math.isfinite(x):
            raise ValueError(f"variable {self.name!r}: non-finite input {x}")
        lo, hi = self.domain
        return min(max(float(x), lo), hi)

    def fuzzify(self, x: float) -> dict[str, float]:
        """Degrees of the clamped input in every set."""
        x = self.clamp(x)
        return {label: float(mf(x)) for label, mf in self.sets}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "domain": list(self.domain),
            "sets": [{"label": label, "mf": mf.to_dict()} for label, mf in self.sets],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LinguisticVariable":
        return cls(
            name=data["name"],
            domain=tuple(data["domain"]),
            sets=tuple((s["label"], mf_from_dict(s["mf"])) for s in data["sets"]),
        )


@dataclass(frozen=True)
class FuzzyRule:
    """IF every antecedent (variable, label) holds THEN the consequent set."""

    antecedents: tuple[tuple[str, str], ...]
    consequent: tuple[str, str]

    def __post_init__(self):
        object.__setattr__(self, "antecedents", tuple((v, s) for v, s in self.antecedents))
        object.__setattr__(self, "consequent", (self.consequent[0], self.consequent[1]))
        if not self.antecedents:
            raise ValueError("rule needs at least one antecedent")

    def to_dict(self) -> dict:
        return {"if": [list(a) for a in self.antecedents], "then": list(self.consequent)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "FuzzyRule":
        return cls(
            antecedents=tuple((v, s) for v, s in data["if"]),
            consequent=tuple(data["then"]),
        )


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Inference sampled on a 2-D input lattice; ``z`` is NaN where the
    aggregate was degenerate."""

    x_name: str
    y_name: str
    xs: np.ndarray
    ys: np.ndarray
    z: np.ndarray

    def rows(self) -> Iterator[tuple[float, float, float]]:
        """Row-major (x outer, y inner) cell iterator."""
        for i, x in enumerate(self.xs):
            for j, y in enumerate(self.ys):
                yield float(x), float(y), float(self.z[i, j])

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,y,z\n")
            for x, y, z in self.rows():
                z_text = "NaN" if math.isnan(z) else repr(z)
                fh.write(f"{x!r},{y!r},{z_text}\n")


@dataclass(frozen=True)
class FuzzyInferenceSystem:
    """Immutable Mamdani system: input variables, one output variable and
    a conjunctive rulebase."""

    inputs: tuple[LinguisticVariable, ...]
    output: LinguisticVariable
    rules: tuple[FuzzyRule, ...]
    defuzz_resolution: int = 1001

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.inputs:
            raise ValueError("system needs at least one input variable")
        if not self.rules:
            raise ValueError("system needs at least one rule")
        if self.defuzz_resolution < 2:
            raise ValueError("defuzz_resolution must be >= 2")
        names = [v.name for v in self.inputs]
        if len(set(names)) != len(names):
            raise ValueError("duplicate input variable names")
        if self.output.name in names:
            raise ValueError("output variable name collides with an input")
        by_name = {v.name: v for v in self.inputs}
        for rule in self.rules:
            for var, label in rule.antecedents:
                if var not in by_name:
                    raise ValueError(f"rule references unknown variable {var!r}")
                by_name[var].mf(label)  # raises KeyError on unknown label
            out_var, out_label = rule.consequent
            if out_var != self.output.name:
                raise ValueError(f"rule consequent variable {out_var!r} is not the output")
            self.output.mf(out_label)

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.inputs)

    @cached_property
    def _output_xs(self) -> np.ndarray:
        lo, hi = self.output.domain
        xs = np.linspace(lo, hi, self.defuzz_resolution)
        xs.setflags(write=False)
        return xs

    @cached_property
    def _output_set_grid(self) -> dict[str, np.ndarray]:
        grid = {}
        for label, mf in self.output.sets:
            vals = np.asarray(mf(self._output_xs), dtype=float)
            vals.setflags(write=False)
            grid[label] = vals
        return grid

    def _rule_strengths(self, inputs: Mapping[str, float]) -> dict[str, float]:
        """Max firing strength per output label (min-AND over antecedents)."""
        declared = set(self.input_names)
        given = set(inputs)
        missing = sorted(declared - given)
        if missing:
            raise MissingInputError(f"missing input values for: {', '.join(missing)}")
        unknown = sorted(given - declared)
        if unknown:
            raise ValueError(f"unknown input variables: {', '.join(unknown)}")
        degrees = {v.name: v.fuzzify(inputs[v.name]) for v in self.inputs}
        best: dict[str, float] = {}
        for rule in self.rules:
            strength = min(degrees[var][label] for var, label in rule.antecedents)
            label = rule.consequent[1]
            if strength > best.get(label, 0.0):
                best[label] = strength
        return best

    def aggregate(self, inputs: Mapping[str, float]) -> np.ndarray:
        """Pointwise-max of consequent sets clipped at their firing strengths."""
        best = self._rule_strengths(inputs)
        grid = self._output_set_grid
        agg = np.zeros(self.defuzz_resolution)
        for label, _ in self.output.sets:  # fixed order: rule permutation invariant
            strength = best.get(label, 0.0)
            if strength > 0.0:
                np.maximum(agg, np.minimum(strength, grid[label]), out=agg)
        return agg

    def infer(self, inputs: Mapping[str, float]) -> float:
        """Crisp output: centroid of the aggregated fuzzy output."""
        agg = self.aggregate(inputs)
        area = float(agg.sum())
        if area == 0.0:
            raise DegenerateOutputError("no rule fired: aggregated output has zero area")
        return float(np.dot(self._output_xs, agg) / area)

    def dominant_label(self, inputs: Mapping[str, float]) -> str:
        """Output set with the highest degree at the crisp value.

        Ties resolve to the earlier set in declaration order.
        """
        crisp = self.infer(inputs)
        degrees = np.array([float(mf(crisp)) for _, mf in self.output.sets])
        return self.output.sets[int(np.argmax(degrees))][0]

    def surface(
        self,
        var_x: str,
        var_y: str,
        fixed: Mapping[str, float] | None = None,
        resolution: int = 25,
    ) -> SurfaceGrid:
        """Evaluate the system over a resolution x resolution lattice of the
        two variables' domains, the remaining inputs pinned by ``fixed``."""
        if resolution < 2:
            raise ValueError("surface resolution must be >= 2")
        if var_x == var_y:
            raise ValueError("surface axes must be two distinct variables")
        by_name = {v.name: v for v in self.inputs}
        for name in (var_x, var_y):
            if name not in by_name:
                raise ValueError(f"unknown input variable {name!r}")
        fixed = dict(fixed or {})
        overlap = sorted(set(fixed) & {var_x, var_y})
        if overlap:
            raise ValueError(f"fixed values collide with surface axes: {', '.join(overlap)}")
        xs = np.linspace(*by_name[var_x].domain, resolution)
        ys = np.linspace(*by_name[var_y].domain, resolution)
        z = np.empty((resolution, resolution))
        point = dict(fixed)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                point[var_x] = float(x)
                point[var_y] = float(y)
                try:
                    z[i, j] = self.infer(point)
                except DegenerateOutputError:
                    z[i, j] = math.nan
        return SurfaceGrid(var_x, var_y, xs, ys, z)

    def with_resolution(self, resolution: int) -> "FuzzyInferenceSystem":
        return replace(self, defuzz_resolution=resolution)

    def to_dict(self) -> dict:
        return {
            "format": "fis",
            "version": 1,
            "defuzz_resolution": self.defuzz_resolution,
            "inputs": [v.to_dict() for v in self.inputs],
            "output": self.output.to_dict(),
            "rules": [r.to_dict() for r in self.rules],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FuzzyInferenceSystem":
        if data.get("format") != "fis":
            raise ValueError("not a fuzzy inference system document")
        return cls(
            inputs=tuple(LinguisticVariable.from_dict(v) for v in data["inputs"]),
            output=LinguisticVariable.from_dict(data["output"]),
            rules=tuple(FuzzyRule.from_dict(r) for r in data["rules"]),
            defuzz_resolution=int(data.get("defuzz_resolution", 1001)),
        )


def save_fis(fis: FuzzyInferenceSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(fis.to_dict(), fh, indent=2)
        fh.write("\n")


def load_fis(path) -> FuzzyInferenceSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return FuzzyInferenceSystem.from_dict(json.load(fh))
