"""Target transformation from ground-truth points to learnable target maps.

Two variants: the careless transformation marks single pixels, the
careful one renders a truncated Gaussian proximity map whose shape is
set by (sigma, radius). Nearby points combine by per-pixel max, so every
annotated centre stays a height-1 peak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import PointSet, as_unit_grid
from .errors import ConfigError, VariantMismatchError


class DecoderVariant(str, Enum):
    CARELESS = "careless"
    CAREFUL = "careful"


@dataclass(frozen=True)
class DecoderParams:
    """Target-transformation parameters; careless carries none."""

    variant: DecoderVariant
    sigma: float | None = None
    radius: float | None = None

    def __post_init__(self) -> None:
        if self.variant is DecoderVariant.CARELESS:
            if self.sigma is not None or self.radius is not None:
                raise ConfigError("careless decoder carries no sigma/radius")
        else:
            if self.sigma is None or self.radius is None:
                raise ConfigError("careful decoder requires sigma and radius")
            if self.sigma <= 0.0 or self.radius <= 0.0:
                raise ConfigError("sigma and radius must be positive")
            if self.radius < self.sigma:
                raise ConfigError("careful decoder requires radius >= sigma")

    @classmethod
    def careless(cls) -> "DecoderParams":
        return cls(variant=DecoderVariant.CARELESS)

    @classmethod
    def careful(cls, sigma: float, radius: float) -> "DecoderParams":
        return cls(variant=DecoderVariant.CAREFUL, sigma=float(sigma), radius=float(radius))

    def to_json_dict(self) -> dict:
        if self.variant is DecoderVariant.CARELESS:
            return {"variant": "careless"}
        return {"variant": "careful", "sigma": self.sigma, "radius": self.radius}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DecoderParams":
        variant = obj.get("variant")
        if variant == "careless":
            return cls.careless()
        if variant == "careful":
            return cls.careful(float(obj["sigma"]), float(obj["radius"]))
        raise ConfigError(f"unknown decoder variant {variant!r}")


@dataclass(frozen=True, eq=False)
class TargetMap:
    """W×H grid of learnable target values in [0, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", as_unit_grid(self.values))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class DecoderSpace:
    """Ordered, duplicate-free candidate list for the decoder search."""

    candidates: tuple[DecoderParams, ...]

    def __post_init__(self) -> None:
        cands = tuple(self.candidates)
        if not cands:
            raise ConfigError("decoder space must be non-empty")
        if len(set(cands)) != len(cands):
            raise ConfigError("decoder space candidates must be pairwise distinct")
        object.__setattr__(self, "candidates", cands)

    def __len__(self) -> int:
        return len(self.candidates)


# Instrumentation: counts every careless/careful decode. Lets callers prove
# a code path (e.g. testing) never touches ground-truth transformation.
_decode_calls = 0


def decode_call_count() -> int:
    return _decode_calls


def reset_decode_call_count() -> None:
    global _decode_calls
    _decode_calls = 0


def _count_call() -> None:
    global _decode_calls
    _decode_calls += 1


def _check_bounds(truth: PointSet, width: int, height: int) -> None:
    if not truth.in_bounds(width, height):
        raise ValueError("truth points must lie within the target shape")


def decode_careless(truth: PointSet, shape: tuple[int, int]) -> TargetMap:
    """Value 1 at each point's nearest pixel (round half up), 0 elsewhere."""
    _count_call()
    width, height = shape
    _check_bounds(truth, width, height)
    values = np.zeros((height, width), dtype=np.float64)
    for x, y in truth.points:
        px = min(int(math.floor(x + 0.5)), width - 1)
        py = min(int(math.floor(y + 0.5)), height - 1)
        values[py, px] = 1.0
    return TargetMap(values)


def decode_careful(truth: PointSet, shape: tuple[int, int], params: DecoderParams) -> TargetMap:
    """Truncated-Gaussian proximity map.

    Pixel p gets max over points q of exp(-|p-q|^2 / (2 sigma^2)), with a
    point contributing nothing beyond `radius` of it.
    """
    _count_call()
    if params.variant is not DecoderVariant.CAREFUL:
        raise VariantMismatchError("decode_careful requires careful params")
    width, height = shape
    _check_bounds(truth, width, height)
    sigma = float(params.sigma)
    radius = float(params.radius)
    values = np.zeros((height, width), dtype=np.float64)
    for qx, qy in truth.points:
        x_lo = max(0, int(math.ceil(qx - radius)))
        x_hi = min(width - 1, int(math.floor(qx + radius)))
        y_lo = max(0, int(math.ceil(qy - radius)))
        y_hi = min(height - 1, int(math.floor(qy + radius)))
        if x_lo > x_hi or y_lo > y_hi:
            continue
        xs = np.arange(x_lo, x_hi + 1, dtype=np.float64)
        ys = np.arange(y_lo, y_hi + 1, dtype=np.float64)
        d2 = (xs[None, :] - qx) ** 2 + (ys[:, None] - qy) ** 2
        contrib = np.exp(-d2 / (2.0 * sigma**2))
        contrib[d2 > radius**2] = 0.0
        window = values[y_lo : y_hi + 1, x_lo : x_hi + 1]
        np.maximum(window, contrib, out=window)
    return TargetMap(values)


def decode(truth: PointSet, shape: tuple[int, int], params: DecoderParams) -> TargetMap:
    """Dispatch on the parameter variant."""
    if params.variant is DecoderVariant.CARELESS:
        return decode_careless(truth, shape)
    return decode_careful(truth, shape, params)


def decoder_grid(
    sigmas: list[float], radius_multiplier: float, include_careless: bool = False
) -> DecoderSpace:
    """Careful candidates (sigma, radius_multiplier*sigma) in input order,
    optionally preceded by the careless candidate."""
    if not sigmas:
        raise ConfigError("decoder grid requires at least one sigma")
    if any(s <= 0.0 for s in sigmas):
        raise ConfigError("decoder grid sigmas must be positive")
    if radius_multiplier < 1.0:
        raise ConfigError("radius_multiplier must be >= 1")
    candidates: list[DecoderParams] = []
    if include_careless:
        candidates.append(DecoderParams.careless())
    candidates.extend(DecoderParams.careful(s, radius_multiplier * s) for s in sigmas)
    return DecoderSpace(tuple(candidates))
