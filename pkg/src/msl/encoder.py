"""Re-transformation of predicted target maps into predicted point labels.

Encoding is thresholded peak extraction with greedy minimum-separation
suppression; its (threshold, min_separation) parameters are fitted by
exhaustive search over a grid against the detection loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import PointSet
from .decoder import TargetMap
from .errors import ConfigError, ShapeError
from .metrics import detection_loss

# Final predicted labels; encode() keeps every point within map bounds.
PredictedLabels = PointSet


@dataclass(frozen=True)
class EncoderParams:
    threshold: float
    min_separation: float

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("threshold must lie strictly inside (0, 1)")
        if self.min_separation < 1.0:
            raise ConfigError("min_separation must be >= 1")

    def to_json_dict(self) -> dict:
        return {"threshold": self.threshold, "min_separation": self.min_separation}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "EncoderParams":
        return cls(threshold=float(obj["threshold"]), min_separation=float(obj["min_separation"]))


@dataclass(frozen=True)
class EncoderSpace:
    """Ordered, duplicate-free candidate list for the encoder fit."""

    candidates: tuple[EncoderParams, ...]

    def __post_init__(self) -> None:
        cands = tuple(self.candidates)
        if not cands:
            raise ConfigError("encoder space must be non-empty")
        if len(set(cands)) != len(cands):
            raise ConfigError("encoder space candidates must be pairwise distinct")
        object.__setattr__(self, "candidates", cands)

    def __len__(self) -> int:
        return len(self.candidates)


def _as_map(t) -> np.ndarray:
    values = t.values if isinstance(t, TargetMap) else np.asarray(t, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeError("predicted map must be 2-D")
    return values


def _neighbour_max(values: np.ndarray) -> np.ndarray:
    """Max over the 8 neighbours of each pixel, out-of-bounds as -inf."""
    padded = np.full((values.shape[0] + 2, values.shape[1] + 2), -np.inf)
    padded[1:-1, 1:-1] = values
    shifts = [
        padded[dy : dy + values.shape[0], dx : dx + values.shape[1]]
        for dy in (0, 1, 2)
        for dx in (0, 1, 2)
        if not (dy == 1 and dx == 1)
    ]
    return np.maximum.reduce(shifts)


def encode(t, params: EncoderParams) -> PointSet:
    """Thresholded peak extraction with greedy separation suppression.

    Steps: clamp the map to [0, 1]; keep pixels that are >= all 8
    neighbours and >= threshold; order by descending value with row-major
    index as the tie-break; greedily keep points at distance >=
    min_separation from everything kept so far.
    """
    values = np.clip(_as_map(t), 0.0, 1.0)
    height, width = values.shape
    is_peak = (values >= _neighbour_max(values)) & (values >= params.threshold)
    ys, xs = np.nonzero(is_peak)
    order = sorted(range(len(xs)), key=lambda k: (-values[ys[k], xs[k]], ys[k] * width + xs[k]))
    min_sq = params.min_separation**2
    kept_x: list[float] = []
    kept_y: list[float] = []
    for k in order:
        x, y = float(xs[k]), float(ys[k])
        ok = True
        for kx, ky in zip(kept_x, kept_y):
            if (x - kx) ** 2 + (y - ky) ** 2 < min_sq:
                ok = False
                break
        if ok:
            kept_x.append(x)
            kept_y.append(y)
    if not kept_x:
        return PointSet.empty()
    return PointSet(np.column_stack([kept_x, kept_y]))


def encoder_grid(thresholds: list[float], separations: list[float]) -> EncoderSpace:
    """Cartesian product in (threshold-major, separation-minor) order."""
    if not thresholds or not separations:
        raise ConfigError("encoder grid requires thresholds and separations")
    if len(set(thresholds)) != len(thresholds):
        raise ConfigError("duplicate thresholds supplied to encoder grid")
    if len(set(separations)) != len(separations):
        raise ConfigError("duplicate separations supplied to encoder grid")
    candidates = tuple(
        EncoderParams(threshold=float(h), min_separation=float(d))
        for h in thresholds
        for d in separations
    )
    return EncoderSpace(candidates)


def fit_encoder(
    predicted_maps: list,
    truths: list[PointSet],
    space: EncoderSpace,
    match_tolerance: float,
) -> tuple[EncoderParams, list[tuple[EncoderParams, float]]]:
    """Exhaustive fit: mean detection loss per candidate across samples.

    Returns the minimizer (earliest candidate on ties) and the full
    per-candidate loss table for audit.
    """
    if len(predicted_maps) != len(truths):
        raise ShapeError(f"{len(predicted_maps)} maps vs {len(truths)} truths")
    if not predicted_maps:
        raise ConfigError("encoder fit requires at least one sample")
    table: list[tuple[EncoderParams, float]] = []
    best_idx = 0
    best_loss = math.inf
    for idx, candidate in enumerate(space.candidates):
        losses = [
            detection_loss(encode(t, candidate), truth, match_tolerance)
            for t, truth in zip(predicted_maps, truths)
        ]
        mean_loss = float(sum(losses) / len(losses))
        table.append((candidate, mean_loss))
        if mean_loss < best_loss:
            best_loss = mean_loss
            best_idx = idx
    return space.candidates[best_idx], table
