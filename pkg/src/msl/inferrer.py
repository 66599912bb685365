"""Patch-wise regressor mapping a lattice to a predicted target map.

One hidden tanh layer shared across pixels: each pixel's prediction is
computed from the (2c+1)x(2c+1) patch centred on it, with reflect
padding at the borders. Trained by plain SGD on mean squared error;
the analytic gradient is exact, so it can be checked against finite
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .data import ImageLattice
from .decoder import TargetMap
from .errors import ConfigError, DivergenceError, ShapeError
from .seeds import derive_seed, make_rng
from .storage import read_json, read_msl1, write_json, write_msl1


@dataclass(frozen=True)
class Architecture:
    """Patch context radius and hidden width; input dim is (2c+1)^2."""

    context_radius: int
    hidden_units: int

    def __post_init__(self) -> None:
        if self.context_radius < 0:
            raise ConfigError("context_radius must be >= 0")
        if self.hidden_units < 1:
            raise ConfigError("hidden_units must be >= 1")

    @property
    def patch_side(self) -> int:
        return 2 * self.context_radius + 1

    @property
    def input_dim(self) -> int:
        return self.patch_side**2


@dataclass(frozen=True, eq=False)
class InferrerParams:
    w1: np.ndarray  # (hidden, input_dim)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float

    def __post_init__(self) -> None:
        w1 = np.asarray(self.w1, dtype=np.float64)
        b1 = np.asarray(self.b1, dtype=np.float64)
        w2 = np.asarray(self.w2, dtype=np.float64)
        if w1.ndim != 2 or b1.ndim != 1 or w2.ndim != 1:
            raise ShapeError("w1 must be 2-D, b1 and w2 1-D")
        if not (w1.shape[0] == b1.shape[0] == w2.shape[0]):
            raise ShapeError("hidden dimensions of w1, b1, w2 must agree")
        if not (
            np.all(np.isfinite(w1))
            and np.all(np.isfinite(b1))
            and np.all(np.isfinite(w2))
            and math.isfinite(self.b2)
        ):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b2", float(self.b2))

    @property
    def hidden_units(self) -> int:
        return self.w1.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def count(self) -> int:
        return self.w1.size + self.b1.size + self.w2.size + 1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    learning_rate: float
    batch_pixels: int
    seed: int

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        # 0 is allowed so a degenerate run returns its initial parameters.
        if self.learning_rate < 0.0:
            raise ConfigError("learning_rate must be >= 0")
        if self.batch_pixels < 1:
            raise ConfigError("batch_pixels must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class TrainResult:
    params: InferrerParams
    step_losses: np.ndarray  # minibatch loss before each update
    epoch_losses: np.ndarray  # per-epoch mean of step losses


def init_params(arch: Architecture, seed: int) -> InferrerParams:
    """Uniform(-b, b) weights with b = sqrt(6/(fan_in+fan_out)); zero biases."""
    rng = make_rng(seed)
    bound1 = math.sqrt(6.0 / (arch.input_dim + arch.hidden_units))
    bound2 = math.sqrt(6.0 / (arch.hidden_units + 1))
    w1 = rng.uniform(-bound1, bound1, size=(arch.hidden_units, arch.input_dim))
    w2 = rng.uniform(-bound2, bound2, size=arch.hidden_units)
    return InferrerParams(w1=w1, b1=np.zeros(arch.hidden_units), w2=w2, b2=0.0)


def _forward(params: InferrerParams, patches: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = np.tanh(patches @ params.w1.T + params.b1)
    pred = hidden @ params.w2 + params.b2
    return pred, hidden


def predict_pixel(params: InferrerParams, patch: np.ndarray) -> float:
    """Raw (unclamped) regression output for one flattened patch."""
    patch = np.asarray(patch, dtype=np.float64).ravel()
    if patch.shape[0] != params.input_dim:
        raise ShapeError(f"patch has {patch.shape[0]} values, architecture expects {params.input_dim}")
    pred, _ = _forward(params, patch[None, :])
    return float(pred[0])


def _patch_matrix(values: np.ndarray, context_radius: int) -> np.ndarray:
    """All patches of a lattice, reflect-padded, as an (H*W, dim) matrix."""
    side = 2 * context_radius + 1
    padded = np.pad(values, context_radius, mode="reflect")
    windows = sliding_window_view(padded, (side, side))
    return windows.reshape(values.size, side * side)


def infer(lattice, params: InferrerParams) -> np.ndarray:
    """Predicted target map for a lattice; raw values may exit [0, 1]."""
    values = lattice.values if isinstance(lattice, ImageLattice) else np.asarray(lattice, dtype=np.float64)
    side = int(round(math.sqrt(params.input_dim)))
    if side * side != params.input_dim:
        raise ShapeError("parameter input dimension is not a square patch")
    context_radius = (side - 1) // 2
    patches = _patch_matrix(values, context_radius)
    pred, _ = _forward(params, patches)
    return pred.reshape(values.shape)


def loss_i(t: np.ndarray, t_star) -> float:
    """Mean squared error between a predicted map and its target map."""
    t = np.asarray(t, dtype=np.float64)
    star = t_star.values if isinstance(t_star, TargetMap) else np.asarray(t_star, dtype=np.float64)
    if t.shape != star.shape:
        raise ShapeError(f"map shapes differ: {t.shape} vs {star.shape}")
    diff = t - star
    return float(np.mean(diff * diff))


def gradient(
    params: InferrerParams, patches: np.ndarray, targets: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Exact gradient of the minibatch mean squared error.

    Returns (g_w1, g_b1, g_w2, g_b2) with the shapes of the parameters.
    """
    patches = np.asarray(patches, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if patches.ndim != 2 or patches.shape[0] != targets.shape[0]:
        raise ShapeError("patches must be (batch, dim) aligned with targets")
    if patches.shape[0] == 0:
        raise ShapeError("minibatch must be non-empty")
    if patches.shape[1] != params.input_dim:
        raise ShapeError(f"patch dim {patches.shape[1]} does not match architecture {params.input_dim}")
    pred, hidden = _forward(params, patches)
    residual = (2.0 / targets.shape[0]) * (pred - targets)
    g_b2 = float(residual.sum())
    g_w2 = hidden.T @ residual
    d_hidden = np.outer(residual, params.w2) * (1.0 - hidden * hidden)
    g_w1 = d_hidden.T @ patches
    g_b1 = d_hidden.sum(axis=0)
    return g_w1, g_b1, g_w2, g_b2


def train(
    train_lattices: list[ImageLattice],
    train_target_maps: list[TargetMap],
    arch: Architecture,
    cfg: TrainConfig,
) -> TrainResult:
    """SGD on randomly sampled (lattice, pixel) minibatches.

    An epoch is ceil(total_pixels / batch_pixels) steps. The whole run is
    a pure function of (inputs, arch, cfg): initialization and batch
    sampling use sub-seeds of cfg.seed.
    """
    if not train_lattices:
        raise ConfigError("training requires at least one lattice")
    if len(train_lattices) != len(train_target_maps):
        raise ShapeError(f"{len(train_lattices)} lattices vs {len(train_target_maps)} target maps")
    shape = train_lattices[0].values.shape
    for lattice, target in zip(train_lattices, train_target_maps):
        if lattice.values.shape != target.values.shape:
            raise ShapeError("each target map must match its lattice's shape")
        if lattice.values.shape != shape:
            raise ShapeError("all training lattices must share one shape")

    c = arch.context_radius
    height, width = shape
    padded = np.stack([np.pad(l.values, c, mode="reflect") for l in train_lattices])
    targets = np.stack([t.values for t in train_target_maps])
    offsets = np.arange(arch.input_dim)
    off_y = offsets // arch.patch_side
    off_x = offsets % arch.patch_side

    params = init_params(arch, derive_seed(cfg.seed, 0))
    rng = make_rng(derive_seed(cfg.seed, 1))
    n_samples = len(train_lattices)
    pixels_per_lattice = height * width
    steps_per_epoch = max(1, math.ceil(n_samples * pixels_per_lattice / cfg.batch_pixels))

    w1, b1, w2, b2 = params.w1.copy(), params.b1.copy(), params.w2.copy(), params.b2
    step_losses = np.empty(cfg.epochs * steps_per_epoch)
    step = 0
    # Divergence is detected via the finiteness check, so numpy's overflow
    # warnings on the way there are just noise.
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.epochs):
            for _ in range(steps_per_epoch):
                sample_idx = rng.integers(0, n_samples, size=cfg.batch_pixels)
                flat = rng.integers(0, pixels_per_lattice, size=cfg.batch_pixels)
                py, px = np.divmod(flat, width)
                patches = padded[
                    sample_idx[:, None], py[:, None] + off_y[None, :], px[:, None] + off_x[None, :]
                ]
                batch_targets = targets[sample_idx, py, px]

                hidden = np.tanh(patches @ w1.T + b1)
                pred = hidden @ w2 + b2
                diff = pred - batch_targets
                loss = float(np.mean(diff * diff))
                if not math.isfinite(loss):
                    raise DivergenceError(f"non-finite training loss at step {step}")
                step_losses[step] = loss
                step += 1

                residual = (2.0 / cfg.batch_pixels) * diff
                d_hidden = np.outer(residual, w2) * (1.0 - hidden * hidden)
                b2 -= cfg.learning_rate * float(residual.sum())
                w2 -= cfg.learning_rate * (hidden.T @ residual)
                w1 -= cfg.learning_rate * (d_hidden.T @ patches)
                b1 -= cfg.learning_rate * d_hidden.sum(axis=0)

    epoch_losses = step_losses.reshape(cfg.epochs, steps_per_epoch).mean(axis=1)
    return TrainResult(
        params=InferrerParams(w1=w1, b1=b1, w2=w2, b2=b2),
        step_losses=step_losses,
        epoch_losses=epoch_losses,
    )


def save_model(directory: Path, arch: Architecture, cfg: TrainConfig, params: InferrerParams) -> None:
    """Write model.json (metadata) and model.msl1 (flat float32 weights).

    The weight dump concatenates w1, b1, w2, b2 in that order; its header
    carries the total parameter count as width and 1 as height.
    """
    directory = Path(directory)
    meta = {
        "architecture": {"context_radius": arch.context_radius, "hidden_units": arch.hidden_units},
        "train_config": {
            "epochs": cfg.epochs,
            "learning_rate": cfg.learning_rate,
            "batch_pixels": cfg.batch_pixels,
            "seed": cfg.seed,
        },
        "seed": cfg.seed,
    }
    write_json(directory / "model.json", meta)
    flat = np.concatenate([params.w1.ravel(), params.b1, params.w2, [params.b2]])
    write_msl1(directory / "model.msl1", flat[None, :])


def load_model(directory: Path) -> tuple[Architecture, TrainConfig, InferrerParams]:
    directory = Path(directory)
    meta = read_json(directory / "model.json")
    arch = Architecture(
        context_radius=int(meta["architecture"]["context_radius"]),
        hidden_units=int(meta["architecture"]["hidden_units"]),
    )
    tc = meta["train_config"]
    cfg = TrainConfig(
        epochs=int(tc["epochs"]),
        learning_rate=float(tc["learning_rate"]),
        batch_pixels=int(tc["batch_pixels"]),
        seed=int(tc["seed"]),
    )
    flat = read_msl1(directory / "model.msl1").ravel()
    expected = arch.hidden_units * arch.input_dim + 2 * arch.hidden_units + 1
    if flat.shape[0] != expected:
        raise ShapeError(f"model dump has {flat.shape[0]} values, architecture expects {expected}")
    n1 = arch.hidden_units * arch.input_dim
    w1 = flat[:n1].reshape(arch.hidden_units, arch.input_dim)
    b1 = flat[n1 : n1 + arch.hidden_units]
    w2 = flat[n1 + arch.hidden_units : n1 + 2 * arch.hidden_units]
    b2 = float(flat[-1])
    return arch, cfg, InferrerParams(w1=w1, b1=b1, w2=w2, b2=b2)
