"""The three procedures tying the components together.

learn: decode train targets under fixed decoder params, train the
inferrer on them, then fit the encoder on the validation split's
predicted maps. loop: restart learn for every decoder candidate and keep
the one with the lowest validation detection loss. test: run inferrer
and encoder only; ground truth and decoder are never touched.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .decoder import DecoderParams, DecoderSpace, decode
from .encoder import EncoderParams, EncoderSpace, encode, fit_encoder
from .errors import DivergenceError, LoopFailureError
from .inferrer import Architecture, InferrerParams, TrainConfig, infer, train
from .metrics import DetectionReport, report
from .seeds import derive_seed


@dataclass(frozen=True, eq=False)
class LearnedSolution:
    """Everything produced by one learning run under fixed decoder params."""

    decoder_params: DecoderParams
    inferrer_params: InferrerParams
    encoder_params: EncoderParams
    step_losses: np.ndarray
    epoch_losses: np.ndarray
    encoder_table: tuple[tuple[EncoderParams, float], ...]
    validation_report: DetectionReport


@dataclass(frozen=True, eq=False)
class LoopEntry:
    decoder_params: DecoderParams
    validation_loss: float | None
    solution: LearnedSolution | None
    error: str | None
    seconds: float

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True, eq=False)
class LoopResult:
    entries: tuple[LoopEntry, ...]
    selected_index: int

    @property
    def selected(self) -> LearnedSolution:
        solution = self.entries[self.selected_index].solution
        assert solution is not None
        return solution


def learn(
    train_split: Dataset,
    val_split: Dataset,
    decoder_params: DecoderParams,
    arch: Architecture,
    train_cfg: TrainConfig,
    encoder_space: EncoderSpace,
    match_tolerance: float,
) -> LearnedSolution:
    if train_split.n == 0 or val_split.n == 0:
        raise ValueError("train and validation splits must be non-empty")
    targets = [decode(s.truth, s.lattice.shape, decoder_params) for s in train_split.samples]
    result = train([s.lattice for s in train_split.samples], targets, arch, train_cfg)

    val_maps = [infer(s.lattice, result.params) for s in val_split.samples]
    val_truths = [s.truth for s in val_split.samples]
    encoder_params, table = fit_encoder(val_maps, val_truths, encoder_space, match_tolerance)

    predictions = [encode(t, encoder_params) for t in val_maps]
    val_report = report(predictions, val_truths, match_tolerance)
    return LearnedSolution(
        decoder_params=decoder_params,
        inferrer_params=result.params,
        encoder_params=encoder_params,
        step_losses=result.step_losses,
        epoch_losses=result.epoch_losses,
        encoder_table=tuple(table),
        validation_report=val_report,
    )


def _evaluate_candidate(args) -> LoopEntry:
    (index, candidate, train_split, val_split, arch, base_cfg, encoder_space, tolerance) = args
    cfg = replace(base_cfg, seed=derive_seed(base_cfg.seed, index))
    start = time.perf_counter()
    try:
        solution = learn(train_split, val_split, candidate, arch, cfg, encoder_space, tolerance)
    except DivergenceError as exc:
        return LoopEntry(
            decoder_params=candidate,
            validation_loss=None,
            solution=None,
            error=str(exc),
            seconds=time.perf_counter() - start,
        )
    return LoopEntry(
        decoder_params=candidate,
        validation_loss=solution.validation_report.loss,
        solution=solution,
        error=None,
        seconds=time.perf_counter() - start,
    )


def loop(
    train_split: Dataset,
    val_split: Dataset,
    decoder_space: DecoderSpace,
    arch: Architecture,
    train_cfg: TrainConfig,
    encoder_space: EncoderSpace,
    match_tolerance: float,
    workers: int = 1,
) -> LoopResult:
    """Restart learning for every decoder candidate and select the argmin.

    Each candidate trains under its own sub-seed of train_cfg.seed, so
    the result does not depend on worker count or evaluation order.
    Diverged candidates stay in the table as failed entries.
    """
    jobs = [
        (i, candidate, train_split, val_split, arch, train_cfg, encoder_space, match_tolerance)
        for i, candidate in enumerate(decoder_space.candidates)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = tuple(pool.map(_evaluate_candidate, jobs))
    else:
        entries = tuple(_evaluate_candidate(job) for job in jobs)

    selected_index = -1
    best_loss = float("inf")
    for i, entry in enumerate(entries):
        if entry.failed or entry.validation_loss is None:
            continue
        if entry.validation_loss < best_loss:
            best_loss = entry.validation_loss
            selected_index = i
    if selected_index < 0:
        raise LoopFailureError("every decoder candidate failed")
    return LoopResult(entries=entries, selected_index=selected_index)


def test(test_split: Dataset, solution, match_tolerance: float) -> DetectionReport:
    """Evaluate the learned inferrer+encoder on held-out samples.

    Accepts a LearnedSolution or a LoopResult (its selected solution).
    Only the inferrer and encoder run; the decoder is not invoked.
    """
    if isinstance(solution, LoopResult):
        solution = solution.selected
    predictions = []
    truths = []
    for sample in test_split.samples:
        predicted_map = infer(sample.lattice, solution.inferrer_params)
        predictions.append(encode(predicted_map, solution.encoder_params))
        truths.append(sample.truth)
    return report(predictions, truths, match_tolerance)
