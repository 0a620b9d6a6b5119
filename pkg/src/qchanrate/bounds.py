"""Achievable-rate lower bounds from mismatched decoding metrics.

A decoder that runs an auxiliary (approximate) channel model instead of
the true one still achieves the rate obtained by evaluating the
auxiliary likelihoods on data sampled from the *true* channel:

    ir_lower = hx + aux_hy - aux_hxy

where hx is the true input entropy rate (the input law is shared) and
aux_hy / aux_hxy come from the forward recursions run on the auxiliary
model with the true-channel trajectory.  When the auxiliary equals the
true model this reproduces the plain information-rate estimate exactly,
per sequence, which pins the combination formula.

Classical auxiliary kernels are floored at a tiny value and renormalized
on load (flagged on the model): a mismatched metric must never assign
probability zero to observable data.  Quantum auxiliaries reuse the
doubled-state recursion unchanged; only the model object differs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channels import ClassicalFsmc, InputLaw, TransferOperatorSet
from .errors import AuxiliaryLikelihoodError, ImpossibleObservationError
from .rates import (
    LN2,
    as_recursion_model,
    input_log_loss,
    scaled_forward_classical,
    scaled_forward_quantum,
)
from .sampling import Trajectory

KERNEL_FLOOR = 1e-12


def smooth_classical_fsmc(f: ClassicalFsmc, floor: float = KERNEL_FLOOR) -> ClassicalFsmc:
    """Floor every kernel entry and renormalize rows (and the initial pmf)."""
    kernel = np.maximum(f.kernel, floor)
    kernel = kernel / kernel.sum(axis=(2, 3), keepdims=True)
    initial = np.maximum(f.initial, floor)
    return ClassicalFsmc(kernel, initial / initial.sum())


@dataclass(frozen=True)
class AuxiliaryModel:
    """A decoding model plus its shared input law context.

    ``smoothed`` records whether the kernel was floored on load.
    """

    model: ClassicalFsmc | TransferOperatorSet
    label: str
    smoothed: bool = False


def make_auxiliary(model, label: str, floor: float = KERNEL_FLOOR) -> AuxiliaryModel:
    """Wrap a model for use as a decoding metric.

    Classical kernels are floored and renormalized (flagged); quantum
    models are compiled if necessary and used as-is.
    """
    model = as_recursion_model(model)
    if isinstance(model, ClassicalFsmc) and floor > 0:
        return AuxiliaryModel(smooth_classical_fsmc(model, floor), label, smoothed=True)
    return AuxiliaryModel(model, label, smoothed=False)


@dataclass(frozen=True)
class LowerBoundEstimate:
    """Mismatched-decoding achievable-rate estimate (bits per use)."""

    n: int
    seed: int
    hx: float
    aux_hy: float
    aux_hxy: float
    ir_lower: float


def lower_bound(traj: Trajectory, aux: AuxiliaryModel, q: InputLaw) -> LowerBoundEstimate:
    """Evaluate an auxiliary decoding metric on a true-channel trajectory."""
    if not isinstance(aux, AuxiliaryModel):
        aux = AuxiliaryModel(as_recursion_model(aux), label=type(aux).__name__)
    model = aux.model
    hx = float(input_log_loss(q, traj.x).sum()) / (traj.n * LN2)
    try:
        if isinstance(model, ClassicalFsmc):
            ly = scaled_forward_classical(model, q, traj.y)
            lxy = scaled_forward_classical(model, q, traj.y, traj.x)
        else:
            ly = scaled_forward_quantum(model, q, traj.y)
            lxy = scaled_forward_quantum(model, q, traj.y, traj.x)
    except ImpossibleObservationError as exc:
        raise AuxiliaryLikelihoodError(
            f"auxiliary model {aux.label!r} assigned zero likelihood to the "
            f"observed data ({exc}); smooth it first, e.g. via make_auxiliary, "
            f"which floors classical kernels at {KERNEL_FLOOR:g}"
        ) from exc
    aux_hy = float(ly.sum()) / (traj.n * LN2)
    aux_hxy = float(lxy.sum()) / (traj.n * LN2)
    return LowerBoundEstimate(
        n=traj.n,
        seed=traj.seed,
        hx=hx,
        aux_hy=aux_hy,
        aux_hxy=aux_hxy,
        ir_lower=hx + aux_hy - aux_hxy,
    )


@dataclass(frozen=True)
class GridPoint:
    value: float
    mean_ir_lower: float
    estimates: tuple[LowerBoundEstimate, ...]


@dataclass(frozen=True)
class GridSweepResult:
    best: GridPoint
    points: tuple[GridPoint, ...]


def grid_sweep(
    true_model,
    q: InputLaw,
    aux_family: Callable[[float], AuxiliaryModel],
    grid: Sequence[float],
    n: int,
    seeds: Sequence[int],
) -> GridSweepResult:
    """Evaluate an auxiliary family over a parameter grid.

    The same true-channel trajectories (one per seed) are shared by
    every grid point, so differences across the grid reflect the
    auxiliary parameter rather than sampling noise.  Returns the full
    table and the point with the largest mean bound (first on ties).
    """
    from .sampling import sample_trajectory

    if len(grid) < 1:
        raise ValueError("grid must contain at least one value")
    if len(seeds) < 1:
        raise ValueError("at least one seed is required")
    true_model = as_recursion_model(true_model)
    trajectories = [sample_trajectory(true_model, q, n, seed) for seed in seeds]
    points = []
    for value in grid:
        aux = aux_family(value)
        if not isinstance(aux, AuxiliaryModel):
            aux = make_auxiliary(aux, label=f"grid[{value!r}]")
        estimates = tuple(lower_bound(traj, aux, q) for traj in trajectories)
        mean = float(np.mean([e.ir_lower for e in estimates]))
        points.append(GridPoint(float(value), mean, estimates))
    best = max(points, key=lambda p: p.mean_ir_lower)
    return GridSweepResult(best=best, points=tuple(points))
