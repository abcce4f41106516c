"""Dataset handling and full-batch calibration of the potentials.

Calibration minimizes the mean squared error of the analytic uniaxial
tension stress over stretch-stress-parameter tuples, so the potential is
fitted through its derivatives.  The optimizer is plain full-batch ADAM
followed by projection of the sign-constrained weights onto [0, inf);
projection is what lets constrained models develop exactly-zero weights.

Datasets live in CSV files with header ``lambda,stress_mpa,param_raw`` and
a JSON sidecar holding the parameter normalization bounds, so raw
manufacturing parameters (Shore hardness, grayscale, ...) round-trip while
models always see parameters in the unit interval.
"""

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import constitutive, networks
from .errors import EmptyDatasetError, ShapeMismatchError

__all__ = [
    "MaterialSample",
    "Dataset",
    "TrainConfig",
    "CalibrationRecord",
    "AdamState",
    "EvaluationReport",
    "load_dataset",
    "load_datasets",
    "merge_datasets",
    "save_dataset",
    "split_by_parameter",
    "split_by_stretch",
    "generate_synthetic",
    "mse_loss",
    "loss_and_gradient",
    "init_adam",
    "adam_step",
    "calibrate",
    "evaluate",
]


@dataclass(frozen=True)
class MaterialSample:
    """One uniaxial measurement: stretch, tensile PK1 stress, parameters."""

    lam: float
    stress: float
    param: np.ndarray


@dataclass
class Dataset:
    """Uniaxial stretch-stress data over one scalar manufacturing parameter.

    ``param_raw`` holds the as-measured parameter values; models consume the
    min-max normalized version exposed by :meth:`params_normalized`.
    ``calibration_indices`` and ``test_indices`` are disjoint and together
    cover every sample.
    """

    lam: np.ndarray
    stress: np.ndarray
    param_raw: np.ndarray
    param_min: float
    param_max: float
    label: str = ""
    source: str = ""
    calibration_indices: np.ndarray = field(default=None)
    test_indices: np.ndarray = field(default=None)

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        self.stress = np.asarray(self.stress, dtype=float)
        self.param_raw = np.asarray(self.param_raw, dtype=float)
        if not (self.lam.shape == self.stress.shape == self.param_raw.shape):
            raise ShapeMismatchError("dataset columns must have equal length")
        if np.any(self.lam <= 0.0):
            raise ValueError("stretches must be positive")
        if not np.all(np.isfinite(self.stress)):
            raise ValueError("stresses must be finite")
        n = self.lam.size
        if self.calibration_indices is None:
            self.calibration_indices = np.arange(n)
        if self.test_indices is None:
            self.test_indices = np.array([], dtype=int)
        self.calibration_indices = np.asarray(self.calibration_indices, dtype=int)
        self.test_indices = np.asarray(self.test_indices, dtype=int)
        merged = np.concatenate([self.calibration_indices, self.test_indices])
        if len(np.unique(merged)) != n or merged.size != n:
            raise ValueError("split must be disjoint and cover all samples")

    def __len__(self) -> int:
        return self.lam.size

    def params_normalized(self, raw=None) -> np.ndarray:
        """Min-max normalized parameters with trailing axis of width one."""
        raw = self.param_raw if raw is None else np.asarray(raw, dtype=float)
        span = self.param_max - self.param_min
        if span == 0.0:
            return np.zeros(raw.shape + (1,))
        return ((raw - self.param_min) / span)[..., None]

    def _slice(self, indices):
        return (
            self.lam[indices],
            self.stress[indices],
            self.params_normalized()[indices],
        )

    def calibration_arrays(self):
        return self._slice(self.calibration_indices)

    def test_arrays(self):
        return self._slice(self.test_indices)

    def samples(self):
        t = self.params_normalized()
        return [
            MaterialSample(float(l), float(p), t[i])
            for i, (l, p) in enumerate(zip(self.lam, self.stress))
        ]


def save_dataset(dataset: Dataset, csv_path) -> None:
    """Write the CSV file and its JSON sidecar next to it."""
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "stress_mpa", "param_raw"])
        for lam, stress, raw in zip(dataset.lam, dataset.stress, dataset.param_raw):
            writer.writerow([repr(float(lam)), repr(float(stress)), repr(float(raw))])
    sidecar = {
        "material_label": dataset.label,
        "param_max": dataset.param_max,
        "param_min": dataset.param_min,
        "source": dataset.source,
    }
    csv_path.with_suffix(".json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
    )


def load_dataset(csv_path) -> Dataset:
    """Read a dataset CSV; bounds come from the sidecar, or the data itself."""
    csv_path = Path(csv_path)
    with csv_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["lambda", "stress_mpa", "param_raw"]:
            raise ValueError(f"unexpected dataset header: {header}")
        rows = np.array([[float(v) for v in row[:3]] for row in reader])
    if rows.size == 0:
        raise EmptyDatasetError(f"no samples in {csv_path}")
    sidecar_path = csv_path.with_suffix(".json")
    if sidecar_path.exists():
        sidecar = json.loads(sidecar_path.read_text())
        pmin, pmax = sidecar["param_min"], sidecar["param_max"]
        label = sidecar.get("material_label", "")
        source = sidecar.get("source", "")
    else:
        pmin, pmax = float(rows[:, 2].min()), float(rows[:, 2].max())
        label, source = csv_path.stem, ""
    return Dataset(rows[:, 0], rows[:, 1], rows[:, 2], pmin, pmax, label, source)


def merge_datasets(datasets: list) -> Dataset:
    """Concatenate datasets that share normalization bounds.

    Splits are reset; apply them after merging.
    """
    if not datasets:
        raise EmptyDatasetError("nothing to merge")
    first = datasets[0]
    for ds in datasets[1:]:
        if (ds.param_min, ds.param_max) != (first.param_min, first.param_max):
            raise ValueError("datasets disagree on parameter normalization bounds")
    return Dataset(
        np.concatenate([ds.lam for ds in datasets]),
        np.concatenate([ds.stress for ds in datasets]),
        np.concatenate([ds.param_raw for ds in datasets]),
        first.param_min,
        first.param_max,
        first.label,
        first.source,
    )


def load_datasets(paths) -> Dataset:
    """Load one or more CSV files into a single dataset."""
    return merge_datasets([load_dataset(p) for p in paths])


def split_by_parameter(dataset: Dataset, holdout_raw_values, atol=1e-12) -> Dataset:
    """Move samples whose raw parameter matches any holdout value to the test set."""
    holdout = np.atleast_1d(np.asarray(holdout_raw_values, dtype=float))
    mask = np.any(
        np.abs(dataset.param_raw[:, None] - holdout[None, :]) <= atol, axis=1
    )
    return replace(
        dataset,
        calibration_indices=np.flatnonzero(~mask),
        test_indices=np.flatnonzero(mask),
    )


def split_by_stretch(dataset: Dataset, max_calibration_stretch: float) -> Dataset:
    """Hold out samples beyond a stretch threshold (extrapolation studies)."""
    mask = dataset.lam > max_calibration_stretch
    return replace(
        dataset,
        calibration_indices=np.flatnonzero(~mask),
        test_indices=np.flatnonzero(mask),
    )


def generate_synthetic(
    law,
    lam_values,
    param_values,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
    label: str = "synthetic",
    source: str = "",
) -> Dataset:
    """Sample a closed-form law on a stretch grid for several raw parameters.

    The law receives the raw parameter values.  Optional Gaussian noise is
    seeded by the caller; the default is noise-free.
    """
    lam_values = np.asarray(lam_values, dtype=float)
    param_values = np.atleast_1d(np.asarray(param_values, dtype=float))
    lam = np.tile(lam_values, param_values.size)
    raw = np.repeat(param_values, lam_values.size)
    stress = constitutive.uniaxial_stress(law, lam, raw[:, None])
    if noise_std > 0.0:
        if rng is None:
            raise ValueError("noise requires an explicit rng")
        stress = stress + noise_std * rng.standard_normal(stress.shape)
    return Dataset(
        lam, stress, raw, float(raw.min()), float(raw.max()), label, source
    )


# ---------------------------------------------------------------------------
# loss and optimizer


@dataclass(frozen=True)
class TrainConfig:
    """Full-batch training settings; every run is deterministic in ``seed``."""

    epochs: int
    learning_rate: float = 2e-3
    restarts: int = 5
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7

    def __post_init__(self):
        if self.epochs < 0 or self.restarts < 1:
            raise ValueError("epochs must be >= 0 and restarts >= 1")
        if self.learning_rate <= 0.0:
            raise ValueError("learning rate must be positive")


@dataclass
class CalibrationRecord:
    final_mse: float
    log10_mse: float
    epochs_run: int
    seed: int
    restart_index: int
    rank: int = -1
    diverged: bool = False
    learning_rate: float = 2e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7

    def to_dict(self) -> dict:
        return {
            "beta1": self.beta1,
            "beta2": self.beta2,
            "diverged": self.diverged,
            "eps": self.eps,
            "epochs_run": self.epochs_run,
            "final_mse": self.final_mse,
            "learning_rate": self.learning_rate,
            "log10_mse": self.log10_mse,
            "rank": self.rank,
            "restart_index": self.restart_index,
            "seed": self.seed,
        }


def _log10(x: float) -> float:
    return math.log10(x) if x > 0.0 else float("-inf")


def _model_stress(model, lam, t):
    i1, i2 = constitutive.uniaxial_invariants(lam)
    inv = np.stack([i1, i2], axis=-1)
    g = networks.invariant_gradients_batch(model, inv, t)
    return 2.0 * (g[..., 0] + g[..., 1] / lam) * (lam - lam**-2.0), inv


def mse_loss(model_or_law, dataset: Dataset) -> float:
    """Mean squared stress error over the calibration slice, in MPa^2."""
    lam, stress, t = dataset.calibration_arrays()
    if lam.size == 0:
        raise EmptyDatasetError("calibration slice is empty")
    law = constitutive.as_law(model_or_law)
    p = constitutive.uniaxial_stress(law, lam, t)
    return float(np.mean((p - stress) ** 2))


def loss_and_gradient(model, lam, stress, t):
    """Loss plus its gradient w.r.t. every trainable array.

    The gradient flows through the stress formula, i.e. through the
    invariant derivatives of the potential, not through the potential value.
    """
    if lam.size == 0:
        raise EmptyDatasetError("calibration slice is empty")
    p, inv = _model_stress(model, lam, t)
    residual = p - stress
    loss = float(np.mean(residual**2))
    scale = (2.0 / lam.size) * residual * 2.0 * (lam - lam**-2.0)
    cot = np.stack([scale, scale / lam], axis=-1)
    grads = networks.invariant_gradient_vjp(model, inv, t, cot)
    return loss, grads


@dataclass
class AdamState:
    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]


def init_adam(model) -> AdamState:
    arrays = networks.parameter_arrays(model)
    return AdamState(
        0, [np.zeros_like(a) for a in arrays], [np.zeros_like(a) for a in arrays]
    )


def adam_step(model, grads, state: AdamState, config: TrainConfig) -> AdamState:
    """One bias-corrected ADAM update followed by weight projection.

    The model's arrays are updated in place; constrained weights are clamped
    to ``max(w, 0)`` after the step, so infeasible updates land exactly on
    zero.  Returns the advanced optimizer state.
    """
    arrays = networks.parameter_arrays(model)
    masks = networks.constraint_masks(model)
    state.step += 1
    b1c = 1.0 - config.beta1**state.step
    b2c = 1.0 - config.beta2**state.step
    for arr, grad, m, v, constrained in zip(arrays, grads, state.m, state.v, masks):
        m *= config.beta1
        m += (1.0 - config.beta1) * grad
        v *= config.beta2
        v += (1.0 - config.beta2) * grad**2
        arr -= config.learning_rate * (m / b1c) / (np.sqrt(v / b2c) + config.eps)
        if constrained:
            np.maximum(arr, 0.0, out=arr)
    return state


def _train_single(model, lam, stress, t, config: TrainConfig):
    state = init_adam(model)
    loss = float("nan")
    epochs_run = 0
    diverged = False
    for _ in range(config.epochs):
        loss, grads = loss_and_gradient(model, lam, stress, t)
        if not np.isfinite(loss):
            diverged = True
            break
        adam_step(model, grads, state, config)
        epochs_run += 1
    # loss after the final step (or the initial loss when epochs == 0)
    final = float(np.mean((_model_stress(model, lam, t)[0] - stress) ** 2))
    if not np.isfinite(final):
        diverged = True
    return final, epochs_run, diverged


def calibrate(
    dataset: Dataset,
    config: TrainConfig,
    architecture: networks.Architecture,
    nodes: int,
) -> list[tuple[networks.PotentialModel, CalibrationRecord]]:
    """Run independent restarts and return (model, record) pairs, best first.

    Restart seeds are spawned deterministically from ``config.seed``; a
    non-finite loss aborts that restart and flags its record as diverged.
    """
    lam, stress, t = dataset.calibration_arrays()
    if lam.size == 0:
        raise EmptyDatasetError("calibration slice is empty")
    param_dim = t.shape[1]
    results = []
    children = np.random.SeedSequence(config.seed).spawn(config.restarts)
    for idx, child in enumerate(children):
        rng = np.random.default_rng(child)
        model = networks.build_model(architecture, nodes, param_dim, rng)
        final, epochs_run, diverged = _train_single(model, lam, stress, t, config)
        record = CalibrationRecord(
            final_mse=final,
            log10_mse=_log10(final),
            epochs_run=epochs_run,
            seed=config.seed,
            restart_index=idx,
            diverged=diverged,
            learning_rate=config.learning_rate,
            beta1=config.beta1,
            beta2=config.beta2,
            eps=config.eps,
        )
        results.append((model, record))
    results.sort(key=lambda pair: (pair[1].diverged, pair[1].final_mse))
    for rank, (model, record) in enumerate(results):
        record.rank = rank
        model.metadata["calibration"] = record.to_dict()
        model.metadata.setdefault("dataset_label", dataset.label)
    return results


@dataclass
class EvaluationReport:
    """Per-sample residual table over the test slice, plus the aggregate."""

    rows: list
    mse: float | None
    defined: bool

    @property
    def log10_mse(self) -> float | None:
        return None if self.mse is None else _log10(self.mse)


def evaluate(model_or_law, dataset: Dataset, slice_: str = "test") -> EvaluationReport:
    """Pure evaluation of a law on the chosen slice; no mutation anywhere."""
    indices = (
        dataset.test_indices if slice_ == "test" else dataset.calibration_indices
    )
    lam, stress, t = dataset._slice(indices)
    if lam.size == 0:
        return EvaluationReport([], None, False)
    law = constitutive.as_law(model_or_law)
    p = constitutive.uniaxial_stress(law, lam, t)
    rows = [
        {
            "lambda": float(l),
            "param_raw": float(dataset.param_raw[i]),
            "P_data": float(s),
            "P_model": float(pm),
            "residual": float(pm - s),
        }
        for l, s, pm, i in zip(lam, stress, p, indices)
    ]
    return EvaluationReport(rows, float(np.mean((p - stress) ** 2)), True)
