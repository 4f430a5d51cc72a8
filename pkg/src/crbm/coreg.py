"""Concurrent training of a subject RBM and a scene RBM under coupling.

Unit k of each RBM is pushed, via a cross-entropy penalty, toward a
sparsified version of unit k of the other modality computed on the same
minibatch. The sparsified activations act as constant targets; gradient
flows only into the RBM being updated, and both RBMs step from the same
pre-update parameters.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlignmentError,
    BatchError,
    DataError,
    DimensionError,
    FormatError,
    NumericError,
    TruncationError,
    WriteError,
)
from .features import FeatureMatrix
from .rbm import Rbm, cd_gradient, hidden_probs, init_rbm, rbm_from_bytes, rbm_to_bytes

PAIR_MAGIC = b"PAIR"
_PAIR_HEADER = struct.Struct("<4sI")

# Geometric decay of the sparsification target profile.
SPARSIFY_RATIO = 0.5
_TARGET_EPS = 1e-7

CONFIG_KEYS = (
    "lambda_subject",
    "lambda_scene",
    "sparsity_target",
    "learning_rate",
    "cd_steps",
    "minibatch_size",
    "epochs",
    "seed",
    "k_units",
)


@dataclass(frozen=True)
class TrainConfig:
    """Every knob the training procedure needs, with documented defaults.

    sparsity_target None means 1 / k_units (0.5 for a single-unit model).
    """

    k_units: int = 8
    lambda_subject: float = 0.5
    lambda_scene: float = 0.5
    sparsity_target: float | None = None
    learning_rate: float = 0.05
    cd_steps: int = 1
    minibatch_size: int = 32
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.k_units < 1:
            raise ValueError(f"k_units must be >= 1, got {self.k_units}")
        if self.lambda_subject < 0 or self.lambda_scene < 0:
            raise ValueError("regularization strengths must be >= 0")
        if self.sparsity_target is not None and not (0.0 < self.sparsity_target < 1.0):
            raise ValueError(f"sparsity_target must lie in (0, 1), got {self.sparsity_target}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.cd_steps < 1:
            raise ValueError(f"cd_steps must be >= 1, got {self.cd_steps}")
        if self.minibatch_size < 2:
            raise ValueError(f"minibatch_size must be >= 2, got {self.minibatch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")

    @property
    def resolved_sparsity_target(self) -> float:
        if self.sparsity_target is not None:
            return self.sparsity_target
        return 1.0 / self.k_units if self.k_units >= 2 else 0.5


def read_config(path) -> TrainConfig:
    """Parse a flat key=value config file; unknown keys are rejected."""
    values: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise FormatError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in CONFIG_KEYS:
            raise FormatError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key in ("cd_steps", "minibatch_size", "epochs", "seed", "k_units"):
                values[key] = int(val)
            else:
                values[key] = float(val)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    try:
        return TrainConfig(**values)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_config(cfg: TrainConfig, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for key in CONFIG_KEYS:
                val = getattr(cfg, key)
                if val is None:
                    continue
                fh.write(f"{key}={val}\n")
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


@dataclass
class PairedModel:
    """Subject and scene RBMs sharing one hidden unit count."""

    rbm_subject: Rbm
    rbm_scene: Rbm

    def __post_init__(self):
        if self.rbm_subject.n_hidden != self.rbm_scene.n_hidden:
            raise DimensionError(
                f"hidden unit counts differ: {self.rbm_subject.n_hidden}"
                f" vs {self.rbm_scene.n_hidden}"
            )

    @property
    def k_units(self) -> int:
        return self.rbm_subject.n_hidden


def sparsify_targets(n_rows: int, mean: float) -> np.ndarray:
    """Rank-ordered target profile: geometric decay, column mean exactly `mean`."""
    q = SPARSIFY_RATIO
    scale = mean * n_rows * (1.0 - q) / (1.0 - q**n_rows)
    profile = scale * q ** np.arange(n_rows, dtype=np.float64)
    profile = np.clip(profile, _TARGET_EPS, 1.0 - _TARGET_EPS)
    return profile * (mean / profile.mean())


def sparsify(z: np.ndarray, mean: float) -> np.ndarray:
    """Replace each column of z rank-wise by the fixed decreasing profile.

    The largest activation in a column receives the largest target, ties
    resolved toward the lower row index, so within-column rank order is
    preserved and every column's mean equals `mean` exactly.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise DimensionError(f"expected a B x K matrix, got shape {z.shape}")
    if z.shape[0] < 2:
        raise BatchError(f"sparsify needs at least 2 rows, got {z.shape[0]}")
    if z.min() < 0.0 or z.max() > 1.0:
        raise DataError("sparsify expects probabilities in [0, 1]")
    profile = sparsify_targets(z.shape[0], mean)
    order = np.argsort(-z, axis=0, kind="stable")
    out = np.empty_like(z)
    np.put_along_axis(out, order, np.broadcast_to(profile[:, None], z.shape), axis=0)
    return out


def coreg_penalty(z_self: np.ndarray, z_target: np.ndarray) -> tuple[float, np.ndarray]:
    """Cross entropy of this modality's unit probabilities against fixed targets.

    Returns (loss, gradient with respect to the hidden pre-activations).
    loss = -(1/B) sum_{i,k} [t log z + (1 - t) log(1 - z)]; the gradient is
    the Bernoulli identity (z - t) / B. Targets are constants: nothing flows
    back into the modality that produced them.
    """
    z_self = np.asarray(z_self, dtype=np.float64)
    z_target = np.asarray(z_target, dtype=np.float64)
    if z_self.shape != z_target.shape:
        raise DimensionError(f"shape mismatch: {z_self.shape} vs {z_target.shape}")
    b = z_self.shape[0]
    zc = np.clip(z_self, _TARGET_EPS, 1.0 - _TARGET_EPS)
    loss = -(z_target * np.log(zc) + (1.0 - z_target) * np.log1p(-zc)).sum() / b
    grad = (z_self - z_target) / b
    return float(loss), grad


def _minibatch_slices(perm: np.ndarray, size: int) -> list[np.ndarray]:
    chunks = [perm[i : i + size] for i in range(0, len(perm), size)]
    # A lone trailing frame cannot be sparsified; fold it into the last batch.
    if len(chunks) > 1 and len(chunks[-1]) == 1:
        chunks[-2] = np.concatenate([chunks[-2], chunks[-1]])
        chunks.pop()
    return chunks


def _extract_normalized(m: FeatureMatrix, name: str) -> np.ndarray:
    x = m.data.astype(np.float64)
    if x.min() < 0.0 or x.max() > 1.0:
        raise DataError(f"{name} features must be normalized to [0, 1] before training")
    return x


def _train_streams(seed: int) -> tuple[np.random.Generator, dict[str, np.random.Generator]]:
    """One shuffle stream plus an independent stream per modality.

    Derived by spawning, so a single-modality run consumes exactly the same
    random numbers for its modality as the paired run does.
    """
    shuffle_ss, subject_ss, scene_ss = np.random.SeedSequence(seed).spawn(3)
    return (
        np.random.default_rng(shuffle_ss),
        {
            "subject": np.random.default_rng(subject_ss),
            "scene": np.random.default_rng(scene_ss),
        },
    )


class _Lane:
    """Per-modality training state inside the shared epoch loop."""

    def __init__(self, data: np.ndarray, coupling: float, rng: np.random.Generator, k: int):
        self.data = data
        self.coupling = coupling
        self.rng = rng
        self.rbm = init_rbm(data.shape[1], k, rng)


def _run_epochs(lanes: list[_Lane], cfg: TrainConfig, shuffle_rng: np.random.Generator) -> None:
    frames = lanes[0].data.shape[0]
    mu = cfg.resolved_sparsity_target
    coupled = len(lanes) == 2 and any(lane.coupling > 0 for lane in lanes)
    lr = cfg.learning_rate
    for epoch in range(cfg.epochs):
        perm = shuffle_rng.permutation(frames)
        for idx in _minibatch_slices(perm, cfg.minibatch_size):
            batches = [lane.data[idx] for lane in lanes]
            grads = [
                cd_gradient(lane.rbm, batch, cfg.cd_steps, lane.rng)
                for lane, batch in zip(lanes, batches)
            ]
            pens = [None, None]
            if coupled:
                z = [hidden_probs(lane.rbm, batch) for lane, batch in zip(lanes, batches)]
                targets = [sparsify(z[1], mu), sparsify(z[0], mu)]
                for i in (0, 1):
                    if lanes[i].coupling > 0:
                        _, g = coreg_penalty(z[i], targets[i])
                        pens[i] = (batches[i].T @ g, g.sum(axis=0))
            for lane, grad, pen in zip(lanes, grads, pens):
                dw = grad.d_weights
                dbh = grad.d_hidden_bias
                if pen is not None:
                    dw = dw - lane.coupling * pen[0]
                    dbh = dbh - lane.coupling * pen[1]
                lane.rbm.weights += lr * dw
                lane.rbm.hidden_bias += lr * dbh
                lane.rbm.visible_bias += lr * grad.d_visible_bias
        for lane in lanes:
            if not np.isfinite(lane.rbm.weights).all():
                raise NumericError(f"training diverged at epoch {epoch + 1}")


def train_pair(x_subject: FeatureMatrix, x_scene: FeatureMatrix, cfg: TrainConfig) -> PairedModel:
    """Train both RBMs concurrently on aligned, [0,1]-normalized features.

    Minibatches contain the same frame indices in both modalities; each
    RBM's update combines its CD gradient with the coupling gradient toward
    the other modality's sparsified unit activations. With both coupling
    strengths zero the trajectories are bit-identical to train_single runs
    under the same seed.
    """
    if x_subject.frames != x_scene.frames:
        raise AlignmentError(f"frame counts differ: {x_subject.frames} vs {x_scene.frames}")
    if x_subject.fps != x_scene.fps:
        raise AlignmentError(f"sampling rates differ: {x_subject.fps} vs {x_scene.fps}")
    shuffle_rng, streams = _train_streams(cfg.seed)
    lanes = [
        _Lane(_extract_normalized(x_subject, "subject"), cfg.lambda_subject, streams["subject"], cfg.k_units),
        _Lane(_extract_normalized(x_scene, "scene"), cfg.lambda_scene, streams["scene"], cfg.k_units),
    ]
    _run_epochs(lanes, cfg, shuffle_rng)
    return PairedModel(rbm_subject=lanes[0].rbm, rbm_scene=lanes[1].rbm)


def train_single(x: FeatureMatrix, cfg: TrainConfig, role: str = "subject") -> Rbm:
    """Train one RBM alone, consuming the same random streams as train_pair
    would for that role. Coupling does not apply."""
    if role not in ("subject", "scene"):
        raise ValueError(f"role must be 'subject' or 'scene', got {role!r}")
    shuffle_rng, streams = _train_streams(cfg.seed)
    lane = _Lane(_extract_normalized(x, role), 0.0, streams[role], cfg.k_units)
    _run_epochs([lane], cfg, shuffle_rng)
    return lane.rbm


def pair_to_bytes(model: PairedModel) -> bytes:
    head = _PAIR_HEADER.pack(PAIR_MAGIC, model.k_units)
    return head + rbm_to_bytes(model.rbm_subject) + rbm_to_bytes(model.rbm_scene)


def save_pair(model: PairedModel, path) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(pair_to_bytes(model))
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def load_pair(path) -> PairedModel:
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    origin = str(path)
    if len(buf) < _PAIR_HEADER.size:
        raise TruncationError(f"{origin}: shorter than the PAIR header")
    magic, k = _PAIR_HEADER.unpack_from(buf, 0)
    if magic != PAIR_MAGIC:
        raise FormatError(f"{origin}: bad magic {magic!r}")
    rbm_subject, pos = rbm_from_bytes(buf, _PAIR_HEADER.size, origin)
    rbm_scene, pos = rbm_from_bytes(buf, pos, origin)
    if pos != len(buf):
        raise FormatError(f"{origin}: {len(buf) - pos} trailing bytes")
    if rbm_subject.n_hidden != k or rbm_scene.n_hidden != k:
        raise FormatError(f"{origin}: block unit counts disagree with header K={k}")
    return PairedModel(rbm_subject=rbm_subject, rbm_scene=rbm_scene)
