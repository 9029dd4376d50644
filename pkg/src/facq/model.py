"""Training of the full system: denoising autoencoder over the binary
representation, a frozen copy for bit-probability estimation, and a
predictor fine-tuned on top of the encoder with dual learning rates."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import codec, nn
from .data import CostSchedule, Dataset, FeatureGroup, NormalizationSpec


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class ArchitectureSpec:
    encoder: list[int]              # widths, first = d * bits
    predictor: list[int]            # hidden widths before the class layer
    bits: int = codec.DEFAULT_BITS
    n_classes: int = 2

    def __post_init__(self):
        if any(w < 1 for w in self.encoder + self.predictor):
            raise ValueError("all layer widths must be >= 1")
        if self.encoder[0] % self.bits:
            raise ValueError("encoder input width must be d * bits")

    @property
    def d(self) -> int:
        return self.encoder[0] // self.bits

    def to_dict(self) -> dict:
        return {"encoder": self.encoder, "predictor": self.predictor,
                "bits": self.bits, "n_classes": self.n_classes}

    @classmethod
    def from_dict(cls, doc: dict) -> "ArchitectureSpec":
        return cls(list(doc["encoder"]), list(doc["predictor"]),
                   doc.get("bits", codec.DEFAULT_BITS), doc["n_classes"])


@dataclass
class CorruptionConfig:
    alpha: float = 1.5
    beta: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "seed": self.seed}


@dataclass
class TrainConfig:
    batch_size: int = 128
    max_epochs: int = 200
    patience: int = 10
    # validation accuracy can sit at the base rate for tens of epochs before
    # the class structure breaks through; give fine-tuning a longer fuse
    predictor_patience: int = 40


def beta_corrupt(X: np.ndarray, known0: np.ndarray | None,
                 cfg: CorruptionConfig,
                 rng: np.random.Generator) -> np.ndarray:
    """Training-time missingness masks for a batch.

    Each instance draws a missing probability p ~ Beta(alpha, beta), then
    each feature independently goes unknown with probability p.  Features
    already unknown in ``known0`` stay unknown.
    """
    X = np.atleast_2d(X)
    n, d = X.shape
    p = rng.beta(cfg.alpha, cfg.beta, size=(n, 1))
    known = (rng.random((n, d)) >= p).astype(np.float64)
    if known0 is not None:
        known = known * np.atleast_2d(known0)
    return known


def build_autoencoder(arch: ArchitectureSpec, rng: np.random.Generator) -> nn.Network:
    """Encoder widths, then decoder widths reversed; sigmoid reconstruction."""
    widths = arch.encoder + arch.encoder[-2::-1]
    acts = ["relu"] * (len(widths) - 2) + ["sigmoid"]
    return nn.build_mlp(widths, acts, rng)


def encoder_depth(arch: ArchitectureSpec) -> int:
    return len(arch.encoder) - 1


def build_predictor(ae: nn.Network, arch: ArchitectureSpec,
                    rng: np.random.Generator,
                    encoder_lr_scale: float = 0.1) -> nn.Network:
    """Copy the trained encoder and stack fresh prediction layers on top.

    Encoder layers carry a reduced learning-rate multiplier so fine-tuning
    moves them an order of magnitude slower than the new layers.
    """
    enc_layers = [ae.layers[i].copy() for i in range(encoder_depth(arch))]
    for ly in enc_layers:
        ly.lr_scale = encoder_lr_scale
    widths = [arch.encoder[-1]] + arch.predictor + [arch.n_classes]
    acts = ["relu"] * len(arch.predictor) + ["softmax"]
    head = nn.build_mlp(widths, acts, rng)
    return nn.Network(enc_layers + head.layers)


@dataclass
class ModelBundle:
    autoencoder_frozen: nn.Network
    predictor: nn.Network
    architecture: ArchitectureSpec
    normalization: NormalizationSpec
    costs: CostSchedule
    corruption: CorruptionConfig
    feature_names: list[str] = field(default_factory=list)
    dataset_fingerprint: str = ""

    def predict(self, x: np.ndarray, known: np.ndarray) -> np.ndarray:
        """Class probabilities from the masked, quantized input."""
        bits = codec.quantize(x, known, self.architecture.bits)
        return self.predictor.predict(codec.flatten_bits(bits))


def reconstruct_probabilities(bundle: ModelBundle, x: np.ndarray,
                              known: np.ndarray) -> np.ndarray:
    """Per-bit set probabilities from the frozen autoencoder; (..., d, l)."""
    l = bundle.architecture.bits
    bits = codec.quantize(x, known, l)
    out = bundle.autoencoder_frozen.predict(codec.flatten_bits(bits))
    return codec.unflatten_bits(out, bundle.architecture.d, l)


# ---------------------------------------------------------------------------
# training loops

def _epoch_log(log, epoch, train_loss, val_metric, best):
    if log is not None:
        log.append({"epoch": epoch, "train_loss": train_loss,
                    "val_metric": val_metric, "best_val_metric": best})


def train_autoencoder(train: Dataset, validation: Dataset,
                      arch: ArchitectureSpec, corruption: CorruptionConfig,
                      opt: nn.OptimizerConfig | None = None,
                      tc: TrainConfig | None = None,
                      seed: int = 0, log: list | None = None) -> nn.Network:
    """Denoising training against the bit encoding of the complete vectors.

    Early-stops on a fixed corrupted validation set; returns the
    best-validation snapshot.
    """
    opt = opt or nn.OptimizerConfig()
    tc = tc or TrainConfig()
    l = arch.bits
    rng = np.random.default_rng(seed)
    net = build_autoencoder(arch, rng)
    state = nn.AdamState(net)

    Xtr = train.features
    target_bits_tr = codec.flatten_bits(codec.quantize(Xtr, None, l))
    val_rng = np.random.default_rng(corruption.seed + 1)
    val_known = beta_corrupt(validation.features, None, corruption, val_rng)
    val_in = codec.flatten_bits(codec.quantize(validation.features, val_known, l))
    val_target = codec.flatten_bits(codec.quantize(validation.features, None, l))

    corrupt_rng = np.random.default_rng(corruption.seed)
    best_loss, best_net, best_age, step = np.inf, net.copy(), 0, 0
    for epoch in range(tc.max_epochs):
        order = rng.permutation(train.n)
        running = 0.0
        for lo in range(0, train.n, tc.batch_size):
            idx = order[lo:lo + tc.batch_size]
            xb = Xtr[idx]
            known = beta_corrupt(xb, None, corruption, corrupt_rng)
            inp = codec.flatten_bits(codec.quantize(xb, known, l))
            target = target_bits_tr[idx]
            out, cache = net.forward(inp)
            loss = nn.weighted_bit_xent(target, out, l)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"autoencoder loss non-finite at epoch {epoch}")
            G = nn.weighted_bit_xent_logit_grad(target, out, l)
            grads = nn.backward(net, cache, G, from_logits=True)
            step += 1
            nn.adam_step(net, grads, opt, state, step)
            running += loss * len(idx)
        val_loss = nn.weighted_bit_xent(val_target, net.predict(val_in), l)
        if val_loss < best_loss:
            best_loss, best_net, best_age = val_loss, net.copy(), 0
        else:
            best_age += 1
        _epoch_log(log, epoch, running / train.n, val_loss, best_loss)
        if best_age >= tc.patience:
            break
    return best_net


def train_predictor(ae: nn.Network, train: Dataset, validation: Dataset,
                    arch: ArchitectureSpec, corruption: CorruptionConfig,
                    opt: nn.OptimizerConfig | None = None,
                    tc: TrainConfig | None = None,
                    seed: int = 0, log: list | None = None,
                    normalization: NormalizationSpec | None = None,
                    costs: CostSchedule | None = None,
                    feature_names: list[str] | None = None,
                    dataset_fingerprint: str = "") -> ModelBundle:
    """Fine-tune encoder + fresh class layers on beta-corrupted inputs.

    The supplied autoencoder is deep-copied and frozen; the predictor gets
    its own copy of the encoder weights.  Early-stops on validation
    accuracy under the same corruption protocol.
    """
    opt = opt or nn.OptimizerConfig()
    tc = tc or TrainConfig()
    l = arch.bits
    rng = np.random.default_rng(seed + 1)
    frozen = ae.copy()
    net = build_predictor(frozen, arch, rng)
    state = nn.AdamState(net)

    Xtr, ytr = train.features, train.targets
    val_rng = np.random.default_rng(corruption.seed + 2)
    val_known = beta_corrupt(validation.features, None, corruption, val_rng)
    val_in = codec.flatten_bits(codec.quantize(validation.features, val_known, l))
    yval = validation.targets

    corrupt_rng = np.random.default_rng(corruption.seed + 3)
    best_acc, best_net, best_age, step = -np.inf, net.copy(), 0, 0
    for epoch in range(tc.max_epochs):
        order = rng.permutation(train.n)
        running = 0.0
        for lo in range(0, train.n, tc.batch_size):
            idx = order[lo:lo + tc.batch_size]
            xb = Xtr[idx]
            known = beta_corrupt(xb, None, corruption, corrupt_rng)
            inp = codec.flatten_bits(codec.quantize(xb, known, l))
            out, cache = net.forward(inp)
            logits = cache.inputs[-1] @ net.layers[-1].W + net.layers[-1].b
            loss, G = nn.softmax_xent(logits, ytr[idx])
            if not np.isfinite(loss):
                raise TrainingDiverged(f"predictor loss non-finite at epoch {epoch}")
            grads = nn.backward(net, cache, G, from_logits=True)
            step += 1
            nn.adam_step(net, grads, opt, state, step)
            running += loss * len(idx)
        val_pred = net.predict(val_in).argmax(axis=1)
        val_acc = float((val_pred == yval).mean())
        if val_acc > best_acc:
            best_acc, best_net, best_age = val_acc, net.copy(), 0
        else:
            best_age += 1
        _epoch_log(log, epoch, running / train.n, val_acc, best_acc)
        if best_age >= tc.predictor_patience:
            break

    d = arch.d
    norm = normalization if normalization is not None else NormalizationSpec(
        np.zeros(d), np.ones(d))
    sched = costs if costs is not None else CostSchedule(np.ones(d))
    names = feature_names if feature_names is not None else train.feature_names
    return ModelBundle(frozen, best_net, arch, norm, sched, corruption,
                       list(names), dataset_fingerprint)


def denoising_percentage(bundle: ModelBundle, test: Dataset,
                         eval_seed: int = 1234) -> float:
    """Mean relative reduction in distance to the complete vectors.

    100 * (||x - x_full|| - ||x' - x_full||) / ||x - x_full|| per instance,
    with x the corrupted input (unknowns zero) and x' the decoded
    reconstruction; instances with x == x_full are skipped.
    """
    l = bundle.architecture.bits
    rng = np.random.default_rng(eval_seed)
    known = beta_corrupt(test.features, None, bundle.corruption, rng)
    x_full = codec.clamp(test.features, l)
    x = x_full * known
    recon = reconstruct_probabilities(bundle, test.features, known)
    x_hat = codec.dequantize(recon)
    base = np.linalg.norm(x - x_full, axis=1)
    keep = base > 0
    if not keep.any():
        raise ValueError("no corrupted instances to evaluate")
    improved = np.linalg.norm(x_hat - x_full, axis=1)
    return float((100.0 * (base[keep] - improved[keep]) / base[keep]).mean())


def dataset_fingerprint(ds: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.features).tobytes())
    h.update(np.ascontiguousarray(ds.targets).tobytes())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# bundle checkpointing: two model files + a manifest

def save_bundle(bundle: ModelBundle, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    nn.save_network(bundle.autoencoder_frozen, out / "autoencoder.json")
    nn.save_network(bundle.predictor, out / "predictor.json")
    manifest = {
        "version": 1,
        "architecture": bundle.architecture.to_dict(),
        "normalization": bundle.normalization.to_dict(),
        "corruption": bundle.corruption.to_dict(),
        "costs": bundle.costs.to_dict(bundle.feature_names),
        "feature_names": bundle.feature_names,
        "dataset_fingerprint": bundle.dataset_fingerprint,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return out


def load_bundle(path: str | Path) -> ModelBundle:
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    arch = ArchitectureSpec.from_dict(manifest["architecture"])
    names = manifest["feature_names"]
    idx = {nm: i for i, nm in enumerate(names)}
    cdoc = manifest["costs"]
    costs = CostSchedule(
        np.array([cdoc["costs"][nm] for nm in names]),
        [FeatureGroup(g["id"], g["cost"], tuple(idx[m] for m in g["members"]))
         for g in cdoc["groups"]])
    return ModelBundle(
        nn.load_network(path / "autoencoder.json"),
        nn.load_network(path / "predictor.json"),
        arch,
        NormalizationSpec.from_dict(manifest["normalization"]),
        costs,
        CorruptionConfig(**manifest["corruption"]),
        names,
        manifest.get("dataset_fingerprint", ""),
    )
