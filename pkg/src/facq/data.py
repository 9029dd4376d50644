"""Dataset ingestion, normalization, splitting, cost schedules, and the
synthesized clustered benchmark generator."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .codec import DEFAULT_BITS, clamp, max_representable


class DataError(ValueError):
    pass


class EmptySplit(DataError):
    pass


@dataclass
class Dataset:
    name: str
    features: np.ndarray            # (n, d) float64
    targets: np.ndarray             # (n,) int class labels in [0, r)
    feature_names: list[str]
    n_classes: int
    group_map: dict[int, str] | None = None   # feature index -> group id

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def take(self, idx: np.ndarray, name: str | None = None) -> "Dataset":
        return Dataset(name or self.name, self.features[idx], self.targets[idx],
                       self.feature_names, self.n_classes, self.group_map)

    def with_features(self, feats: np.ndarray) -> "Dataset":
        return Dataset(self.name, feats, self.targets, self.feature_names,
                       self.n_classes, self.group_map)


@dataclass
class NormalizationSpec:
    minimum: np.ndarray             # per-feature min
    maximum: np.ndarray             # per-feature max
    computed_on: str = "train"
    bits: int = DEFAULT_BITS

    def __post_init__(self):
        if np.any(self.minimum > self.maximum):
            raise DataError("per-feature min must not exceed max")

    def apply(self, values: np.ndarray) -> np.ndarray:
        """(v - min) / (max - min), clamped to [0, 1 - 2**-l].

        Constant features (max == min) map to 0.
        """
        values = np.asarray(values, dtype=np.float64)
        span = self.maximum - self.minimum
        safe = np.where(span > 0, span, 1.0)
        out = (values - self.minimum) / safe
        out = np.where(span > 0, out, 0.0)
        return clamp(out, self.bits)

    def apply_one(self, feature_index: int, value: float) -> float:
        lo, hi = self.minimum[feature_index], self.maximum[feature_index]
        if hi <= lo:
            return 0.0
        return float(np.clip((value - lo) / (hi - lo), 0.0,
                             max_representable(self.bits)))

    def to_dict(self) -> dict:
        return {"minimum": self.minimum.tolist(), "maximum": self.maximum.tolist(),
                "computed_on": self.computed_on, "bits": self.bits}

    @classmethod
    def from_dict(cls, doc: dict) -> "NormalizationSpec":
        return cls(np.array(doc["minimum"], dtype=np.float64),
                   np.array(doc["maximum"], dtype=np.float64),
                   doc.get("computed_on", "train"), doc.get("bits", DEFAULT_BITS))


@dataclass(frozen=True)
class FeatureGroup:
    gid: str
    cost: float
    members: tuple[int, ...]        # feature indices


@dataclass
class CostSchedule:
    feature_costs: np.ndarray       # (d,) > 0; used for ungrouped features
    groups: list[FeatureGroup] = field(default_factory=list)

    def __post_init__(self):
        self.feature_costs = np.asarray(self.feature_costs, dtype=np.float64)
        if np.any(self.feature_costs <= 0):
            raise DataError("every feature cost must be positive")
        for g in self.groups:
            if g.cost <= 0:
                raise DataError(f"group {g.gid!r} cost must be positive")
        grouped = [m for g in self.groups for m in g.members]
        if len(grouped) != len(set(grouped)):
            raise DataError("groups must be disjoint")

    @property
    def d(self) -> int:
        return len(self.feature_costs)

    def scaled(self, factor: float) -> "CostSchedule":
        return CostSchedule(self.feature_costs * factor,
                            [FeatureGroup(g.gid, g.cost * factor, g.members)
                             for g in self.groups])

    def to_dict(self, feature_names: list[str]) -> dict:
        return {
            "costs": {feature_names[i]: float(c)
                      for i, c in enumerate(self.feature_costs)},
            "groups": [{"id": g.gid, "cost": g.cost,
                        "members": [feature_names[m] for m in g.members]}
                       for g in self.groups],
        }


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.15
    validation_fraction: float = 0.15
    seed: int = 0

    def __post_init__(self):
        ok = (0 < self.test_fraction < 1 and 0 < self.validation_fraction < 1
              and self.test_fraction + self.validation_fraction < 1)
        if not ok:
            raise DataError("split fractions must lie in (0,1) and sum below 1")


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Seed-deterministic shuffled partition into (train, validation, test)."""
    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(ds.n)
    n_test = int(round(ds.n * spec.test_fraction))
    n_val = int(round(ds.n * spec.validation_fraction))
    n_train = ds.n - n_test - n_val
    if min(n_test, n_val, n_train) <= 0:
        raise EmptySplit(f"n={ds.n} with fractions {spec} yields an empty split")
    test = ds.take(perm[:n_test], ds.name + "/test")
    val = ds.take(perm[n_test:n_test + n_val], ds.name + "/validation")
    train = ds.take(perm[n_test + n_val:], ds.name + "/train")
    return train, val, test


def fit_normalization(source: Dataset, computed_on: str = "train",
                      bits: int = DEFAULT_BITS) -> NormalizationSpec:
    if source.n == 0:
        raise EmptySplit("cannot fit normalization on an empty split")
    return NormalizationSpec(source.features.min(axis=0),
                             source.features.max(axis=0), computed_on, bits)


def normalize(ds: Dataset, spec: NormalizationSpec) -> Dataset:
    return ds.with_features(spec.apply(ds.features))


# ---------------------------------------------------------------------------
# CSV + manifest ingestion

def load_manifest(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    doc.setdefault("costs", {})
    doc.setdefault("groups", [])
    doc.setdefault("categorical", [])
    return doc


def load_csv(path: str | Path, target_column: str,
             group_manifest: str | Path | None = None,
             name: str | None = None) -> tuple[Dataset, CostSchedule]:
    """Parse a headered CSV into a raw (unnormalized) Dataset plus costs.

    The manifest may declare categorical columns (one-hot expanded; the
    expanded columns share one group id per source column), per-feature
    costs, and explicit groups.  Costs default to 1.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    manifest = load_manifest(group_manifest) if group_manifest else {
        "costs": {}, "groups": [], "categorical": []}

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError("empty CSV")
        rows = [r for r in reader if r]
    if target_column not in header:
        raise DataError(f"unknown target column {target_column!r}")
    tcol = header.index(target_column)
    feat_cols = [c for i, c in enumerate(header) if i != tcol]

    for col in manifest["categorical"]:
        if col not in feat_cols:
            raise DataError(f"manifest categorical column {col!r} not in CSV")
    for g in manifest["groups"]:
        for m in g["members"]:
            if m not in feat_cols and m not in manifest["categorical"]:
                raise DataError(f"manifest group member {m!r} not in CSV")

    cat = set(manifest["categorical"])
    raw_cols: dict[str, list[str]] = {c: [] for c in feat_cols}
    raw_targets: list[str] = []
    for r in rows:
        if len(r) != len(header):
            raise DataError(f"row has {len(r)} cells, expected {len(header)}")
        raw_targets.append(r[tcol])
        for i, c in enumerate(header):
            if i != tcol:
                raw_cols[c].append(r[i])

    # target labels: accept integers or arbitrary strings (sorted order)
    labels = sorted(set(raw_targets))
    try:
        lab_ids = {s: int(s) for s in labels}
        if sorted(lab_ids.values()) != list(range(len(labels))):
            raise ValueError
    except ValueError:
        lab_ids = {s: i for i, s in enumerate(labels)}
    targets = np.array([lab_ids[s] for s in raw_targets], dtype=np.int64)

    feature_names: list[str] = []
    columns: list[np.ndarray] = []
    group_of: dict[str, str] = {}       # expanded-name -> group id
    for c in feat_cols:
        if c in cat:
            values = sorted(set(raw_cols[c]))
            for v in values:
                feature_names.append(f"{c}={v}")
                columns.append(np.array([1.0 if x == v else 0.0
                                         for x in raw_cols[c]]))
                group_of[f"{c}={v}"] = c
        else:
            try:
                columns.append(np.array([float(x) for x in raw_cols[c]]))
            except ValueError as e:
                raise DataError(f"non-numeric cell in column {c!r}: {e}") from e
            feature_names.append(c)

    features = np.column_stack(columns) if columns else np.empty((len(rows), 0))
    name_to_idx = {nm: i for i, nm in enumerate(feature_names)}

    costs = np.ones(len(feature_names))
    for nm, cval in manifest["costs"].items():
        if nm in name_to_idx:
            costs[name_to_idx[nm]] = float(cval)
        elif nm in cat:
            pass        # categorical source cost handled via its group below
        else:
            raise DataError(f"manifest cost for unknown feature {nm!r}")

    groups: list[FeatureGroup] = []
    explicit_members: set[str] = set()
    for g in manifest["groups"]:
        members = []
        for m in g["members"]:
            if m in cat:
                members += [nm for nm in feature_names if group_of.get(nm) == m]
            else:
                members.append(m)
        idxs = tuple(name_to_idx[m] for m in members)
        groups.append(FeatureGroup(str(g["id"]), float(g["cost"]), idxs))
        explicit_members.update(members)
    # categorical columns not covered by an explicit group become their own group
    for c in sorted(cat):
        members = [nm for nm in feature_names if group_of.get(nm) == c]
        if members and not (set(members) & explicit_members):
            gcost = float(manifest["costs"].get(c, 1.0))
            groups.append(FeatureGroup(c, gcost,
                                       tuple(name_to_idx[m] for m in members)))

    group_map = {name_to_idx[m]: g.gid for g in groups
                 for m in (feature_names[i] for i in g.members)}
    ds = Dataset(name or path.stem, features, targets, feature_names,
                 int(targets.max()) + 1 if len(targets) else 0,
                 group_map or None)
    return ds, CostSchedule(costs, groups)


# ---------------------------------------------------------------------------
# synthesized benchmark

def generate_synthesized(seed: int, n_clusters: int = 16,
                         informative_dim: int = 32, noise_dim: int = 32,
                         points_per_cluster: int = 1000,
                         n_classes: int = 2) -> tuple[Dataset, CostSchedule]:
    """Clustered two-class data plus pure-noise columns, normalized to [0,1].

    Cluster centers are standard normal; points add zero-mean normal noise
    with variance 0.25; each cluster flips a fair coin for its class; the
    appended noise columns are standard normal with no predictive value.
    Costs ramp 1..informative_dim then 1..noise_dim.
    """
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 1.0, size=(n_clusters, informative_dim))
    cluster_class = rng.integers(0, n_classes, size=n_clusters)
    n = n_clusters * points_per_cluster
    feats = np.repeat(centers, points_per_cluster, axis=0)
    feats = feats + rng.normal(0.0, np.sqrt(0.25), size=feats.shape)
    targets = np.repeat(cluster_class, points_per_cluster)
    noise = rng.normal(0.0, 1.0, size=(n, noise_dim))
    features = np.hstack([feats, noise])

    names = ([f"sig_{i:02d}" for i in range(informative_dim)]
             + [f"rnd_{i:02d}" for i in range(noise_dim)])
    ds = Dataset("synthesized", features, targets.astype(np.int64), names,
                 n_classes)
    spec = fit_normalization(ds, computed_on="all")
    ds = normalize(ds, spec)
    costs = np.concatenate([np.arange(1, informative_dim + 1),
                            np.arange(1, noise_dim + 1)]).astype(np.float64)
    return ds, CostSchedule(costs)
