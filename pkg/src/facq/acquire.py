"""Greedy acquisition criterion and session state machine.

An unknown feature's score is the sum over its bits of the predictor's
absolute output sensitivity times the frozen autoencoder's bit probability,
divided by the acquisition cost.  Grouped features (e.g. one-hot expansions
of a categorical source column) are acquired atomically at the group cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import codec, nn
from .data import CostSchedule
from .model import ModelBundle, reconstruct_probabilities


class NoUnknownFeatures(RuntimeError):
    pass


class AcquisitionError(ValueError):
    pass


@dataclass(frozen=True)
class AcquisitionUnit:
    """One acquirable thing: a lone feature or a whole group."""
    uid: str
    members: tuple[int, ...]
    cost: float


def acquisition_units(costs: CostSchedule,
                      feature_names: list[str]) -> list[AcquisitionUnit]:
    """Groups plus singleton units for every ungrouped feature, in id order."""
    units = []
    grouped = set()
    for g in costs.groups:
        units.append(AcquisitionUnit(g.gid, g.members, g.cost))
        grouped.update(g.members)
    for i in range(costs.d):
        if i not in grouped:
            units.append(AcquisitionUnit(feature_names[i], (i,),
                                         float(costs.feature_costs[i])))
    order = {}
    for u in units:
        order[u.uid] = min(u.members)
    units.sort(key=lambda u: order[u.uid])
    return units


@dataclass
class AcquisitionScore:
    uid: str
    numerator: float
    cost: float

    @property
    def score(self) -> float:
        return self.numerator / self.cost


@dataclass
class StoppingRule:
    kind: str                   # budget | confidence | exhaustion | accuracy_fraction
    threshold: float | None = None

    def __post_init__(self):
        if self.kind not in ("budget", "confidence", "exhaustion",
                             "accuracy_fraction"):
            raise ValueError(f"unknown stopping rule {self.kind!r}")
        if self.kind == "budget" and (self.threshold is None or self.threshold < 0):
            raise ValueError("budget threshold must be >= 0")
        if self.kind in ("confidence", "accuracy_fraction") and not (
                self.threshold is not None and 0 <= self.threshold <= 1):
            raise ValueError(f"{self.kind} threshold must lie in [0, 1]")


@dataclass
class HistoryEntry:
    t: int
    uid: str
    score: float
    values: dict[int, float]


@dataclass
class AcquisitionSession:
    bundle: ModelBundle
    x: np.ndarray               # current normalized values, unknowns = 0
    known: np.ndarray           # 0/1 mask
    known0: np.ndarray          # initial mask
    total_cost: float = 0.0
    history: list[HistoryEntry] = field(default_factory=list)
    prediction: np.ndarray | None = None
    policy_state: dict = field(default_factory=dict)

    @property
    def t(self) -> int:
        return len(self.history)

    @property
    def units(self) -> list[AcquisitionUnit]:
        return acquisition_units(self.bundle.costs, self.bundle.feature_names)

    def unknown_units(self) -> list[AcquisitionUnit]:
        return [u for u in self.units
                if not all(self.known[m] for m in u.members)]

    def refresh_prediction(self) -> np.ndarray:
        self.prediction = self.bundle.predict(self.x, self.known)
        return self.prediction


def new_session(bundle: ModelBundle,
                initial: dict[int, float] | None = None) -> AcquisitionSession:
    """Fresh session; ``initial`` maps feature index -> normalized value."""
    d = bundle.architecture.d
    x = np.zeros(d)
    known = np.zeros(d)
    for i, v in (initial or {}).items():
        if not 0 <= i < d:
            raise AcquisitionError(f"feature index {i} out of range")
        if not 0.0 <= v <= codec.max_representable(bundle.architecture.bits):
            raise AcquisitionError(f"value {v} outside normalized range")
        x[i], known[i] = v, 1.0
    s = AcquisitionSession(bundle, x, known, known.copy())
    s.refresh_prediction()
    return s


def score_features(bundle: ModelBundle,
                   session: AcquisitionSession) -> list[AcquisitionScore]:
    """Scores for every unknown unit at the current context."""
    unknown = session.unknown_units()
    if not unknown:
        raise NoUnknownFeatures("all features are known")
    numer = feature_numerators(bundle, session.x, session.known)
    return [AcquisitionScore(u.uid, float(sum(numer[m] for m in u.members)),
                             u.cost) for u in unknown]


def feature_numerators(bundle: ModelBundle, x: np.ndarray,
                       known: np.ndarray) -> np.ndarray:
    """Per-feature sum over bits of |d prediction / d bit| * bit probability.

    Works batched: x, known of shape (..., d) -> numerators (..., d).
    """
    l = bundle.architecture.bits
    bits = codec.flatten_bits(codec.quantize(x, known, l))
    probs = bundle.autoencoder_frozen.predict(bits)
    sens = nn.input_sensitivity(bundle.predictor, bits)
    numer = codec.unflatten_bits(sens * probs, bundle.architecture.d, l)
    return numer.sum(axis=-1)


def select_next(scores: list[AcquisitionScore]) -> str:
    """Maximal score; exact ties break to the unit listed first."""
    if not scores:
        raise NoUnknownFeatures("empty score list")
    best = max(range(len(scores)), key=lambda i: (scores[i].score, -i))
    return scores[best].uid


def acquire(session: AcquisitionSession, uid: str,
            values: dict[int, float] | float,
            score: float = float("nan")) -> AcquisitionSession:
    """Reveal one unit: exactly its members flip to known, cost accrues."""
    unit = next((u for u in session.units if u.uid == uid), None)
    if unit is None:
        raise AcquisitionError(f"unknown unit id {uid!r}")
    if all(session.known[m] for m in unit.members):
        raise AcquisitionError(f"unit {uid!r} already acquired")
    if not isinstance(values, dict):
        if len(unit.members) != 1:
            raise AcquisitionError(f"unit {uid!r} needs all member values")
        values = {unit.members[0]: float(values)}
    if set(values) != set(unit.members):
        raise AcquisitionError(
            f"unit {uid!r} expects values for members {sorted(unit.members)}")
    hi = codec.max_representable(session.bundle.architecture.bits)
    for m, v in values.items():
        if not 0.0 <= v <= hi:
            raise AcquisitionError(f"value {v} for feature {m} out of range")
        session.x[m] = v
        session.known[m] = 1.0
    session.total_cost += unit.cost
    session.history.append(HistoryEntry(session.t, uid, score, dict(values)))
    session.refresh_prediction()
    return session


class InstanceOracle:
    """Reveals true (normalized) feature values of one instance."""

    def __init__(self, x_true: np.ndarray, label: int):
        self.x_true = np.asarray(x_true, dtype=np.float64)
        self.label = int(label)

    def reveal(self, members: tuple[int, ...]) -> dict[int, float]:
        return {m: float(self.x_true[m]) for m in members}


@dataclass
class TrajectoryPoint:
    step: int
    uid: str | None
    score: float
    cost: float
    prediction: np.ndarray
    correct: bool

    @property
    def predicted_class(self) -> int:
        return int(np.argmax(self.prediction))

    @property
    def top_probability(self) -> float:
        return float(np.max(self.prediction))


def _should_stop(session: AcquisitionSession, stopping: StoppingRule) -> bool:
    if stopping.kind == "exhaustion":
        return not session.unknown_units()
    if stopping.kind == "budget":
        # stop once no affordable unit remains
        room = stopping.threshold - session.total_cost
        return not any(u.cost <= room for u in session.unknown_units())
    if stopping.kind == "confidence":
        return (float(np.max(session.prediction)) >= stopping.threshold
                or not session.unknown_units())
    raise ValueError(f"stopping rule {stopping.kind!r} is harness-only")


def run_policy(bundle: ModelBundle, oracle: InstanceOracle,
               stopping: StoppingRule, policy=None,
               initial: dict[int, float] | None = None) -> list[TrajectoryPoint]:
    """Greedy loop score -> select -> acquire until the stopping rule fires.

    ``policy`` defaults to the gradient-sensitivity criterion; any object
    with ``choose(bundle, session) -> (uid, score)`` works.  The returned
    trajectory includes the t=0 point (cost 0, prior prediction).
    """
    if policy is None:
        from .baselines import FactPolicy
        policy = FactPolicy()
    session = new_session(bundle, initial)
    traj = [TrajectoryPoint(0, None, float("nan"), 0.0,
                            session.prediction.copy(),
                            session.prediction.argmax() == oracle.label)]
    while not _should_stop(session, stopping):
        uid, score = policy.choose(bundle, session)
        unit = next(u for u in session.units if u.uid == uid)
        acquire(session, uid, oracle.reveal(unit.members), score)
        traj.append(TrajectoryPoint(session.t, uid, score, session.total_cost,
                                    session.prediction.copy(),
                                    session.prediction.argmax() == oracle.label))
    return traj
