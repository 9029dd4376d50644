"""Acquisition policies: the gradient-sensitivity criterion, uniform random
order, static mutual-information order, and the exhaustive substitution
oracle it approximates.

Every policy exposes ``choose(bundle, session)`` for single-session use and
a batched path (``start_batch`` / ``select_batch``) for the simulation
harness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import codec
from .acquire import (AcquisitionSession, AcquisitionUnit, NoUnknownFeatures,
                      feature_numerators, score_features, select_next)
from .data import CostSchedule, Dataset
from .model import ModelBundle


def _unit_costs(units: list[AcquisitionUnit]) -> np.ndarray:
    return np.array([u.cost for u in units])


def _argmax_unacquired(score: np.ndarray, acquired: np.ndarray) -> np.ndarray:
    """Row-wise argmax over unacquired units; ties go to the lowest index."""
    masked = np.where(acquired, -np.inf, score)
    if np.any(np.all(acquired, axis=1)):
        raise NoUnknownFeatures("some instance has nothing left to acquire")
    return masked.argmax(axis=1)


class FactPolicy:
    """Bit sensitivity x bit probability / cost, maximized greedily."""

    name = "fact"
    stochastic = False

    def choose(self, bundle: ModelBundle, session: AcquisitionSession):
        scores = score_features(bundle, session)
        uid = select_next(scores)
        return uid, next(s.score for s in scores if s.uid == uid)

    def start_batch(self, n, units, rng):
        return None

    def select_batch(self, bundle, units, X, K, acquired, state):
        numer = feature_numerators(bundle, X, K)
        score = np.stack([numer[:, u.members].sum(axis=1) / u.cost
                          for u in units], axis=1)
        return _argmax_unacquired(score, acquired)


class RandomPolicy:
    """Uniformly random acquisition order, seed-deterministic."""

    name = "random"
    stochastic = True

    def __init__(self, seed: int = 0):
        self.seed = seed

    def _priorities(self, session: AcquisitionSession) -> np.ndarray:
        if "rand_prio" not in session.policy_state:
            rng = np.random.default_rng(self.seed)
            session.policy_state["rand_prio"] = rng.random(len(session.units))
        return session.policy_state["rand_prio"]

    def choose(self, bundle, session):
        prio = self._priorities(session)
        units = session.units
        unknown = {u.uid for u in session.unknown_units()}
        if not unknown:
            raise NoUnknownFeatures("all features known")
        best = max((i for i, u in enumerate(units) if u.uid in unknown),
                   key=lambda i: prio[i])
        return units[best].uid, float(prio[best])

    def start_batch(self, n, units, rng):
        local = rng if rng is not None else np.random.default_rng(self.seed)
        return {"prio": local.random((n, len(units)))}

    def select_batch(self, bundle, units, X, K, acquired, state):
        return _argmax_unacquired(state["prio"], acquired)


@dataclass
class StaticOrder:
    """Context-independent ranking of acquirable units."""
    uids: list[str]
    mi: list[float]                 # nats, aligned with uids
    costs: list[float]

    def rows(self):
        for rank, (uid, mi, cost) in enumerate(zip(self.uids, self.mi,
                                                   self.costs), start=1):
            yield rank, uid, mi, cost


def mutual_information(x: np.ndarray, y: np.ndarray, bins: int = 10) -> float:
    """Plug-in MI (nats) between a feature discretized into equal-frequency
    bins and integer labels."""
    qs = np.quantile(x, np.linspace(0, 1, bins + 1)[1:-1])
    edges = np.unique(qs)
    if len(edges) == 0:
        return 0.0      # degenerate single-bin feature
    xb = np.digitize(x, edges)
    joint = np.zeros((xb.max() + 1, int(y.max()) + 1))
    np.add.at(joint, (xb, y), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    return float((joint[nz] * np.log(joint[nz] / (px @ py)[nz])).sum())


def static_mi_order(train: Dataset, costs: CostSchedule,
                    units: list[AcquisitionUnit] | None = None) -> StaticOrder:
    """Rank units by label MI (max over group members), descending.

    With non-uniform costs the ranking key is MI / cost, mirroring the
    dynamic criterion's quotient.
    """
    from .acquire import acquisition_units
    units = units or acquisition_units(costs, train.feature_names)
    mis = [max(mutual_information(train.features[:, m], train.targets)
               for m in u.members) for u in units]
    ucosts = _unit_costs(units)
    key = np.array(mis) / ucosts if len(set(ucosts.tolist())) > 1 else np.array(mis)
    order = sorted(range(len(units)), key=lambda i: (-key[i], min(units[i].members)))
    return StaticOrder([units[i].uid for i in order],
                       [mis[i] for i in order],
                       [float(ucosts[i]) for i in order])


class StaticOrderPolicy:
    name = "static"
    stochastic = False

    def __init__(self, order: StaticOrder):
        self.order = order
        self._rank = {uid: i for i, uid in enumerate(order.uids)}

    def choose(self, bundle, session):
        unknown = session.unknown_units()
        if not unknown:
            raise NoUnknownFeatures("all features known")
        best = min(unknown, key=lambda u: self._rank[u.uid])
        return best.uid, -float(self._rank[best.uid])

    def start_batch(self, n, units, rng):
        prio = np.array([-self._rank[u.uid] for u in units], dtype=np.float64)
        return {"prio": np.broadcast_to(prio, (n, len(units)))}

    def select_batch(self, bundle, units, X, K, acquired, state):
        return _argmax_unacquired(state["prio"], acquired)


@dataclass
class HistogramModel:
    """Per-feature 5-bin marginal histograms fitted on the train split."""
    edges: np.ndarray               # (bins+1,) shared equal-width edges on [0,1]
    probs: np.ndarray               # (d, bins)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @classmethod
    def fit(cls, train: Dataset, bins: int = 5) -> "HistogramModel":
        edges = np.linspace(0.0, 1.0, bins + 1)
        probs = np.empty((train.d, bins))
        for j in range(train.d):
            counts, _ = np.histogram(train.features[:, j], bins=edges)
            total = counts.sum()
            probs[j] = counts / total if total else np.full(bins, 1.0 / bins)
        return cls(edges, probs)


class ExhaustivePolicy:
    """Substitution oracle: score each unknown feature by the expected L1
    change in class probabilities over its histogram bin centers.

    One forward pass per (feature, bin); far slower than the gradient
    criterion but independent of it.
    """

    name = "exhaustive"
    stochastic = False

    def __init__(self, histograms: HistogramModel):
        self.hist = histograms

    def _utilities(self, bundle: ModelBundle, X: np.ndarray, K: np.ndarray,
                   units: list[AcquisitionUnit]) -> np.ndarray:
        X = np.atleast_2d(X)
        K = np.atleast_2d(K)
        y0 = bundle.predict(X, K)
        centers = self.hist.centers
        hi = codec.max_representable(bundle.architecture.bits)
        util = np.zeros((X.shape[0], len(units)))
        for ui, u in enumerate(units):
            for m in u.members:
                for b, c in enumerate(centers):
                    Xm = X.copy()
                    Km = K.copy()
                    Xm[:, m] = min(c, hi)
                    Km[:, m] = 1.0
                    diff = np.abs(bundle.predict(Xm, Km) - y0).sum(axis=1)
                    util[:, ui] += self.hist.probs[m, b] * diff
        return util

    def choose(self, bundle, session):
        unknown = session.unknown_units()
        if not unknown:
            raise NoUnknownFeatures("all features known")
        util = self._utilities(bundle, session.x, session.known, unknown)[0]
        score = util / _unit_costs(unknown)
        best = int(max(range(len(unknown)), key=lambda i: (score[i], -i)))
        return unknown[best].uid, float(score[best])

    def start_batch(self, n, units, rng):
        return None

    def select_batch(self, bundle, units, X, K, acquired, state):
        util = self._utilities(bundle, X, K, units)
        score = util / _unit_costs(units)
        return _argmax_unacquired(score, acquired)


def make_policy(name: str, bundle: ModelBundle | None = None,
                train: Dataset | None = None, seed: int = 0):
    """Policy factory for the CLI policy list."""
    if name == "fact":
        return FactPolicy()
    if name == "random":
        return RandomPolicy(seed)
    if name == "static":
        if train is None or bundle is None:
            raise ValueError("static policy needs the train split and bundle")
        return StaticOrderPolicy(static_mi_order(train, bundle.costs))
    if name == "exhaustive":
        if train is None:
            raise ValueError("exhaustive policy needs the train split")
        return ExhaustivePolicy(HistogramModel.fit(train))
    raise ValueError(f"unknown policy {name!r}")
