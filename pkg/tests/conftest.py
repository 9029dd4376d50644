import numpy as np
import pytest

from facq import nn
from facq.data import SplitSpec, generate_synthesized, split
from facq.model import (ArchitectureSpec, CorruptionConfig, TrainConfig,
                        train_autoencoder, train_predictor)


@pytest.fixture(scope="session")
def small_data():
    """16-feature, 8-cluster synthesized data; small but non-trivial."""
    ds, costs = generate_synthesized(3, n_clusters=8, informative_dim=8,
                                     noise_dim=8, points_per_cluster=150)
    train, val, test = split(ds, SplitSpec(seed=0))
    return ds, costs, train, val, test


@pytest.fixture(scope="session")
def small_bundle(small_data):
    """A real trained bundle on the small dataset (shared, immutable)."""
    ds, costs, train, val, test = small_data
    arch = ArchitectureSpec([16 * 8, 16, 8], [4], 8, 2)
    corr = CorruptionConfig(1.5, 1.5, seed=0)
    tc = TrainConfig(max_epochs=80)
    ae = train_autoencoder(train, val, arch, corr, tc=tc, seed=0)
    return train_predictor(ae, train, val, arch, corr, tc=tc, seed=0,
                           costs=costs, feature_names=ds.feature_names)


def random_net(rng, n_in=None, n_out=None, max_layers=4, max_units=32,
               final="softmax"):
    """Small random network for gradient checks."""
    widths = [n_in or int(rng.integers(2, max_units + 1))]
    for _ in range(int(rng.integers(1, max_layers))):
        widths.append(int(rng.integers(2, max_units + 1)))
    widths.append(n_out or int(rng.integers(2, 6)))
    acts = [str(rng.choice(["relu", "sigmoid", "linear"]))
            for _ in range(len(widths) - 2)] + [final]
    return nn.build_mlp(widths, acts, rng)
