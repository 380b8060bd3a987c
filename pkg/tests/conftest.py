import time

import pytest

from hri_sim.gestures import ACTIVITY_KINDS, build_dataset
from hri_sim.recognizer import TrainConfig, save_weights, train

CORPUS_SEED = 0
PER_CLASS = 50
NOISE = 0.01
TRAIN_PER_CLASS = 40  # remainder of each class is held out


@pytest.fixture(scope="session")
def full_corpus():
    """The benchmark corpus: 50 windows per class at 0.01 m jitter, split
    40/10 into train and held-out per class."""
    samples = build_dataset(list(ACTIVITY_KINDS), per_class=PER_CLASS,
                            noise_stddev=NOISE, seed=CORPUS_SEED)
    train_set, heldout = [], []
    for ci in range(8):
        cls = [s for s in samples if s[1] == ci]
        train_set.extend(cls[:TRAIN_PER_CLASS])
        heldout.extend(cls[TRAIN_PER_CLASS:])
    return train_set, heldout


@pytest.fixture(scope="session")
def trained_bundle(full_corpus):
    """(net, wall seconds) for the canonical recognizer (default config);
    trained once per session and shared by scenario, CLI, service and
    acceptance tests."""
    train_set, _ = full_corpus
    started = time.time()
    net = train(train_set, TrainConfig())
    return net, time.time() - started


@pytest.fixture(scope="session")
def trained_net(trained_bundle):
    return trained_bundle[0]


@pytest.fixture(scope="session")
def weights_path(trained_net, tmp_path_factory):
    path = tmp_path_factory.mktemp("weights") / "weights.json"
    save_weights(trained_net, path)
    return path
