import pytest

from topomon import train_toy, two_moons


@pytest.fixture(scope="session")
def moons_data():
    return two_moons(500, noise=0.1, seed=42)


@pytest.fixture(scope="session")
def moons_result(moons_data):
    """Two-hidden-layer fixture net trained on the two-moons data; shared
    because training it in every test would dominate the suite runtime."""
    return train_toy(
        [2, 64, 64, 2],
        "relu",
        moons_data,
        learning_rate=0.5,
        epochs=300,
        batch_size=32,
        seed=7,
    )


@pytest.fixture(scope="session")
def moons_net(moons_result):
    return moons_result.network
