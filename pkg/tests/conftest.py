import pytest

import fieldpf as fp


@pytest.fixture
def cycle8():
    return fp.make_cycle(8)


@pytest.fixture
def path5():
    return fp.make_path(5)


@pytest.fixture
def voter8(cycle8):
    return fp.noisy_voter_model(cycle8, eps_mix=0.3, obs_flip=0.2)


@pytest.fixture
def voter4():
    return fp.noisy_voter_model(fp.make_cycle(4), eps_mix=0.35, obs_flip=0.25)


def random_connected_graph(rng, max_vertices=12):
    """Spanning path plus random extra edges: always connected."""
    n = int(rng.integers(2, max_vertices + 1))
    edges = [(i, i + 1) for i in range(n - 1)]
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.append((int(u), int(v)))
    return fp.build_graph(n, edges)
