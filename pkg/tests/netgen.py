"""Seeded random networks and partitions for property tests."""

import numpy as np

from cutspace.model.modules import make_partition
from cutspace.model.network import network_from_dict


def random_network(rng: np.random.Generator, n_data: int = 3, n_params: int = 3, max_states: int = 2,
                   discrete: bool = True, data_edge_prob: float = 0.3):
    params = [f"t{k}" for k in range(n_params)]
    data = [f"D{k}" for k in range(n_data)]
    states = {name: int(rng.integers(2, max_states + 1)) for name in params + data}

    parents = {name: [] for name in params}
    for k, name in enumerate(data):
        count = int(rng.integers(1, min(2, n_params) + 1))
        chosen = [params[i] for i in sorted(rng.choice(n_params, size=count, replace=False))]
        earlier = [d for d in data[:k] if rng.random() < data_edge_prob]
        parents[name] = earlier + chosen

    nodes = []
    for name in data + params:
        node = {"id": name, "kind": "param" if name in params else "data", "parents": parents[name]}
        if discrete:
            rows = int(np.prod([states[p] for p in parents[name]], dtype=int))
            node["states"] = states[name]
            node["cpt"] = [[float(v) for v in rng.dirichlet(np.ones(states[name]))] for _ in range(rows)]
        nodes.append(node)
    return network_from_dict({"nodes": nodes})


def random_partition(rng: np.random.Generator, net, max_blocks: int = 3):
    labels = rng.integers(0, max_blocks, size=len(net.data_nodes))
    blocks = [[name for name, label in zip(net.data_nodes, labels) if label == b] for b in range(max_blocks)]
    return make_partition(net, [block for block in blocks if block])


def random_evidence(rng: np.random.Generator, net, observe_prob: float = 0.7):
    return {name: int(rng.integers(net.states(name))) for name in net.data_nodes if rng.random() < observe_prob}
