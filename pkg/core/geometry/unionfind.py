import numpy as np


def component_labels(n: int, edges: np.ndarray) -> np.ndarray:
    """
    Canonical component id per vertex for an edge list.

    Vectorised union-find: every edge hooks the larger root onto the smaller
    one, then pointer jumping flattens the forest; repeated until no edge
    joins two roots. Ids are renumbered in order of each component's smallest
    vertex.
    """
    parent = np.arange(n, dtype=np.int64)
    if n == 0:
        return parent
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    u, v = edges[:, 0], edges[:, 1]
    while True:
        ru, rv = parent[u], parent[v]
        differ = ru != rv
        if not np.any(differ):
            break
        high = np.maximum(ru[differ], rv[differ])
        low = np.minimum(ru[differ], rv[differ])
        np.minimum.at(parent, high, low)
        while True:
            jumped = parent[parent]
            if np.array_equal(jumped, parent):
                break
            parent = jumped
    _, labels = np.unique(parent, return_inverse=True)
    return labels.astype(np.int64)
