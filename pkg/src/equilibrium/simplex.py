import numpy as np


def project_simplex(c: np.ndarray, mass: float = 1.0) -> np.ndarray:
    """
    Euclidean projection onto {x >= 0, sum x = mass}.

    Sort-based: the threshold is the largest k with a_k > (sum_{i<=k} a_i - mass)/k.
    """
    c = np.asarray(c, dtype=float)
    a = -np.sort(-c)
    thresholds = (np.cumsum(a) - mass) / np.arange(1, c.size + 1)
    k = np.nonzero(a > thresholds)[0][-1]
    return np.maximum(c - thresholds[k], 0.0)
