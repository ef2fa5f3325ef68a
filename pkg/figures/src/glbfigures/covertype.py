"""Cover Type preprocessing into the harness arm-file format.

The raw CSV is the UCI layout: 10 quantitative columns, 44 binary indicator
columns, and a final class label in 1..7, no header.  The 10 quantitative
features are centered and standardized, a constant covariate is appended,
the rows are clustered with k-means, and each cluster becomes one arm whose
context is the centroid and whose Bernoulli mean is the fraction of points
labeled with the second class.
"""

import numpy as np
from sklearn.cluster import KMeans

N_QUANTITATIVE = 10
TARGET_LABEL = 2  # binarized reward: 1 for the second class, 0 otherwise


def load_raw_covertype(path):
    """(quantitative features, labels) from the raw CSV."""
    data = np.genfromtxt(path, delimiter=",")
    if data.ndim != 2 or data.shape[1] < N_QUANTITATIVE + 1:
        raise ValueError(
            f"{path}: expected at least {N_QUANTITATIVE + 1} comma-separated "
            f"columns (10 quantitative features ... class label)"
        )
    if np.isnan(data).any():
        raise ValueError(f"{path}: non-numeric or missing entries")
    return data[:, :N_QUANTITATIVE], data[:, -1].astype(int)


def standardize_with_constant(features):
    """Center and scale each column to unit variance, then append a 1s column."""
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    if np.any(std == 0):
        bad = int(np.flatnonzero(std == 0)[0])
        raise ValueError(f"feature column {bad} is constant; cannot standardize")
    Z = (features - mean) / std
    return np.column_stack([Z, np.ones(len(Z))])


def cluster_arms(contexts_raw, rewards, k=60, seed=0):
    """K-means the contexts; per-cluster centroid and mean binary reward."""
    km = KMeans(n_clusters=k, random_state=seed, n_init=10)
    assignment = km.fit_predict(contexts_raw)
    centers = km.cluster_centers_
    means = np.array([rewards[assignment == j].mean() for j in range(k)])
    return centers, means


def write_arm_file(path, contexts, means, comment=None):
    """Emit the harness arm-file format (header plus one row per arm)."""
    contexts = np.atleast_2d(np.asarray(contexts, dtype=float))
    K, d = contexts.shape
    lines = []
    if comment:
        for c in str(comment).splitlines():
            lines.append(f"# {c}")
    lines.append(f"d={d} K={K} has_means=1")
    for i in range(K):
        coords = " ".join(repr(float(v)) for v in contexts[i])
        lines.append(f"{coords} {float(means[i])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def preprocess_covertype(raw_csv, out_arm_file, k=60, seed=0):
    """Raw CSV -> 60-arm file with d=11 contexts and binarized mean rewards."""
    features, labels = load_raw_covertype(raw_csv)
    contexts_raw = standardize_with_constant(features)
    rewards = (labels == TARGET_LABEL).astype(float)
    centers, means = cluster_arms(contexts_raw, rewards, k=k, seed=seed)
    comment = f"covertype arms: kmeans k={k} seed={seed} rows={len(rewards)}"
    write_arm_file(out_arm_file, centers, means, comment=comment)
    return out_arm_file
