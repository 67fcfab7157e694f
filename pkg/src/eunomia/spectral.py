"""Normalized-Laplacian spectral embedding and a seeded k-means.

The embedding takes the eigenvectors of the m smallest eigenvalues of
L_sym = D^{-1/2} (D - W) D^{-1/2} and row-normalizes them. k-means uses
k-means++ initialization from a caller-supplied seed so that clustering is
bit-reproducible; ties resolve to the lowest index throughout.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import eigh
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import eigsh

DENSE_LIMIT = 512
KMEANS_MAX_ITER = 100


def normalized_laplacian(weights: np.ndarray) -> np.ndarray:
    """Symmetric normalized Laplacian of a weighted adjacency matrix.

    The diagonal of ``weights`` is ignored; rows with zero degree must be
    removed by the caller beforehand.
    """
    w = np.array(weights, dtype=float)
    np.fill_diagonal(w, 0.0)
    degree = w.sum(axis=1)
    if np.any(degree <= 0.0):
        raise ValueError("zero-degree node in Laplacian; drop isolated nodes first")
    inv_sqrt = 1.0 / np.sqrt(degree)
    lap = np.diag(degree) - w
    return lap * np.outer(inv_sqrt, inv_sqrt)


def spectral_embedding(weights: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """(eigenvalues, row-normalized embedding) for the m smallest eigenpairs."""
    lap = normalized_laplacian(weights)
    n = lap.shape[0]
    if m > n:
        raise ValueError(f"cannot extract {m} eigenvectors from {n} nodes")
    if n <= DENSE_LIMIT or m >= n - 1:
        vals, vecs = eigh(lap)
        vals, vecs = vals[:m], vecs[:, :m]
    else:
        # deterministic start vector keeps reruns bit-identical
        vals, vecs = eigsh(
            csr_matrix(lap), k=m, sigma=-1e-3, which="LM", v0=np.ones(n) / np.sqrt(n)
        )
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        residual = np.linalg.norm(lap @ vecs - vecs * vals, axis=0).max()
        if residual > 1e-8:
            vals, vecs = eigh(lap)
            vals, vecs = vals[:m], vecs[:, :m]
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return vals, vecs / norms


def kmeans(points: np.ndarray, k: int, seed: int, max_iter: int = KMEANS_MAX_ITER) -> np.ndarray:
    """Seeded k-means++ labels for the rows of ``points``."""
    n = points.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds {n} points")
    rng = np.random.default_rng(seed)

    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining points coincide with a center; pick lowest free index
            taken = {tuple(centers[i]) for i in range(c)}
            idx = next(
                (i for i in range(n) if tuple(points[i]) not in taken), int(rng.integers(n))
            )
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = points[idx]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))

    labels = np.zeros(n, dtype=int)
    for it in range(max_iter):
        dist = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dist.argmin(axis=1)
        if np.array_equal(new_labels, labels) and it > 0:
            break
        labels = new_labels
        for c in range(k):
            members = labels == c
            if np.any(members):
                centers[c] = points[members].mean(axis=0)
            # an emptied cluster keeps its center; callers detect degeneracy
    return labels
