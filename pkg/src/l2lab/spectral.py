"""Laplacians, exact Betti numbers and spectral functionals of sections.

Everything here reads an immutable SectionComplex.  Dense eigendecompositions
are cached on the section (``S._cache``); sections are never shared
between writers, so the cache needs no lock.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .linalg import exact_rank
from .sections import BoundaryCondition, SectionComplex, cell_counts

DEFAULT_DENSE_CAP = 4000


class DenseCapExceeded(ValueError):
    pass


class ClusteringAmbiguity(ValueError):
    pass


@dataclass(frozen=True)
class SpectralData:
    degree: int
    eigenvalues: np.ndarray
    tolerance: float


@dataclass(frozen=True)
class BettiVector:
    values: tuple[int, ...]
    condition: BoundaryCondition

    @property
    def euler(self) -> int:
        return sum((-1) ** j * b for j, b in enumerate(self.values))


@dataclass(frozen=True)
class TraceEstimate:
    value: float
    stderr: float
    method: str
    probes: int = 0


def _check_degree(S: SectionComplex, j: int):
    if not 0 <= j <= S.dim:
        raise ValueError(f"degree {j} outside 0..{S.dim}")


def laplacian(S: SectionComplex, j: int) -> sp.csr_matrix:
    """Δ_j = ∂_jᵀ∂_j + ∂_{j+1}∂_{j+1}ᵀ with the identity inner product on cells."""
    _check_degree(S, j)
    key = ("lap", j)
    if key not in S._cache:
        lo = S.boundary(j)
        hi = S.boundary(j + 1)
        S._cache[key] = (lo.T @ lo + hi @ hi.T).tocsr().astype(np.int64)
    return S._cache[key]


def laplacian_norm(S: SectionComplex, j: int) -> float:
    lap = laplacian(S, j)
    if lap.shape[0] == 0:
        return 0.0
    return float(abs(lap).sum(axis=0).max())


def cluster_tolerance(S: SectionComplex, j: int | None = None) -> float:
    degrees = range(S.dim + 1) if j is None else [j]
    return 1e-8 * (1.0 + max(laplacian_norm(S, k) for k in degrees))


def _rank(S: SectionComplex, j: int) -> int:
    key = ("rank", j)
    if key not in S._cache:
        S._cache[key] = exact_rank(S.boundary(j)) if 1 <= j <= S.dim else 0
    return S._cache[key]


def betti(S: SectionComplex, j: int) -> int:
    _check_degree(S, j)
    return S.size(j) - _rank(S, j) - _rank(S, j + 1)


def betti_vector(S: SectionComplex) -> BettiVector:
    values = tuple(betti(S, j) for j in range(S.dim + 1))
    _, chi = cell_counts(S)
    assert sum((-1) ** j * b for j, b in enumerate(values)) == chi
    return BettiVector(values, S.condition)


def _eigh(S: SectionComplex, j: int, cap: int):
    _check_degree(S, j)
    n = S.size(j)
    if n > cap:
        raise DenseCapExceeded(
            f"degree {j} has {n} cells, above the dense cap {cap}; "
            "use heat_trace(..., method='stochastic') instead")
    key = ("eigh", j)
    if key not in S._cache:
        A = laplacian(S, j).toarray().astype(float)
        w, V = np.linalg.eigh(A)
        S._cache[key] = (w, V)
    return S._cache[key]


def eigenvalues(S: SectionComplex, j: int, cap: int = DEFAULT_DENSE_CAP) -> SpectralData:
    w, _ = _eigh(S, j, cap)
    return SpectralData(j, w, cluster_tolerance(S, j))


def zero_multiplicity(S: SectionComplex, j: int, cap: int = DEFAULT_DENSE_CAP) -> int:
    data = eigenvalues(S, j, cap)
    return int(np.count_nonzero(data.eigenvalues <= data.tolerance))


def heat_trace_estimate(S: SectionComplex, j: int, t: float, method: str = "auto",
                        cap: int = DEFAULT_DENSE_CAP, probes: int = 64,
                        seed: int = 0) -> TraceEstimate:
    """Tr e^{-tΔ_j}: exact from the spectrum, or Hutchinson with Rademacher probes."""
    if t <= 0:
        raise ValueError("t must be positive")
    _check_degree(S, j)
    n = S.size(j)
    if method == "auto":
        method = "dense" if n <= cap else "stochastic"
    if method == "dense":
        w, _ = _eigh(S, j, cap)
        return TraceEstimate(float(np.exp(-t * w).sum()), 0.0, "dense")
    if method != "stochastic":
        raise ValueError(f"unknown method {method!r}")
    if n == 0:
        return TraceEstimate(0.0, 0.0, "stochastic", 0)
    rng = np.random.default_rng(seed)
    Z = rng.choice([-1.0, 1.0], size=(n, probes))
    Y = expm_multiply(-t * laplacian(S, j).astype(float), Z)
    samples = np.einsum("ij,ij->j", Z, Y)
    stderr = float(samples.std(ddof=1) / np.sqrt(probes)) if probes > 1 else float("inf")
    return TraceEstimate(float(samples.mean()), stderr, "stochastic", probes)


def heat_trace(S: SectionComplex, j: int, t: float, **kwargs) -> float:
    return heat_trace_estimate(S, j, t, **kwargs).value


def heat_kernel(S: SectionComplex, j: int, t: float, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    w, V = _eigh(S, j, cap)
    return (V * np.exp(-t * w)) @ V.T


def heat_kernel_entry(S: SectionComplex, j: int, t: float, x, y,
                      cap: int = DEFAULT_DENSE_CAP) -> float:
    """Entry of e^{-tΔ_j}; ``x`` and ``y`` are cells ``(orbit, element)`` or row indices."""
    w, V = _eigh(S, j, cap)
    ix = x if isinstance(x, (int, np.integer)) else S.index(j, x)
    iy = y if isinstance(y, (int, np.integer)) else S.index(j, y)
    return float((V[ix] * np.exp(-t * w)) @ V[iy])


def spectral_count(S: SectionComplex, j: int, lam: float,
                   cap: int = DEFAULT_DENSE_CAP) -> int:
    """Number of eigenvalues ≤ λ, with the clustering tolerance as slack."""
    if lam < 0:
        raise ValueError("λ must be nonnegative")
    data = eigenvalues(S, j, cap)
    return int(np.count_nonzero(data.eigenvalues <= lam + data.tolerance))


def positive_clusters(S: SectionComplex, cap: int = DEFAULT_DENSE_CAP,
                      tol: float | None = None) -> list[tuple[float, float]]:
    """Clusters (lo, hi) of positive eigenvalues pooled over all degrees.

    Sorted values are split wherever consecutive gaps exceed ``tol``.  A
    cluster wider than ``tol`` was formed by chaining and is ambiguous.
    """
    tol = cluster_tolerance(S) if tol is None else tol
    vals = np.sort(np.concatenate([eigenvalues(S, j, cap).eigenvalues
                                   for j in range(S.dim + 1)]))
    vals = vals[vals > tol]
    if vals.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(vals) > tol) + 1
    return [(float(c[0]), float(c[-1])) for c in np.split(vals, breaks)]


def _ambiguous(cluster, tol) -> bool:
    return cluster[1] - cluster[0] > tol


def _cluster_basis(S, j, cluster, tol, cap):
    w, V = _eigh(S, j, cap)
    mask = (w >= cluster[0] - tol / 2) & (w <= cluster[1] + tol / 2)
    return V[:, mask]


def dsum(S: SectionComplex, cluster: tuple[float, float], N: int,
         cap: int = DEFAULT_DENSE_CAP, tol: float | None = None) -> int:
    """Σ_{j≤N} (-1)^{N-j} dim E_λ^j for one positive eigenvalue cluster."""
    tol = cluster_tolerance(S) if tol is None else tol
    if cluster[0] <= tol:
        raise ValueError("dsum needs a positive cluster")
    if _ambiguous(cluster, tol):
        raise ClusteringAmbiguity(f"cluster {cluster} spans more than the tolerance {tol:g}")
    dims = [_cluster_basis(S, j, cluster, tol, cap).shape[1] for j in range(N + 1)]
    return sum((-1) ** (N - j) * d for j, d in enumerate(dims))


def _numeric_rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.count_nonzero(s > 1e-7 * max(1.0, s[0])))


@dataclass(frozen=True)
class SupersymmetryReport:
    ok: bool
    clusters: int
    ambiguous: tuple
    failures: tuple

    def __bool__(self):
        return self.ok


def supersymmetry_check(S: SectionComplex, cap: int = DEFAULT_DENSE_CAP,
                        tol: float | None = None) -> SupersymmetryReport:
    """Pair the positive spectrum across adjacent degrees.

    For every positive cluster and every p, ∂_{p+1} maps the part of the
    degree-(p+1) eigenspace orthogonal to ker ∂_{p+1} isomorphically onto
    the part of the degree-p eigenspace inside im ∂_{p+1}; the two
    dimensions are the ranks of ∂_{p+1} and ∂_{p+1}ᵀ on the eigenspaces.
    Each eigenspace must also split completely into those two parts.
    """
    tol = cluster_tolerance(S) if tol is None else tol
    clusters = positive_clusters(S, cap, tol)
    ambiguous = tuple(c for c in clusters if _ambiguous(c, tol))
    failures = []
    for cl in clusters:
        if cl in ambiguous:
            continue
        bases = [_cluster_basis(S, j, cl, tol, cap) for j in range(S.dim + 1)]
        up = []    # rank of ∂_{p+1}ᵀ on E^p: part inside im ∂_{p+1}
        down = []  # rank of ∂_p on E^p: part orthogonal to ker ∂_p
        for p, B in enumerate(bases):
            up.append(_numeric_rank(S.boundary(p + 1).T.astype(float) @ B)
                      if p < S.dim else 0)
            down.append(_numeric_rank(S.boundary(p).astype(float) @ B) if p > 0 else 0)
        for p in range(S.dim):
            if up[p] != down[p + 1]:
                failures.append((cl, p, up[p], down[p + 1]))
        for p, B in enumerate(bases):
            if up[p] + down[p] != B.shape[1]:
                failures.append((cl, p, "split", B.shape[1]))
    return SupersymmetryReport(not failures and not ambiguous, len(clusters),
                               ambiguous, tuple(failures))


def zeta_finite(S: SectionComplex, j: int, s, lam: float, normalization: int | None = None,
                cap: int = DEFAULT_DENSE_CAP) -> complex:
    """(1/|F|) Σ_{μ>0} (μ + λ)^{-s} over the positive eigenvalues μ of Δ_j."""
    if lam <= 0:
        raise ValueError("λ must be positive")
    data = eigenvalues(S, j, cap)
    mu = data.eigenvalues[data.eigenvalues > data.tolerance]
    norm = S.folner_size if normalization is None else normalization
    return complex(np.sum(np.power(mu + lam, -complex(s))) / norm)


def mckean_singer_residual(S: SectionComplex, t: float, cap: int = DEFAULT_DENSE_CAP) -> float:
    _, chi = cell_counts(S)
    total = sum((-1) ** j * heat_trace(S, j, t, method="dense", cap=cap)
                for j in range(S.dim + 1))
    return abs(total - chi)
