"""Monte Carlo oracle: exact diagonalization of sampled finite realizations.

A realization of the generator is X = K + R with R built site by site from
rectangular Gaussian couplings L_j subject to the reality condition
conj(L) = L * Sigma1, which is solved identically by L = (A | conj(A)).
Stability (all eigenfrequencies real) holds by construction because
H = i*Sigma3*X = i*Sigma3*K + blockdiag(L_j^dagger L_j) is positive
semidefinite, and the spectrum of X is recovered from H through a stable
Hermitian reduction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .linalg import NotPsdError, cholesky_psd, hermitian_eig
from .model import ModelParams, assemble_K

__all__ = [
    "ConeViolationError",
    "SymplecticStructure",
    "RandomBlock",
    "EnsembleSample",
    "SpectrumHistogram",
    "sample_block",
    "local_R",
    "assemble_H",
    "spectrum_X",
    "draw_sample",
    "mc_dos",
]


class ConeViolationError(RuntimeError):
    """A sampled generator left the stability cone (model invariant breach)."""


@dataclass(frozen=True)
class SymplecticStructure:
    """The fixed block matrices of the size-2N phase space."""

    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be a positive integer")

    @cached_property
    def J(self) -> np.ndarray:
        eye = np.eye(self.N)
        zero = np.zeros((self.N, self.N))
        return np.block([[zero, eye], [-eye, zero]])

    @cached_property
    def sigma3(self) -> np.ndarray:
        return np.diag([1.0] * self.N + [-1.0] * self.N)

    @cached_property
    def sigma1(self) -> np.ndarray:
        eye = np.eye(self.N)
        zero = np.zeros((self.N, self.N))
        return np.block([[zero, eye], [eye, zero]])


@dataclass(frozen=True)
class RandomBlock:
    """Per-site random coupling: free complex M x N matrix A and the derived
    L = (A | conj(A)) satisfying conj(L) = L * Sigma1 identically."""

    site: int
    A: np.ndarray

    @property
    def L(self) -> np.ndarray:
        return np.hstack([self.A, self.A.conj()])


@dataclass(frozen=True)
class EnsembleSample:
    """One realization: the site blocks and the Hermitian reduction
    H = i*Sigma3*K + blockdiag(L_j^dagger L_j)."""

    blocks: Tuple[RandomBlock, ...]
    H: np.ndarray
    rng_seed: Tuple[int, int]  # (root seed, sample index)


@dataclass(frozen=True)
class SpectrumHistogram:
    """Binned |eigenfrequency| counts, normalized to the two-sided density
    convention of :class:`bosondos.cpa.DosCurve`.

    Every +/- eigenvalue pair contributes both members to ``counts``;
    ``densities`` are counts / (2 * total * width) so that twice the binned
    integral plus the zero-mode (and any overflow) fraction equals one.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    total_eigenvalues: int
    zero_mode_count: int
    zero_tol: float
    seed: int
    overflow_count: int = 0

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def densities(self) -> np.ndarray:
        return self.counts / (2.0 * self.total_eigenvalues * self.widths)

    @property
    def zero_mode_fraction(self) -> float:
        return self.zero_mode_count / self.total_eigenvalues

    def __post_init__(self):
        booked = int(self.counts.sum()) + self.zero_mode_count + self.overflow_count
        if booked != self.total_eigenvalues:
            raise ValueError(
                f"bookkeeping broken: {booked} binned+zero+overflow vs "
                f"{self.total_eigenvalues} eigenvalues"
            )


def sample_block(params: ModelParams, rng: np.random.Generator, site: int = 0) -> RandomBlock:
    """Draw one site coupling from the Gaussian measure of strength b.

    The free entries A_{mn} are i.i.d. complex Gaussians with
    E|A_{mn}|^2 = b / (2N), i.e. real and imaginary parts of variance
    b / (4N) each.
    """
    if params.M is None or params.N is None:
        raise ValueError("sampling requires both M and N")
    if params.M < 2:
        warnings.warn(
            "M = 1 ensembles are sampled as requested, but the large-N "
            "mean-field benchmark is only controlled for M >= 2",
            UserWarning,
            stacklevel=2,
        )
    std = np.sqrt(params.b / (4.0 * params.N))
    shape = (params.M, params.N)
    A = std * rng.normal(size=shape) + 1j * std * rng.normal(size=shape)
    return RandomBlock(site=site, A=A)


def local_R(block: RandomBlock) -> np.ndarray:
    """Single-site random generator -i*Sigma3*L^dagger*L (size 2N)."""
    L = block.L
    struct = SymplecticStructure(N=block.A.shape[1])
    return -1j * struct.sigma3 @ (L.conj().T @ L)


def _global_sigma3(N: int, n_sites: int) -> np.ndarray:
    return np.kron(np.eye(n_sites), SymplecticStructure(N).sigma3)


def assemble_H(
    params: ModelParams,
    blocks: Sequence[RandomBlock],
    K: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Hermitian reduction H = i*Sigma3*K + blockdiag(L_j^dagger L_j).

    ``K`` may be omitted in the single-site random-matrix limit (nu = 0,
    where K vanishes); otherwise pass the output of ``assemble_K``.
    """
    N = params.N
    if N is None:
        raise ValueError("assemble_H requires the band count N")
    n_sites = len(blocks)
    dim = 2 * N * n_sites
    if K is None:
        if params.nu != 0:
            raise ValueError("K may be omitted only in the nu = 0 limit")
        H = np.zeros((dim, dim), dtype=complex)
    else:
        if K.shape != (dim, dim):
            raise ValueError(f"K has shape {K.shape}, expected {(dim, dim)}")
        H = 1j * _global_sigma3(N, n_sites) @ K
    for j, block in enumerate(blocks):
        L = block.L
        sl = slice(2 * N * j, 2 * N * (j + 1))
        H[sl, sl] += L.conj().T @ L
    return H


def spectrum_X(H: np.ndarray, N: int, shift_tol: float = 1e-10) -> np.ndarray:
    """All real eigenfrequencies mu of X = -i*Sigma3*H, H PSD (ascending).

    With H = C C^dagger the spectrum of Sigma3 * H equals that of the
    Hermitian matrix C^dagger * Sigma3 * C, so the computation stays in
    stable Hermitian linear algebra throughout.  The output comes in +/-
    pairs; a Cholesky failure means H left the stability cone.
    """
    dim = H.shape[0]
    if dim % (2 * N) != 0:
        raise ValueError(f"H dimension {dim} is not a multiple of 2N={2 * N}")
    n_sites = dim // (2 * N)
    try:
        C, _sigma = cholesky_psd(H, shift_tol=shift_tol)
    except NotPsdError as exc:
        raise ConeViolationError(
            f"sampled generator is outside the stability cone: {exc}"
        ) from exc
    S3 = _global_sigma3(N, n_sites)
    reduced = C.conj().T @ S3 @ C
    reduced = 0.5 * (reduced + reduced.conj().T)  # scrub rounding asymmetry
    return hermitian_eig(reduced).eigenvalues


def draw_sample(
    params: ModelParams,
    seed_pair: Tuple[int, int],
    child: np.random.SeedSequence,
    K: Optional[np.ndarray] = None,
    n_sites: int = 1,
) -> EnsembleSample:
    """Build one EnsembleSample from a spawned per-sample seed sequence."""
    rng = np.random.default_rng(child)
    blocks = tuple(sample_block(params, rng, site=j) for j in range(n_sites))
    H = assemble_H(params, blocks, K=K)
    return EnsembleSample(blocks=blocks, H=H, rng_seed=seed_pair)


def mc_dos(
    params: ModelParams,
    n_samples: int,
    bins: int,
    seed: int,
    omega_max: Optional[float] = None,
    zero_tol_factor: float = 1e-8,
    shift_tol: float = 1e-10,
) -> SpectrumHistogram:
    """Eigenfrequency histogram over ``n_samples`` independent realizations.

    The lattice geometry comes from ``params.extents`` (``None`` selects the
    single-site random-matrix limit, which requires nu = 0).  Each sample
    gets its own RNG stream spawned from (seed, sample index), so results
    are reproducible and independent of any execution order.  Zero modes
    (|mu| <= zero_tol, with zero_tol = zero_tol_factor * median|mu|) are
    counted separately from the binned density.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if bins < 1:
        raise ValueError("bins must be at least 1")
    if params.extents is None:
        if params.nu != 0:
            raise ValueError(
                "single-site sampling (extents=None) requires nu = 0"
            )
        K = None
        n_sites = 1
    else:
        K = assemble_K(params)
        n_sites = params.n_sites

    abs_mu: List[np.ndarray] = []
    for idx, child in enumerate(np.random.SeedSequence(seed).spawn(n_samples)):
        sample = draw_sample(
            params, (seed, idx), child, K=K, n_sites=n_sites
        )
        mu = spectrum_X(sample.H, params.N, shift_tol=shift_tol)
        abs_mu.append(np.abs(mu))
    values = np.concatenate(abs_mu)
    total = values.size

    zero_tol = zero_tol_factor * float(np.median(values))
    nonzero = values[values > zero_tol]
    zero_count = total - nonzero.size

    top = float(nonzero.max()) if nonzero.size else 1.0
    hi = top if omega_max is None else float(omega_max)
    binned = nonzero[nonzero <= hi]
    overflow = nonzero.size - binned.size
    counts, edges = np.histogram(binned, bins=bins, range=(0.0, hi))
    return SpectrumHistogram(
        bin_edges=edges,
        counts=counts,
        total_eigenvalues=total,
        zero_mode_count=zero_count,
        zero_tol=zero_tol,
        seed=seed,
        overflow_count=overflow,
    )
