"""Clean (disorder-free) lattice model: parameters, dispersion, generator blocks.

Conventions used throughout the package: hbar = 1, so every energy is an
angular frequency; finite lattices are periodic; the per-site phase-space
basis is ordered (a_1 .. a_N, a*_1 .. a*_N), i.e. all annihilation
components first, then all creation components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "ModelParams",
    "delta_k",
    "dispersion",
    "k1_block",
    "assemble_K",
]


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set of the disordered boson model.

    Parameters
    ----------
    d : int
        Spatial dimension of the lattice.
    extents : tuple of int, optional
        Per-dimension site counts of the periodic lattice.  ``None`` selects
        the single-site (pure random-matrix) geometry, valid only for nu = 0.
    N : int, optional
        Number of identical bands per site.  Required for sampling, not for
        the mean-field equations (which depend on N only through ``a``).
    M : int, optional
        Dimension of the auxiliary space the random couplings map into.
    a : float, optional
        Ratio M / (2N).  May be given directly (mean-field mode) or derived
        from M and N; giving all three requires exact consistency.
    b : float
        Disorder strength (frequency units), the variance scale of the
        Gaussian coupling measure.
    nu : float
        Frequency scale of the deterministic generator (nu = 0 switches the
        model into the pure random-matrix limit).
    """

    d: int = 1
    extents: Optional[Tuple[int, ...]] = None
    N: Optional[int] = None
    M: Optional[int] = None
    a: Optional[float] = None
    b: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if self.b < 0 or self.nu < 0:
            raise ValueError("b and nu must be nonnegative")
        if self.b == 0 and self.nu == 0:
            raise ValueError("b and nu cannot both vanish")
        if (self.M is None) != (self.N is None):
            raise ValueError("M and N must be given together")
        if self.N is not None:
            if int(self.N) != self.N or self.N < 1:
                raise ValueError(f"N must be a positive integer, got {self.N}")
            if int(self.M) != self.M or self.M < 1:
                raise ValueError(f"M must be a positive integer, got {self.M}")
            object.__setattr__(self, "N", int(self.N))
            object.__setattr__(self, "M", int(self.M))
            ratio = self.M / (2 * self.N)
            if self.a is None:
                object.__setattr__(self, "a", ratio)
            elif self.a != ratio:
                raise ValueError(
                    f"inconsistent parameters: a={self.a} but M/(2N)={ratio}"
                )
        if self.a is None:
            raise ValueError("either a or the pair (M, N) is required")
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.extents is not None:
            extents = tuple(int(n) for n in self.extents)
            if len(extents) != self.d:
                raise ValueError(
                    f"extents {extents} do not match dimension d={self.d}"
                )
            if any(n < 1 for n in extents):
                raise ValueError(f"extents must be positive, got {extents}")
            object.__setattr__(self, "extents", extents)

    @property
    def n_sites(self) -> int:
        return 1 if self.extents is None else math.prod(self.extents)

    @property
    def is_rmt(self) -> bool:
        """True in the pure random-matrix limit (no deterministic generator)."""
        return self.nu == 0


def _delta(k, d):
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k[np.newaxis]
    if d is not None and k.shape[-1] != d:
        raise ValueError(
            f"wavevector has {k.shape[-1]} components, expected d={d}"
        )
    return np.cos(k).mean(axis=-1)


def delta_k(k, d: Optional[int] = None):
    """Scaled lattice-Laplacian symbol (1/d) * sum_i cos(k_i), always in [-1, 1].

    ``k`` is a length-d wavevector or an array of them stacked along the
    leading axes.
    """
    return _delta(k, d)


def dispersion(k, nu: float, d: Optional[int] = None):
    """Clean single-boson frequency nu * sqrt(1 - delta_k(k)) >= 0."""
    arg = 1.0 - _delta(k, d)
    # rounding can push 1 - delta to -1e-17 at the zone center
    return nu * np.sqrt(np.clip(arg, 0.0, None))


def k1_block(k, nu: float, d: Optional[int] = None) -> np.ndarray:
    """Momentum-space 2x2 block of the deterministic generator.

    Returns -(i*nu/2) * [[2 - dlt, -dlt], [dlt, -2 + dlt]] with dlt the
    scaled Laplacian symbol at ``k``; its eigenvalues are +/- i*dispersion(k)
    (characteristic polynomial lambda^2 + nu^2 (1 - dlt)).
    """
    dlt = float(_delta(k, d))
    return -0.5j * nu * np.array(
        [[2.0 - dlt, -dlt], [dlt, -2.0 + dlt]], dtype=complex
    )


def _site_blocks(nu: float, d: int):
    onsite = -0.5j * nu * np.diag([2.0, -2.0]).astype(complex)
    # factor 1/(2d): the symbol of the adjacency operator is 2d * delta_k,
    # so each directed bond carries delta_{jj'} = 1/(2d)
    bond = -0.5j * nu / (2.0 * d) * np.array(
        [[-1.0, -1.0], [1.0, 1.0]], dtype=complex
    )
    return onsite, bond


def assemble_K(params: ModelParams) -> np.ndarray:
    """Real-space deterministic generator on the periodic lattice.

    Returns the dense block matrix of dimension 2N * n_sites, ordered
    site-major with the (a, a*) split inside each site.  On-site blocks are
    -(i*nu/2) diag(2, -2) (x) Id_N; each directed nearest-neighbor bond
    carries -(i*nu/2) (1/(2d)) [[-1, -1], [1, 1]] (x) Id_N, so that the
    discrete Fourier transform reproduces ``k1_block``.

    Dense output: the matrix is consumed by dense factorizations at the
    desk scales this package targets (dimension <= a few thousand).
    """
    if params.extents is None:
        raise ValueError("assemble_K requires a finite lattice (extents)")
    if params.N is None:
        raise ValueError("assemble_K requires the band count N")
    if any(n < 3 for n in params.extents):
        raise ValueError(
            "each periodic dimension needs at least 3 sites; with 2 the "
            "directed-bond enumeration would double-count every pair"
        )
    d, N, nu = params.d, params.N, params.nu
    extents = params.extents
    nsite = params.n_sites
    onsite, bond = _site_blocks(nu, d)
    eye_n = np.eye(N)
    onsite_full = np.kron(onsite, eye_n)
    bond_full = np.kron(bond, eye_n)

    dim = 2 * N * nsite
    K = np.zeros((dim, dim), dtype=complex)
    for flat, site in enumerate(np.ndindex(*extents)):
        rows = slice(2 * N * flat, 2 * N * (flat + 1))
        K[rows, rows] = onsite_full
        for axis in range(d):
            for step in (1, -1):
                nb = list(site)
                nb[axis] = (nb[axis] + step) % extents[axis]
                nb_flat = int(np.ravel_multi_index(nb, extents))
                cols = slice(2 * N * nb_flat, 2 * N * (nb_flat + 1))
                K[rows, cols] += bond_full
    return K
