"""Generalized commensurate Aubry-Andre-Harper (AAH) lattice model.

On-site potentials V_j = nu_d * cos(2*pi*beta*j + ky) and modulated
nearest-neighbour hoppings J_{j,j+1} = -J + nu_od * cos(2*pi*beta*j + ky + dphi)
with rational modulation frequency beta = p/q, assembled either into q x q
Bloch blocks (periodic boundaries, momentum kx along the chain) or into
open-chain Hamiltonians of N sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModulationParams:
    """Parameter tuple (J, nu_d, nu_od, beta=p/q, delta_phi) of the lattice.

    beta is stored as the exact integer pair (p, q); p/q is reduced to lowest
    terms on construction so the cell length q is always minimal.
    """

    J: float
    nu_d: float
    nu_od: float
    p: int
    q: int
    delta_phi: float = 0.0

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.p < 0:
            raise ValueError(f"p must be >= 0, got {self.p}")
        g = math.gcd(self.p, self.q)
        if g > 1:
            object.__setattr__(self, "p", self.p // g)
            object.__setattr__(self, "q", self.q // g)

    @property
    def beta(self) -> float:
        return self.p / self.q

    def with_ratio(self, nu_od_over_J: float) -> "ModulationParams":
        """Copy with nu_od set to the given multiple of J."""
        return ModulationParams(self.J, self.nu_d, nu_od_over_J * self.J,
                                self.p, self.q, self.delta_phi)


@dataclass(frozen=True)
class BlochMomentum:
    """Momentum (kx, ky) reduced into the zone (-pi/q, pi/q] x (0, 2*pi]."""

    kx: float
    ky: float

    @staticmethod
    def reduced(kx: float, ky: float, q: int) -> "BlochMomentum":
        wx = TWO_PI / q
        kx = kx - wx * math.floor((kx + wx / 2) / wx)
        if kx <= -wx / 2:
            kx += wx
        ky = ky - TWO_PI * math.floor(ky / TWO_PI)
        if ky <= 0.0:
            ky += TWO_PI
        return BlochMomentum(kx, ky)


@dataclass(frozen=True)
class OpenChainSpec:
    """Open (hard-wall) chain of num_sites sites at modulation phase ky."""

    num_sites: int
    ky: float = 0.0

    def __post_init__(self):
        if self.num_sites < 2:
            raise ValueError(f"need at least 2 sites, got {self.num_sites}")


def _mod_angle(j: int, p: int, q: int) -> float:
    # 2*pi*beta*j computed from the exact residue p*j mod q, so the cosine
    # argument never grows with j
    return TWO_PI * ((p * j) % q) / q


def onsite_potential(j: int, params: ModulationParams, ky: float) -> float:
    """On-site energy nu_d * cos(2*pi*beta*j + ky) at site j."""
    return params.nu_d * math.cos(_mod_angle(j, params.p, params.q) + ky)


def hopping(j: int, params: ModulationParams, ky: float) -> float:
    """Bond energy -J + nu_od * cos(2*pi*beta*j + ky + dphi) between j, j+1."""
    return -params.J + params.nu_od * math.cos(
        _mod_angle(j, params.p, params.q) + ky + params.delta_phi)


def bloch_hamiltonian(params: ModulationParams, k: BlochMomentum) -> np.ndarray:
    """q x q Bloch block at momentum (kx, ky).

    Every hopping bond carries the phase e^{i kx} (periodic gauge); the bond
    j = q wraps from site q back to site 1.  The result is Hermitian by
    construction (no symmetrization is applied).
    """
    q = params.q
    H = np.zeros((q, q), dtype=complex)
    for j in range(1, q + 1):
        H[j - 1, j - 1] += onsite_potential(j, params, k.ky)
        t = hopping(j, params, k.ky) * np.exp(1j * k.kx)
        a, b = j - 1, j % q
        if a == b:
            H[a, a] += 2.0 * t.real
        else:
            H[a, b] += t
            H[b, a] += np.conj(t)
    return H


def bloch_grid_hamiltonians(params: ModulationParams,
                            kxs: np.ndarray, kys: np.ndarray) -> np.ndarray:
    """Stacked Bloch blocks, shape (len(kxs), len(kys), q, q).

    Vectorized equivalent of calling bloch_hamiltonian at every mesh point;
    used by the band-structure and topology scans.
    """
    q = params.q
    kxs = np.asarray(kxs, dtype=float)
    kys = np.asarray(kys, dtype=float)
    nx, ny = len(kxs), len(kys)
    H = np.zeros((nx, ny, q, q), dtype=complex)
    phase = np.exp(1j * kxs)[:, None]
    for j in range(1, q + 1):
        ang = _mod_angle(j, params.p, params.q)
        V = params.nu_d * np.cos(ang + kys)[None, :]
        t = (-params.J + params.nu_od * np.cos(ang + kys + params.delta_phi))[None, :] * phase
        a, b = j - 1, j % q
        H[:, :, a, a] += V
        if a == b:
            H[:, :, a, a] += 2.0 * t.real
        else:
            H[:, :, a, b] += t
            H[:, :, b, a] += np.conj(t)
    return H


def open_hamiltonian(params: ModulationParams, spec: OpenChainSpec) -> np.ndarray:
    """N x N real symmetric tridiagonal open-chain Hamiltonian.

    Hard-wall boundaries: bonds j = 1 .. N-1 only, no wrap-around term.
    """
    N = spec.num_sites
    diag = np.array([onsite_potential(j, params, spec.ky) for j in range(1, N + 1)])
    off = np.array([hopping(j, params, spec.ky) for j in range(1, N)])
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
