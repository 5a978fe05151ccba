"""Tight-binding parameters of the index-modulated array from localized modes.

The continuous paraxial Hamiltonian H = -(1/2 k0) d_x^2 - (k0 gamma/n0) R(x)
is reduced to a lattice model by building a localized orthonormal basis and
taking matrix elements.  The basis is constructed from the modulation-averaged
(uniform-depth) array: isolated-guide bound modes are projected onto the
lowest bound-band manifold and symmetrically (Loewdin) orthonormalized, which
yields exponentially localized Wannier-like functions.  Matrix elements of
the fully modulated Hamiltonian in this basis give on-site energies eps_j and
bond integrals t_j, and exact q-point Fourier inversion over one modulation
period fits eps_j = nu_d*cos(2*pi*beta*j) and t_j = -J + nu_od*cos(2*pi*beta*j
+ delta_phi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import _mod_angle
from .propagation import IndexModulated, OpticalConstants, _super_gaussian

MODE_DX = 0.05            # um; finite-difference step for mode solves
MODE_WINDOW_SPACINGS = 4  # isolated-mode window width, in units of ws
BASIS_GUIDES = 13         # guides in the Wannier construction


class NoBoundMode(ValueError):
    """The single-guide potential supports no mode below the asymptote."""


class FitDegenerate(ValueError):
    """The periodic Fourier inversion of the fitted samples is singular."""


@dataclass(frozen=True)
class LocalizedMode:
    """Real bound-mode profile (unit L2 norm) and its propagation constant."""

    xs: np.ndarray
    profile: np.ndarray
    propagation_constant: float
    center: float


@dataclass(frozen=True)
class ExtractedParams:
    """Fitted lattice parameters (1/um) and extraction diagnostics."""

    J: float
    nu_od: float
    nu_d: float
    delta_phi: float
    onsite: tuple
    bonds: tuple
    overlap_deficit: float   # max |<trial_j|trial_j+1>| before orthogonalization


def _fd_eig(V: np.ndarray, dx: float, k0: float, n_modes: int):
    """Lowest n_modes of -(1/2 k0) d^2/dx^2 + V on a hard-walled grid."""
    t = 1.0 / (2.0 * k0 * dx * dx)
    diag = 2.0 * t + V
    off = np.full(len(V) - 1, -t)
    vals, vecs = eigh_tridiagonal(diag, off,
                                  select="i", select_range=(0, n_modes - 1))
    vecs = vecs / math.sqrt(dx)
    return vals, vecs


def localized_mode(constants: OpticalConstants, design: IndexModulated,
                   guide: int, z: float = 0.0,
                   dx: float = MODE_DX) -> LocalizedMode:
    """Lowest bound mode of one guide's potential, isolated from the array.

    Solves the 1D operator on a window of MODE_WINDOW_SPACINGS * ws around
    the guide center with 3-point finite differences.  Raises NoBoundMode if
    the lowest level is not below the asymptotic (zero) potential.
    """
    c = design.guide_center(guide, z)
    half = 0.5 * MODE_WINDOW_SPACINGS * design.ws
    n = int(round(2.0 * half / dx)) + 1
    xs = c - half + dx * np.arange(n)
    depth = design.depth_factor(guide, z)
    V = -(constants.k0 * constants.gamma / constants.n0) * depth \
        * _super_gaussian(xs, c, design.wx)
    vals, vecs = _fd_eig(V, dx, constants.k0, 1)
    if vals[0] >= 0.0:
        raise NoBoundMode(
            f"lowest level {vals[0]:.3e} not below the asymptotic potential")
    phi = vecs[:, 0]
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    return LocalizedMode(xs, phi, float(vals[0]), c)


def _apply_h(W: np.ndarray, V: np.ndarray, dx: float, k0: float):
    """H @ W for column vectors W (hard-walled 3-point Laplacian)."""
    t = 1.0 / (2.0 * k0 * dx * dx)
    HW = (2.0 * t + V)[:, None] * W
    HW[:-1] -= t * W[1:]
    HW[1:] -= t * W[:-1]
    return HW


def extract_parameters(constants: OpticalConstants, design: IndexModulated,
                       z: float = 0.0, dx: float = MODE_DX,
                       n_basis: int = BASIS_GUIDES) -> ExtractedParams:
    """Fit (J, nu_od, nu_d, delta_phi) for an index-modulated array.

    The localized basis comes from the uniform-depth array (the modulation
    average): its lowest n_basis bound levels span the first band manifold,
    isolated-guide trial modes are projected onto that manifold, and the
    projections are Loewdin-orthonormalized.  The fit uses the q central
    sites and bonds at the given z (drive phase Omega*z enters the cosines).
    """
    if design.q < 3:
        raise FitDegenerate(f"q = {design.q} leaves the amplitude/phase/"
                            "offset inversion underdetermined")
    if n_basis % 2 == 0 or n_basis < design.q + 3:
        raise ValueError("n_basis must be odd and cover q central sites")
    k0 = constants.k0
    scale = k0 * constants.gamma / constants.n0
    half_idx = (n_basis - 1) // 2
    guides = np.arange(-half_idx, half_idx + 1)

    # common grid; guide centers fall exactly on grid points
    samples_per_ws = int(round(design.ws / dx))
    if abs(samples_per_ws * dx - design.ws) > 1e-12:
        raise ValueError("ws must be a multiple of dx for the shared grid")
    half = (half_idx + 2) * design.ws
    n = int(round(2.0 * half / dx)) + 1
    xs = -half + dx * np.arange(n)

    g0 = _super_gaussian(xs, 0.0, design.wx)
    V_uniform = -scale * sum(
        _super_gaussian(xs, j * design.ws, design.wx) for j in guides)
    _, band = _fd_eig(V_uniform, dx, k0, n_basis)

    # one isolated-guide trial mode, translated to every guide center
    vals0, vecs0 = _fd_eig(-scale * g0, dx, k0, 1)
    if vals0[0] >= 0.0:
        raise NoBoundMode("uniform guide supports no bound mode")
    trial0 = vecs0[:, 0]
    if trial0[np.argmax(np.abs(trial0))] < 0:
        trial0 = -trial0
    trials = np.zeros((n, n_basis))
    for i, j in enumerate(guides):
        trials[:, i] = np.roll(trial0, j * samples_per_ws)
    raw_overlap = trials.T @ trials * dx
    overlap_deficit = float(np.abs(raw_overlap - np.diag(np.diag(raw_overlap))
                                   ).max())

    # project onto the band manifold, then Loewdin-orthonormalize
    proj = band @ (band.T @ trials * dx)
    S = proj.T @ proj * dx
    s_vals, s_vecs = np.linalg.eigh(S)
    if s_vals.min() < 1e-10 * s_vals.max():
        raise FitDegenerate("projected trial modes are linearly dependent")
    W = proj @ (s_vecs / np.sqrt(s_vals) @ s_vecs.T)

    # matrix elements of the fully modulated Hamiltonian at this z
    V_full = -scale * sum(
        design.depth_factor(j, z) * _super_gaussian(xs, j * design.ws,
                                                    design.wx)
        for j in guides)
    HW = _apply_h(W, V_full, dx, k0)
    M = W.T @ HW * dx

    q = design.q
    sites = [half_idx + j for j in range(q)]         # guides j = 0 .. q-1
    thetas = np.array([_mod_angle(j, design.p, design.q) + design.Omega * z
                       for j in range(q)])
    eps = np.array([M[i, i] for i in sites])
    t = np.array([M[i, i + 1] for i in sites])

    J = -float(t.mean())
    phasors = np.exp(-1j * thetas)
    od_amp = (2.0 / q) * np.sum((t + J) * phasors)
    nu_od = float(np.abs(od_amp))
    delta_phi = float(np.angle(od_amp)) if nu_od > 0 else 0.0
    d_amp = (2.0 / q) * np.sum((eps - eps.mean()) * phasors)
    nu_d = float(np.abs(d_amp)) * (1.0 if abs(np.angle(d_amp)) < np.pi / 2
                                   else -1.0)
    return ExtractedParams(J, nu_od, nu_d, delta_phi,
                           tuple(float(e) for e in eps),
                           tuple(float(b) for b in t), overlap_deficit)


def extraction_report(constants: OpticalConstants, design: IndexModulated,
                      params: ExtractedParams, dx: float = MODE_DX) -> dict:
    """JSON-friendly report of an extraction run."""
    return {
        "gamma": constants.gamma,
        "alpha": design.alpha,
        "ws_um": design.ws,
        "wx_um": design.wx,
        "Z_um": design.Z,
        "J_per_um": params.J,
        "nu_od_per_um": params.nu_od,
        "nu_d_per_um": params.nu_d,
        "delta_phi_rad": params.delta_phi,
        "onsite_per_um": list(params.onsite),
        "bonds_per_um": list(params.bonds),
        "overlap_deficit": params.overlap_deficit,
        "mode_dx_um": dx,
        "basis_guides": BASIS_GUIDES,
    }
