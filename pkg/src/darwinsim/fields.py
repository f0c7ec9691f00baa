"""Periodic-grid electrostatics: Poisson solve, Helmholtz split, Gauss audit.

Everything runs in the discrete Fourier domain on a uniform periodic box.
Per mode the longitudinal/transverse projection is exact, which is what
makes "drop the longitudinal field" quantitatively testable: a purely
transverse E with a nonzero charge density violates Gauss's law by
construction, and the residual here comes out as exactly 1.

Conventions:
  - Poisson equation with the Gaussian 4*pi:  -laplacian(Phi) = 4 pi rho.
  - Wavenumbers k = 2 pi fftfreq(n, d=h); derivatives are spectral.
  - The k = 0 mode of a vector field is assigned to the transverse part
    (a constant field is both curl- and divergence-free; one convention
    is needed and this is it).
  - Grid norms are root-mean-square over nodes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CoincidentParticlesError,
    GridMismatchError,
    NonzeroNetChargeError,
)

_HEADER_FMT = "<qqqq d"   # nx, ny, nz, ncomp (int64 LE), spacing (float64 LE)


def _check_dims(shape: tuple[int, int, int]) -> None:
    if len(shape) != 3:
        raise ValueError(f"grid must be 3D, got {shape}")
    for n in shape:
        if n < 4 or n % 2 != 0:
            raise ValueError(f"grid dimensions must be even and >= 4, got {shape}")


@dataclass(frozen=True)
class FieldGrid:
    """Uniform periodic grid holding scalar and/or vector samples.

    scalar has shape (nx, ny, nz); vector has shape (nx, ny, nz, 3).
    Spacing h is uniform in all directions.
    """

    shape: tuple[int, int, int]
    spacing: float
    scalar: np.ndarray | None = None
    vector: np.ndarray | None = None

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, "shape", shape)
        _check_dims(shape)
        if not self.spacing > 0.0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.scalar is not None:
            s = np.asarray(self.scalar, dtype=float)
            if s.shape != shape:
                raise ValueError(f"scalar samples have shape {s.shape}, expected {shape}")
            object.__setattr__(self, "scalar", s)
        if self.vector is not None:
            v = np.asarray(self.vector, dtype=float)
            if v.shape != shape + (3,):
                raise ValueError(f"vector samples have shape {v.shape}, expected {shape + (3,)}")
            object.__setattr__(self, "vector", v)

    @property
    def n_nodes(self) -> int:
        return self.shape[0] * self.shape[1] * self.shape[2]

    def box_lengths(self) -> np.ndarray:
        return self.spacing * np.array(self.shape, dtype=float)


@dataclass(frozen=True)
class DecomposedField:
    """Curl-free (longitudinal) and divergence-free (transverse) parts."""

    longitudinal: FieldGrid
    transverse: FieldGrid


def _require_same_grid(a: FieldGrid, b: FieldGrid) -> None:
    if a.shape != b.shape or a.spacing != b.spacing:
        raise GridMismatchError(
            f"grids differ: {a.shape} @ h={a.spacing} vs {b.shape} @ h={b.spacing}"
        )


def wavevectors(shape: tuple[int, int, int], spacing: float,
                zero_nyquist: bool = False) -> tuple[np.ndarray, ...]:
    """Angular wavenumber arrays (kx, ky, kz) broadcastable over the grid.

    Odd-order spectral operators (gradient, divergence, the Helmholtz
    projector) must use zero_nyquist=True: the Nyquist plane carries a
    frequency with no conjugate partner, and an odd power of k there
    breaks the Hermitian symmetry a real field requires. Even operators
    (the Laplacian) keep the full wavenumbers.
    """
    out = []
    for axis in range(3):
        k = 2.0 * np.pi * np.fft.fftfreq(shape[axis], d=spacing)
        if zero_nyquist:
            k = k.copy()
            k[shape[axis] // 2] = 0.0
        out.append(k)
    return (out[0][:, None, None], out[1][None, :, None], out[2][None, None, :])


def grid_rms(values: np.ndarray) -> float:
    """Root-mean-square over grid nodes (all components for vector fields)."""
    return float(np.sqrt(np.mean(np.abs(values) ** 2)))


def solve_poisson(rho: FieldGrid) -> FieldGrid:
    """Solve -laplacian(Phi) = 4 pi rho spectrally; Phi has zero mean.

    The periodic problem is solvable only for zero net charge; a mean
    density above 1e-12 of the density scale raises NonzeroNetChargeError.
    """
    if rho.scalar is None:
        raise ValueError("solve_poisson needs a grid with scalar (density) samples")
    density = rho.scalar
    scale = float(np.max(np.abs(density)))
    mean = float(np.mean(density))
    if scale == 0.0:
        return FieldGrid(rho.shape, rho.spacing, scalar=np.zeros(rho.shape))
    if abs(mean) > 1e-12 * scale:
        raise NonzeroNetChargeError(
            f"mean density {mean:.3e} is nonzero (scale {scale:.3e}); "
            "the periodic Poisson problem has no solution"
        )
    kx, ky, kz = wavevectors(rho.shape, rho.spacing)
    k2 = kx ** 2 + ky ** 2 + kz ** 2
    rho_hat = np.fft.fftn(density)
    phi_hat = np.zeros_like(rho_hat)
    nonzero = k2 > 0.0
    phi_hat[nonzero] = 4.0 * np.pi * rho_hat[nonzero] / k2[nonzero]
    phi = np.fft.ifftn(phi_hat).real
    return FieldGrid(rho.shape, rho.spacing, scalar=phi)


def gradient(phi: FieldGrid) -> FieldGrid:
    """Spectral gradient of a scalar grid, returned as a vector grid."""
    if phi.scalar is None:
        raise ValueError("gradient needs scalar samples")
    kx, ky, kz = wavevectors(phi.shape, phi.spacing, zero_nyquist=True)
    phi_hat = np.fft.fftn(phi.scalar)
    out = np.empty(phi.shape + (3,))
    for axis, k in enumerate((kx, ky, kz)):
        out[..., axis] = np.fft.ifftn(1j * k * phi_hat).real
    return FieldGrid(phi.shape, phi.spacing, vector=out)


def divergence(field: FieldGrid) -> FieldGrid:
    """Spectral divergence of a vector grid, returned as a scalar grid."""
    if field.vector is None:
        raise ValueError("divergence needs vector samples")
    kx, ky, kz = wavevectors(field.shape, field.spacing, zero_nyquist=True)
    div_hat = np.zeros(field.shape, dtype=complex)
    for axis, k in enumerate((kx, ky, kz)):
        div_hat += 1j * k * np.fft.fftn(field.vector[..., axis])
    return FieldGrid(field.shape, field.spacing, scalar=np.fft.ifftn(div_hat).real)


def laplacian(phi: FieldGrid) -> FieldGrid:
    """Spectral Laplacian of a scalar grid."""
    if phi.scalar is None:
        raise ValueError("laplacian needs scalar samples")
    kx, ky, kz = wavevectors(phi.shape, phi.spacing)
    k2 = kx ** 2 + ky ** 2 + kz ** 2
    out = np.fft.ifftn(-k2 * np.fft.fftn(phi.scalar)).real
    return FieldGrid(phi.shape, phi.spacing, scalar=out)


def electric_field_from_potential(phi: FieldGrid) -> FieldGrid:
    """E = -grad Phi."""
    g = gradient(phi)
    return FieldGrid(phi.shape, phi.spacing, vector=-g.vector)


def helmholtz_decompose(field: FieldGrid) -> DecomposedField:
    """Split a periodic vector field into longitudinal + transverse parts.

    Per Fourier mode the longitudinal part is khat (khat . F), the
    transverse part the remainder; the k = 0 mode goes to the transverse
    part. The parts reconstruct the input and the transverse part is
    divergence-free, both to spectral accuracy.
    """
    if field.vector is None:
        raise ValueError("helmholtz_decompose needs vector samples")
    kx, ky, kz = wavevectors(field.shape, field.spacing, zero_nyquist=True)
    k2 = kx ** 2 + ky ** 2 + kz ** 2
    inv_k2 = np.zeros_like(k2)
    nonzero = k2 > 0.0
    inv_k2[nonzero] = 1.0 / k2[nonzero]

    f_hat = [np.fft.fftn(field.vector[..., axis]) for axis in range(3)]
    ks = (kx, ky, kz)
    k_dot_f = sum(k * f for k, f in zip(ks, f_hat))
    longitudinal = np.empty(field.shape + (3,))
    transverse = np.empty(field.shape + (3,))
    for axis in range(3):
        long_hat = ks[axis] * k_dot_f * inv_k2
        longitudinal[..., axis] = np.fft.ifftn(long_hat).real
        transverse[..., axis] = np.fft.ifftn(f_hat[axis] - long_hat).real
    return DecomposedField(
        longitudinal=FieldGrid(field.shape, field.spacing, vector=longitudinal),
        transverse=FieldGrid(field.shape, field.spacing, vector=transverse),
    )


def gauss_law_residual(efield: FieldGrid, rho: FieldGrid) -> float:
    """Relative Gauss-law residual ||div E - 4 pi rho|| / ||4 pi rho||.

    Falls back to the absolute RMS of div E when rho vanishes identically.
    A purely transverse field against a nonzero density scores exactly 1:
    the configuration in which the Coulomb part of the field has been
    erased.
    """
    if efield.vector is None:
        raise ValueError("gauss_law_residual needs vector samples for E")
    if rho.scalar is None:
        raise ValueError("gauss_law_residual needs scalar samples for rho")
    _require_same_grid(efield, rho)
    div = divergence(efield).scalar
    target = 4.0 * np.pi * rho.scalar
    denom = grid_rms(target)
    num = grid_rms(div - target)
    return num / denom if denom > 0.0 else num


def mean_square_field_split(field: FieldGrid) -> tuple[float, float, float]:
    """Volume averages (<|E_long|^2>, <|E_trans|^2>, <|E|^2>).

    The parts are orthogonal mode by mode, so the averages obey the
    Parseval sum rule <|E|^2> = <|E_long|^2> + <|E_trans|^2>.
    """
    parts = helmholtz_decompose(field)
    ms_long = float(np.mean(np.sum(parts.longitudinal.vector ** 2, axis=-1)))
    ms_trans = float(np.mean(np.sum(parts.transverse.vector ** 2, axis=-1)))
    ms_total = float(np.mean(np.sum(field.vector ** 2, axis=-1)))
    return ms_long, ms_trans, ms_total


def coulomb_potential_direct(charges: list[tuple[float, np.ndarray]],
                             eval_points: np.ndarray) -> np.ndarray:
    """Free-space potential sum_i q_i / |r - r_i| at each evaluation point.

    Direct summation in input order. Evaluation exactly at a charge
    location is an error rather than an infinity.
    """
    points = np.atleast_2d(np.asarray(eval_points, dtype=float))
    if points.shape[1] != 3:
        raise ValueError("eval_points must be (M, 3)")
    out = np.zeros(points.shape[0])
    for qi, ri in charges:
        d = np.linalg.norm(points - np.asarray(ri, dtype=float), axis=1)
        if np.any(d == 0.0):
            raise CoincidentParticlesError(
                "potential evaluation point coincides with a charge location"
            )
        out += qi / d
    return out


def deposit_charges(charges: list[tuple[float, np.ndarray]],
                    shape: tuple[int, int, int], spacing: float,
                    width: float | None = None) -> FieldGrid:
    """Deposit point charges as periodic Gaussian clouds of the given width.

    Default width is 2h. Each cloud is normalized on the grid so its
    density integrates to exactly the particle charge; a neutral set of
    charges therefore deposits to a solvable (zero-mean) density.
    """
    _check_dims(tuple(shape))
    if width is None:
        width = 2.0 * spacing
    if not width > 0.0:
        raise ValueError(f"smearing width must be positive, got {width}")
    lengths = spacing * np.array(shape, dtype=float)
    axes = [spacing * np.arange(n) for n in shape]
    density = np.zeros(tuple(shape))
    cell_volume = spacing ** 3
    for qi, ri in charges:
        r = np.asarray(ri, dtype=float)
        # minimum-image displacement per axis
        deltas = []
        for axis in range(3):
            d = axes[axis] - (r[axis] % lengths[axis])
            d -= lengths[axis] * np.round(d / lengths[axis])
            deltas.append(d)
        dist2 = (deltas[0][:, None, None] ** 2
                 + deltas[1][None, :, None] ** 2
                 + deltas[2][None, None, :] ** 2)
        cloud = np.exp(-dist2 / (2.0 * width ** 2))
        total = float(np.sum(cloud)) * cell_volume
        density += (qi / total) * cloud
    return FieldGrid(tuple(shape), spacing, scalar=density)


def write_grid(path: str | Path, grid: FieldGrid) -> None:
    """Write a grid file: header (nx, ny, nz, ncomp as little-endian int64,
    spacing as little-endian float64) then row-major float64 samples.

    Vector grids store the component index as the fastest axis.
    """
    if (grid.scalar is None) == (grid.vector is None):
        raise ValueError("grid file holds exactly one of scalar or vector samples")
    if grid.scalar is not None:
        ncomp, data = 1, grid.scalar
    else:
        ncomp, data = 3, grid.vector
    header = struct.pack(_HEADER_FMT, *grid.shape, ncomp, grid.spacing)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def read_grid(path: str | Path) -> FieldGrid:
    """Read a grid file written by write_grid."""
    raw = Path(path).read_bytes()
    header_size = struct.calcsize(_HEADER_FMT)
    if len(raw) < header_size:
        raise ValueError(f"{path}: truncated grid file")
    nx, ny, nz, ncomp, spacing = struct.unpack_from(_HEADER_FMT, raw)
    if ncomp not in (1, 3):
        raise ValueError(f"{path}: component count must be 1 or 3, got {ncomp}")
    expected = nx * ny * nz * ncomp
    data = np.frombuffer(raw, dtype="<f8", count=-1, offset=header_size)
    if data.size != expected:
        raise ValueError(
            f"{path}: expected {expected} samples for {(nx, ny, nz)} x {ncomp}, "
            f"got {data.size}"
        )
    if ncomp == 1:
        return FieldGrid((nx, ny, nz), spacing, scalar=data.reshape(nx, ny, nz))
    return FieldGrid((nx, ny, nz), spacing, vector=data.reshape(nx, ny, nz, 3))
