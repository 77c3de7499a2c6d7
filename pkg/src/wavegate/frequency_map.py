"""Carrier-frequency, wave-speed and parcel assignment for the lattice.

Each semantic category gets a sinusoidal carrier frequency, a clamped wave
propagation speed derived from that frequency, and a contiguous block of
lattice cells (a parcel) in row-major order. The per-category speeds are
painted onto a G x G speed field that parameterizes the lattice dynamics.
The construction is fully deterministic: identical configs produce
bit-identical maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, PoleError

SPEED_FLOOR = 0.1
SPEED_CEIL_FACTOR = 0.9


@dataclass(frozen=True)
class MapConfig:
    """Static parameters of the category-to-lattice assignment."""

    num_categories: int = 527
    grid_size: int = 64
    dt: float = 0.01
    dx: float = 1.0
    k_p: float = 10.0
    k_v: float = 10.0
    f_min: float = 51.0
    f_max: float = 1200.0

    def validate(self) -> None:
        if self.num_categories < 2:
            raise ConfigurationError("num_categories must be >= 2")
        if self.grid_size < 2:
            raise ConfigurationError("grid_size must be >= 2")
        if not (self.dt > 0.0):
            raise ConfigurationError("dt must be positive")
        if not (self.dx > 0.0):
            raise ConfigurationError("dx must be positive")
        if self.k_p < 0.0 or self.k_v < 0.0:
            raise ConfigurationError("damping rates must be non-negative")
        if not (self.f_min < self.f_max):
            raise ConfigurationError("f_min must be below f_max")
        # The step clock samples at 1/dt Hz; a carrier at or below its Nyquist
        # frequency would alias to a degenerate (identically zero) drive.
        nyquist = 1.0 / (2.0 * self.dt)
        if not (self.f_min > nyquist):
            raise ConfigurationError(
                f"f_min must exceed the step-clock Nyquist frequency "
                f"{nyquist:g} Hz, got {self.f_min:g}"
            )

    @property
    def c_max(self) -> float:
        """Upper speed bound before the safety factor is applied."""
        return (
            self.dx
            / (self.dt * math.sqrt(2.0))
            * math.sqrt((1.0 + self.dt * self.k_p) * (1.0 + self.dt * self.k_v))
        )


@dataclass(frozen=True)
class FrequencyMap:
    """Assembled per-category assignment plus the lattice speed field.

    ``parcels`` holds [start, end) ranges into the row-major enumeration of
    the G*G cells; ``parcel_sizes`` are their lengths in the same order.
    ``step_phases`` caches 2*pi*((f_i*dt) mod 1), the per-step phase advance
    of each carrier reduced to the principal interval; using the reduced
    phase keeps integer-period carriers exactly zero on the step clock.
    """

    config: MapConfig
    frequencies: np.ndarray
    speeds: np.ndarray
    parcels: tuple
    parcel_sizes: np.ndarray
    speed_field: np.ndarray
    c_max: float
    step_phases: np.ndarray = field(repr=False)

    def parcel_histogram(self) -> dict:
        sizes, counts = np.unique(self.parcel_sizes, return_counts=True)
        return {int(s): int(c) for s, c in zip(sizes, counts)}


def assign_frequencies(cfg: MapConfig) -> np.ndarray:
    """Uniformly spaced carrier frequencies over [f_min, f_max]."""
    cfg.validate()
    c = cfg.num_categories
    i = np.arange(c, dtype=float)
    return cfg.f_min + i * (cfg.f_max - cfg.f_min) / (c - 1)


def wave_speed_for_frequency(f: float, cfg: MapConfig) -> float:
    """Clamped wave speed whose local resonance matches the carrier ``f``.

    The raw value inverts the local-resonance relation of the damped lattice;
    it is clamped into [0.1, 0.9*c_max]. Exact tangent poles (f*dt an odd
    multiple of 1/2) are rejected; near-pole values produce huge magnitudes
    that the clamp absorbs.
    """
    if not (f > 0.0):
        raise ConfigurationError("frequency must be positive")
    r = 2.0 * f * cfg.dt
    if r == round(r) and int(round(r)) % 2 == 1:
        raise PoleError(
            f"f*dt = {f * cfg.dt:g} sits on a tangent pole; choose a carrier "
            f"off the {0.5 / cfg.dt:g} Hz ladder"
        )
    damping = math.sqrt((1.0 + cfg.dt * cfg.k_p) * (1.0 + cfg.dt * cfg.k_v))
    raw = math.tan(math.pi * f * cfg.dt) * damping / (cfg.dt * math.sqrt(2.0))
    c = min(raw, SPEED_CEIL_FACTOR * cfg.c_max)
    c = max(c, SPEED_FLOOR)
    return c


def allocate_parcels(cfg: MapConfig) -> list:
    """Contiguous row-major [start, end) cell ranges, one per category.

    The first ``G*G mod C`` parcels get one extra cell so the sizes always
    sum to exactly G*G.
    """
    cfg.validate()
    total = cfg.grid_size * cfg.grid_size
    c = cfg.num_categories
    n_base, n_rem = divmod(total, c)
    parcels = []
    start = 0
    for i in range(c):
        size = n_base + 1 if i < n_rem else n_base
        parcels.append((start, start + size))
        start += size
    return parcels


def build_speed_field(speeds: np.ndarray, parcels, cfg: MapConfig) -> np.ndarray:
    """Paint per-category speeds onto the G x G grid.

    Cells not covered by any parcel (possible only if a config left gaps)
    fall back to the lower clamp so they stay inert but well-defined.
    """
    g = cfg.grid_size
    flat = np.full(g * g, SPEED_FLOOR, dtype=float)
    for c_i, (start, end) in zip(speeds, parcels):
        flat[start:end] = c_i
    return flat.reshape(g, g)


def build_striped_field(
    grid_size: int, amplitude: float, baseline: float, mode_sep: int
) -> np.ndarray:
    """Two-valued striped squared-speed perturbation, constant within rows.

    Row r carries amplitude * sgn(cos(2*pi*mode_sep*(r - 0.5)/G)): the square
    wave is sampled half a row off the integer grid so the sign never lands
    on an exact zero for mode_sep < G/2. With G=4, mode_sep=1 the per-row
    values are [+A, +A, -A, -A]. mode_sep at or above G/2 aliases like any
    sampled wave; callers wanting a faithful stripe keep mode_sep below G/2.
    """
    if mode_sep < 1:
        raise ConfigurationError("mode_sep must be >= 1")
    if not (baseline - amplitude > 0.0):
        raise ConfigurationError(
            "baseline - amplitude must stay positive so squared speed does"
        )
    rows = np.arange(grid_size, dtype=float) - 0.5
    wave = np.cos(2.0 * np.pi * mode_sep * rows / grid_size)
    stripe = np.where(wave >= 0.0, amplitude, -amplitude)
    return np.repeat(stripe[:, None], grid_size, axis=1)


def build_frequency_map(cfg: MapConfig) -> FrequencyMap:
    """Compose the full assignment for a config."""
    cfg.validate()
    freqs = assign_frequencies(cfg)
    speeds = np.array([wave_speed_for_frequency(f, cfg) for f in freqs])
    parcels = tuple(allocate_parcels(cfg))
    sizes = np.array([end - start for start, end in parcels], dtype=np.intp)
    field_ = build_speed_field(speeds, parcels, cfg)
    phases = 2.0 * np.pi * np.mod(freqs * cfg.dt, 1.0)
    return FrequencyMap(
        config=cfg,
        frequencies=freqs,
        speeds=speeds,
        parcels=parcels,
        parcel_sizes=sizes,
        speed_field=field_,
        c_max=cfg.c_max,
        step_phases=phases,
    )
