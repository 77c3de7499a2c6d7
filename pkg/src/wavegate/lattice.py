"""Discrete velocity-pressure wave dynamics on a G x G grid.

One step advances the pressure-like field p and the velocity fields
(vx, vy) with explicit damping, a spatially varying squared speed and an
injected source field. Both updates read the time-t fields (Jacobi style),
so the step is order-independent over cells. The spatial operators pair a
forward-difference gradient with a backward-difference divergence; under
periodic boundaries the divergence is exactly the negative adjoint of the
gradient, which makes the discrete energy bookkeeping of the verification
oracles close without boundary terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError, NumericalInstabilityError

PERIODIC = "periodic"
ZERO_FLUX = "zero-flux"


@dataclass
class LatticeConfig:
    speed_field: np.ndarray
    k_p: float = 10.0
    k_v: float = 10.0
    dt: float = 0.01
    dx: float = 1.0
    boundary: str = PERIODIC
    c2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.speed_field = np.asarray(self.speed_field, dtype=float)
        if self.speed_field.ndim != 2 or self.speed_field.shape[0] != self.speed_field.shape[1]:
            raise ConfigurationError("speed_field must be a square 2-D array")
        if self.boundary not in (PERIODIC, ZERO_FLUX):
            raise ConfigurationError(f"unknown boundary kind: {self.boundary!r}")
        if not (self.dt > 0.0 and self.dx > 0.0):
            raise ConfigurationError("dt and dx must be positive")
        self.c2 = self.speed_field * self.speed_field

    @property
    def grid_size(self) -> int:
        return self.speed_field.shape[0]


@dataclass
class LatticeState:
    p: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    time_steps: int = 0

    @classmethod
    def zeros(cls, grid_size: int) -> "LatticeState":
        shape = (grid_size, grid_size)
        return cls(
            p=np.zeros(shape), vx=np.zeros(shape), vy=np.zeros(shape), time_steps=0
        )

    def copy(self) -> "LatticeState":
        return LatticeState(
            self.p.copy(), self.vx.copy(), self.vy.copy(), self.time_steps
        )


def _grad_x(p: np.ndarray, dx: float, periodic: bool) -> np.ndarray:
    out = np.empty_like(p)
    out[:-1, :] = p[1:, :] - p[:-1, :]
    out[-1, :] = (p[0, :] - p[-1, :]) if periodic else 0.0
    if dx != 1.0:
        out /= dx
    return out


def _grad_y(p: np.ndarray, dx: float, periodic: bool) -> np.ndarray:
    out = np.empty_like(p)
    out[:, :-1] = p[:, 1:] - p[:, :-1]
    out[:, -1] = (p[:, 0] - p[:, -1]) if periodic else 0.0
    if dx != 1.0:
        out /= dx
    return out


def _divergence(vx: np.ndarray, vy: np.ndarray, dx: float, periodic: bool) -> np.ndarray:
    out = np.empty_like(vx)
    out[1:, :] = vx[1:, :] - vx[:-1, :]
    out[0, :] = (vx[0, :] - vx[-1, :]) if periodic else vx[0, :]
    out[:, 1:] += vy[:, 1:] - vy[:, :-1]
    if periodic:
        out[:, 0] += vy[:, 0] - vy[:, -1]
    else:
        out[:, 0] += vy[:, 0]
    if dx != 1.0:
        out /= dx
    return out


def step(state: LatticeState, cfg: LatticeConfig, source: np.ndarray) -> LatticeState:
    """Advance one time step; returns a new state, inputs untouched."""
    shape = state.p.shape
    if cfg.speed_field.shape != shape:
        raise ContractError(
            f"speed_field shape {cfg.speed_field.shape} != state shape {shape}"
        )
    source = np.asarray(source, dtype=float)
    if source.shape != shape:
        raise ContractError(f"source shape {source.shape} != state shape {shape}")

    periodic = cfg.boundary == PERIODIC
    dt = cfg.dt
    # Overflow is handled by the explicit finite check below, not by numpy
    # warnings.
    with np.errstate(over="ignore", invalid="ignore"):
        divv = _divergence(state.vx, state.vy, cfg.dx, periodic)
        gpx = _grad_x(state.p, cfg.dx, periodic)
        gpy = _grad_y(state.p, cfg.dx, periodic)

        p_new = (1.0 - dt * cfg.k_p) * state.p - dt * cfg.c2 * divv + dt * source
        vx_new = (1.0 - dt * cfg.k_v) * state.vx - dt * gpx
        vy_new = (1.0 - dt * cfg.k_v) * state.vy - dt * gpy

        # A NaN or Inf anywhere poisons these sums, so one scalar check
        # suffices.
        finite = np.isfinite(p_new.sum() + vx_new.sum() + vy_new.sum())
    if not finite:
        raise NumericalInstabilityError(
            f"non-finite field after step {state.time_steps}"
        )
    return LatticeState(p_new, vx_new, vy_new, state.time_steps + 1)


def reset(state: LatticeState) -> LatticeState:
    """Fresh all-zero state of the same grid size, step counter cleared."""
    return LatticeState.zeros(state.p.shape[0])


def dump_pfield(state: LatticeState, out) -> None:
    """Write the pressure field as one CSV line of G*G row-major values."""
    out.write(",".join(repr(float(v)) for v in state.p.reshape(-1)))
    out.write("\n")


def load_pfield(line: str, grid_size: int) -> np.ndarray:
    values = np.array([float(v) for v in line.strip().split(",")])
    if values.size != grid_size * grid_size:
        raise ContractError(
            f"expected {grid_size * grid_size} values, got {values.size}"
        )
    return values.reshape(grid_size, grid_size)
