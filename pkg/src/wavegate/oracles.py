"""Independent numerical verifiers for the closed-form results.

Everything here is deliberately decoupled from the production paths it
checks: residuals are evaluated from recorded trajectories, resonance
frequencies are recomputed by direct eigen-decomposition of the per-mode
update matrix, Fourier coefficients by direct quadrature, and modal
couplings by direct 2-D summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ContractError, DomainError, ResolutionError
from .lattice import (
    PERIODIC,
    LatticeConfig,
    LatticeState,
    _divergence,
    _grad_x,
    _grad_y,
    step,
)

# ---------------------------------------------------------------------------
# Per-mode update symbol and resonance frequency
# ---------------------------------------------------------------------------


def symbol_matrix(
    c: float, k_p: float, k_v: float, dt: float, xi_x: float, xi_y: float
) -> np.ndarray:
    """3x3 one-step update matrix of a plane-wave mode (i*xi substitution).

    Damping enters in resolvent form 1/(1 + dt*k); this is the matrix the
    resonance analysis is built on, and the eigen-decomposition route in
    :func:`resonance_frequency_by_eigen` consumes it verbatim.
    """
    ap = 1.0 / (1.0 + dt * k_p)
    av = 1.0 / (1.0 + dt * k_v)
    return np.array(
        [
            [ap, -c * c * dt * 1j * xi_x * ap, -c * c * dt * 1j * xi_y * ap],
            [-dt * 1j * xi_x * av, av, 0.0],
            [-dt * 1j * xi_y * av, 0.0, av],
        ],
        dtype=complex,
    )


def local_resonance_frequency(
    c: float, k_p: float, k_v: float, dt: float, xi_mag: float
) -> float:
    """Closed-form local characteristic frequency in Hz.

    Uses the f = theta/(pi*dt) convention of the per-mode phase angle; the
    eigen-decomposition route applies the same convention so the comparison
    is convention-independent.
    """
    if dt <= 0.0:
        raise ContractError("dt must be positive")
    ap = 1.0 + dt * k_p
    av = 1.0 + dt * k_v
    denom = math.sqrt(ap * av) * (1.0 / ap + 1.0 / av)
    theta = math.atan2(2.0 * c * dt * xi_mag, denom)
    return theta / (math.pi * dt)


def resonance_frequency_by_eigen(
    c: float, k_p: float, k_v: float, dt: float, xi_x: float, xi_y: float
) -> float:
    """Same quantity via direct eigen-decomposition of the symbol matrix."""
    lam = np.linalg.eigvals(symbol_matrix(c, k_p, k_v, dt, xi_x, xi_y))
    osc = lam[np.abs(lam.imag) > 0.0]
    if osc.size == 0:
        return 0.0
    lam2 = osc[np.argmax(osc.imag)]
    return abs(np.angle(lam2)) / (math.pi * dt)


# ---------------------------------------------------------------------------
# Stability certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    worst_radius: float
    worst_xi: tuple
    speed: float
    samples: int

    def __str__(self) -> str:
        verdict = "stable" if self.stable else "unstable"
        return (
            f"{verdict}: worst radius {self.worst_radius:.6f} at "
            f"xi={self.worst_xi} (c={self.speed:g}, {self.samples} samples/axis)"
        )


def stability_check(cfg: LatticeConfig, wavenumber_samples: int = 0) -> StabilityReport:
    """Spectral-radius sweep of the per-mode symbol matrix at the max speed.

    The sweep covers the long-wavelength analysis band [0, 2*pi/(G*dx)) with
    ``wavenumber_samples`` points per axis (default: G). The continuous
    i*xi symbol only models the lattice operators faithfully for
    xi*dx << 1, so the certificate screens exactly the band where the
    resonance analysis applies; it is a CFL-style admission check, not an
    unconditional bound on every discrete mode.
    """
    g = cfg.grid_size
    n = wavenumber_samples if wavenumber_samples > 0 else g
    c = float(np.max(cfg.speed_field))
    band = 2.0 * math.pi / (g * cfg.dx)
    xis = band * np.arange(n) / n

    ap = 1.0 / (1.0 + cfg.dt * cfg.k_p)
    av = 1.0 / (1.0 + cfg.dt * cfg.k_v)
    xx, yy = np.meshgrid(xis, xis, indexing="ij")
    xi2 = xx * xx + yy * yy
    # Roots of the oscillatory 2x2 block; the third eigenvalue is av itself.
    disc = (ap - av) ** 2 / 4.0 - ap * av * (c * cfg.dt) ** 2 * xi2
    root = np.sqrt(disc.astype(complex))
    lam_plus = (ap + av) / 2.0 + root
    lam_minus = (ap + av) / 2.0 - root
    radius = np.maximum(np.abs(lam_plus), np.abs(lam_minus))
    radius = np.maximum(radius, av)

    idx = np.unravel_index(np.argmax(radius), radius.shape)
    worst = float(radius[idx])
    return StabilityReport(
        stable=bool(worst < 1.0),
        worst_radius=worst,
        worst_xi=(float(xx[idx]), float(yy[idx])),
        speed=c,
        samples=n,
    )


# ---------------------------------------------------------------------------
# Trajectory recording and residual oracles
# ---------------------------------------------------------------------------


@dataclass
class TrajectoryRecord:
    """States s_0..s_N plus the sources S_0..S_{N-1} that produced them."""

    cfg: LatticeConfig
    states: list
    sources: list


def run_recorded(
    cfg: LatticeConfig,
    source_fn: Callable[[int], np.ndarray],
    steps: int,
    state0: Optional[LatticeState] = None,
) -> TrajectoryRecord:
    state = state0.copy() if state0 is not None else LatticeState.zeros(cfg.grid_size)
    states = [state]
    sources = []
    for n in range(steps):
        s = np.asarray(source_fn(n), dtype=float)
        sources.append(s)
        state = step(state, cfg, s)
        states.append(state)
    return TrajectoryRecord(cfg=cfg, states=states, sources=sources)


@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray
    normalized_max: float
    normalized_mean: float
    scale: float


def _grid_energy(state: LatticeState, dx: float) -> float:
    return 0.5 * dx * dx * float(
        np.sum(state.p**2) + np.sum(state.vx**2) + np.sum(state.vy**2)
    )


def energy_balance_residual(traj: TrajectoryRecord, eps: float = 1e-30) -> ResidualReport:
    """Residual of the energy evolution law along a recorded run.

    residual_t = (E_{t+1} - E_t)/dt - sum[p*S - k_p*p^2 - k_v*|v|^2
    - (c^2 - 1)*p*div(v)] evaluated with the lattice's own discrete
    divergence at time t. Under periodic boundaries the discrete
    integration by parts is exact, so the residual isolates pure
    time-discretization error.
    """
    cfg = traj.cfg
    if cfg.boundary != PERIODIC:
        raise ContractError("energy balance oracle requires periodic boundaries")
    if len(traj.states) < 3:
        raise ContractError("trajectory too short: need at least 3 states")
    dt, dx = cfg.dt, cfg.dx
    area = dx * dx
    energies = [_grid_energy(s, dx) for s in traj.states]
    res = np.empty(len(traj.sources))
    for t, src in enumerate(traj.sources):
        st = traj.states[t]
        divv = _divergence(st.vx, st.vy, dx, periodic=True)
        rhs = area * float(
            np.sum(st.p * src)
            - cfg.k_p * np.sum(st.p**2)
            - cfg.k_v * (np.sum(st.vx**2) + np.sum(st.vy**2))
            - np.sum((cfg.c2 - 1.0) * st.p * divv)
        )
        res[t] = (energies[t + 1] - energies[t]) / dt - rhs
    scale = max(max(energies), eps)
    a = np.abs(res) / scale
    return ResidualReport(
        residuals=res,
        normalized_max=float(a.max()),
        normalized_mean=float(a.mean()),
        scale=scale,
    )


def second_order_residual(traj: TrajectoryRecord, eps: float = 1e-30) -> ResidualReport:
    """Residual of the equivalent second-order damped wave form.

    Evaluates p_tt + (k_p + k_v) p_t + k_p k_v p against
    div(c^2 grad p) + (k_v v + grad p) . grad(c^2) + k_v S + S_t with
    central time differences at interior steps. On constant-speed fields
    the grad(c^2) coupling vanishes identically and the residual is pure
    first-order time-discretization error.
    """
    cfg = traj.cfg
    if len(traj.states) < 4:
        raise ContractError("trajectory too short: need at least 4 states")
    dt, dx = cfg.dt, cfg.dx
    periodic = cfg.boundary == PERIODIC
    gamma = cfg.k_p + cfg.k_v
    mu = cfg.k_p * cfg.k_v
    gc2x = _grad_x(cfg.c2, dx, periodic)
    gc2y = _grad_y(cfg.c2, dx, periodic)

    ps = [s.p for s in traj.states]
    n_sources = len(traj.sources)
    maxima = [eps]
    rows = []
    for t in range(1, n_sources - 1):
        st = traj.states[t]
        p_tt = (ps[t + 1] - 2.0 * ps[t] + ps[t - 1]) / (dt * dt)
        p_t = (ps[t + 1] - ps[t - 1]) / (2.0 * dt)
        lhs = p_tt + gamma * p_t + mu * ps[t]

        gpx = _grad_x(ps[t], dx, periodic)
        gpy = _grad_y(ps[t], dx, periodic)
        flux = _divergence(cfg.c2 * gpx, cfg.c2 * gpy, dx, periodic)
        coupling = (cfg.k_v * st.vx + gpx) * gc2x + (cfg.k_v * st.vy + gpy) * gc2y
        s_t = (traj.sources[t + 1] - traj.sources[t - 1]) / (2.0 * dt)
        rhs = flux + coupling + cfg.k_v * traj.sources[t] + s_t

        rows.append(float(np.max(np.abs(lhs - rhs))))
        maxima.append(float(np.max(np.abs(lhs))))
        maxima.append(float(np.max(np.abs(rhs))))
    res = np.asarray(rows)
    scale = max(maxima)
    return ResidualReport(
        residuals=res,
        normalized_max=float(res.max() / scale),
        normalized_mean=float(res.mean() / scale),
        scale=scale,
    )


def speed_coupling_term(traj: TrajectoryRecord, t: int) -> np.ndarray:
    """The (k_v v + grad p) . grad(c^2) field at step t (zero for uniform c)."""
    cfg = traj.cfg
    periodic = cfg.boundary == PERIODIC
    st = traj.states[t]
    gc2x = _grad_x(cfg.c2, cfg.dx, periodic)
    gc2y = _grad_y(cfg.c2, cfg.dx, periodic)
    gpx = _grad_x(st.p, cfg.dx, periodic)
    gpy = _grad_y(st.p, cfg.dx, periodic)
    return (cfg.k_v * st.vx + gpx) * gc2x + (cfg.k_v * st.vy + gpy) * gc2y


# ---------------------------------------------------------------------------
# Interface reflection and stripe Fourier analysis
# ---------------------------------------------------------------------------


def reflection_coefficient(c1: float, c2: float) -> float:
    """Pressure reflection coefficient between two constant-speed media."""
    if c1 + c2 <= 0.0:
        raise DomainError("c1 + c2 must be positive")
    return (c2 - c1) / (c1 + c2)


def stripe_fourier_coefficient(profile: np.ndarray, q: int) -> complex:
    """q-th Fourier coefficient of a sampled periodic profile.

    Samples are taken as midpoint values on a uniform grid over one domain
    length: V_q = mean(f_j * exp(i*2*pi*q*(j+0.5)/N)).
    """
    profile = np.asarray(profile, dtype=float)
    n = profile.size
    if q < 0:
        raise ContractError("harmonic index must be >= 0")
    if n < 4 * max(q, 1):
        raise ResolutionError(
            f"{n} samples cannot resolve harmonic {q}; need at least {4 * max(q, 1)}"
        )
    y = (np.arange(n) + 0.5) / n
    return complex(np.mean(profile * np.exp(1j * 2.0 * np.pi * q * y)))


def square_wave_profile(n_samples: int, q: int, amplitude: float = 1.0) -> np.ndarray:
    """Midpoint-sampled square wave, phase-aligned with harmonic ``q``."""
    y = (np.arange(n_samples) + 0.5) / n_samples
    return np.where(np.cos(2.0 * np.pi * q * y) >= 0.0, amplitude, -amplitude)


# ---------------------------------------------------------------------------
# Modal coupling
# ---------------------------------------------------------------------------


@dataclass
class ModalCoupling:
    """Coupling matrix over mode pairs plus stripe Fourier coefficients.

    ``coupling[a, b]`` is the drive of mode ``modes[a]`` by mode ``modes[b]``.
    Mode tuples are (m, n) with m the wavenumber along the uniform (column)
    axis and n along the stripe (row) axis, matching the row-striped fields
    produced by :func:`wavegate.frequency_map.build_striped_field`.
    """

    modes: list
    coupling: np.ndarray
    fourier_coeffs: dict = field(default_factory=dict)


def modal_coupling_matrix(
    delta_c2: np.ndarray, modes, dx: float = 1.0
) -> ModalCoupling:
    """Coupling C[(m,n),(m',n')] = k^2_{m',n'} <dc2, phi_{m',n'}, phi_{m,n}>.

    The trilinear inner product is evaluated by direct 2-D summation over
    cell centers; no factorization shortcuts, so block-diagonality for
    striped perturbations is an outcome, not an assumption.
    """
    delta_c2 = np.asarray(delta_c2, dtype=float)
    g = delta_c2.shape[0]
    if delta_c2.shape != (g, g):
        raise ContractError("delta_c2 must be square")
    length = g * dx
    rows = (np.arange(g)[:, None] + 0.5) * dx
    cols = (np.arange(g)[None, :] + 0.5) * dx
    modes = [tuple(m) for m in modes]

    def basis(m: int, n: int) -> np.ndarray:
        return np.exp(1j * 2.0 * np.pi * (m * cols + n * rows) / length)

    coupling = np.empty((len(modes), len(modes)), dtype=complex)
    for b, (mp, np_) in enumerate(modes):
        k2 = (2.0 * np.pi * mp / length) ** 2 + (2.0 * np.pi * np_ / length) ** 2
        src_conj = np.conj(basis(mp, np_))
        for a, (m, n) in enumerate(modes):
            inner = np.mean(delta_c2 * src_conj * basis(m, n))
            coupling[a, b] = k2 * inner

    profile = delta_c2.mean(axis=1)
    coeffs = {}
    for _, n in modes:
        for _, n2 in modes:
            q = abs(n - n2)
            if q not in coeffs and profile.size >= 4 * max(q, 1):
                coeffs[q] = stripe_fourier_coefficient(profile, q)
    return ModalCoupling(modes=modes, coupling=coupling, fourier_coeffs=coeffs)


# ---------------------------------------------------------------------------
# Stripe optimality probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimalityProbeReport:
    trials: int
    max_observed: float
    bound: float
    all_within: bool
    square_wave_value: float


def stripe_optimality_probe(
    amplitude_bound: float,
    q_0: int,
    trials: int,
    seed: int,
    n_samples: int = 4096,
    tol: float = 1e-6,
) -> OptimalityProbeReport:
    """Empirical check that no bounded profile beats the square wave.

    Random clipped Fourier mixtures with |f| <= A are scored on their
    harmonic-q0 coefficient magnitude; all must stay below 2A/pi + tol,
    the value the phase-aligned square wave attains.
    """
    if trials < 1:
        raise ContractError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    bound = 2.0 * amplitude_bound / math.pi
    y = (np.arange(n_samples) + 0.5) / n_samples

    max_seen = 0.0
    for _ in range(trials):
        n_harmonics = rng.integers(1, 9)
        f = np.zeros(n_samples)
        for _ in range(n_harmonics):
            k = int(rng.integers(1, 4 * q_0 + 4))
            amp = rng.normal() * amplitude_bound
            phase = rng.uniform(0.0, 2.0 * np.pi)
            f += amp * np.cos(2.0 * np.pi * k * y + phase)
        f = np.clip(f, -amplitude_bound, amplitude_bound)
        v = abs(stripe_fourier_coefficient(f, q_0))
        max_seen = max(max_seen, v)

    sq = abs(
        stripe_fourier_coefficient(
            square_wave_profile(n_samples, q_0, amplitude_bound), q_0
        )
    )
    max_seen = max(max_seen, sq)
    return OptimalityProbeReport(
        trials=trials,
        max_observed=max_seen,
        bound=bound,
        all_within=bool(max_seen <= bound + tol),
        square_wave_value=sq,
    )
