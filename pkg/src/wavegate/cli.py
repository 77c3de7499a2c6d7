"""Command-line interface.

Subcommands:
  simulate  generate a synthetic labeled frame stream (plus truth sidecar)
  detect    frames -> drift events (and optional CSV trace)
  gate      frames -> gate decisions + session metrics
  spectrum  frames -> per-cell dominant-frequency CSV
  verify    run the numerical verification suite and print a report table
  bench     measure lattice steps/second at a given grid size
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import oracles, stream_io
from .errors import WavegateError
from .frequency_map import build_frequency_map, build_striped_field
from .gating import SessionConfig, StreamSession, process_stream
from .lattice import LatticeConfig, LatticeState, step
from .spectral import dominant_frequency_map, record_pfield


@contextmanager
def _open_in(path):
    if path in (None, "-"):
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fh:
            yield fh


@contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _load_session_config(path) -> SessionConfig:
    if path is None:
        return stream_io.reference_session_config()
    with open(path, "r", encoding="utf-8") as fh:
        return stream_io.parse_config_text(fh.read())


def cmd_simulate(args) -> int:
    scenario = stream_io.reference_scenario(args.scenario)
    overrides = {}
    if args.frames:
        overrides["duration_frames"] = args.frames
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace

        scenario = replace(scenario, **overrides)
    frames = stream_io.generate_scenario(scenario)
    with _open_out(args.output) as out:
        stream_io.write_frames(frames, out)
    if args.sidecar:
        with open(args.sidecar, "w", encoding="utf-8") as fh:
            json.dump(stream_io.scenario_ground_truth(scenario), fh)
            fh.write("\n")
    return 0


def cmd_detect(args) -> int:
    cfg = _load_session_config(args.config)
    with _open_in(args.input) as src:
        frames = stream_io.read_frames(src, cfg.map_config.num_categories)
    result = process_stream(frames, cfg)
    with _open_out(args.output) as out:
        stream_io.write_events(result.events, out)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            stream_io.write_trace(result.trace, fh)
    for index, message in result.skipped:
        print(f"skipped frame {index}: {message}", file=sys.stderr)
    return 0


def cmd_gate(args) -> int:
    cfg = _load_session_config(args.config)
    with _open_in(args.input) as src:
        frames = stream_io.read_frames(src, cfg.map_config.num_categories)
    result = process_stream(frames, cfg)
    with _open_out(args.output) as out:
        stream_io.write_decisions(result.decisions, out)
    stream_io.write_report(result.metrics, sys.stdout)
    return 0


def cmd_spectrum(args) -> int:
    cfg = _load_session_config(args.config)
    with _open_in(args.input) as src:
        frames = stream_io.read_frames(src, cfg.map_config.num_categories)
    session = StreamSession(cfg)
    rec = record_pfield(session, frames, every_n_steps=args.every_n_steps)
    report = dominant_frequency_map(rec, variance_percentile=args.percentile)
    with _open_out(args.output) as out:
        for line in report.to_csv_lines():
            out.write(line)
            out.write("\n")
    return 0


def cmd_bench(args) -> int:
    g = args.grid
    speed = np.full((g, g), args.speed)
    cfg = LatticeConfig(speed_field=speed, k_p=10.0, k_v=10.0, dt=0.01)
    state = LatticeState.zeros(g)
    source = np.zeros((g, g))
    warmup = min(500, args.steps // 10 + 1)
    for _ in range(warmup):
        state = step(state, cfg, source)
    t0 = time.perf_counter()
    for _ in range(args.steps):
        state = step(state, cfg, source)
    elapsed = time.perf_counter() - t0
    rate = args.steps / elapsed
    print(f"grid\t{g}x{g}")
    print(f"steps\t{args.steps}")
    print(f"seconds\t{elapsed:.3f}")
    print(f"steps_per_sec\t{rate:.0f}")
    return 0


def _verify_rows(cfg: SessionConfig):
    """Yield (name, passed, detail) rows for the verification table."""
    mc = cfg.map_config
    fmap = build_frequency_map(mc)
    hist = fmap.parcel_histogram()
    yield (
        "map_summary",
        True,
        f"min_speed={fmap.speeds.min():.4f}\tmax_speed={fmap.speeds.max():.4f}"
        f"\tparcel_hist={hist}",
    )

    grid = np.linspace(0.1, 0.9 * mc.c_max, 20)
    xis = np.linspace(1e-3, 2.0, 20)
    worst = 0.0
    for c in grid:
        for xi in xis:
            f_closed = oracles.local_resonance_frequency(c, mc.k_p, mc.k_v, mc.dt, xi)
            f_eig = oracles.resonance_frequency_by_eigen(
                c, mc.k_p, mc.k_v, mc.dt, xi / math.sqrt(2.0), xi / math.sqrt(2.0)
            )
            worst = max(worst, abs(f_closed - f_eig) / max(abs(f_eig), 1e-12))
    yield ("resonance_eigen_agreement", worst < 1e-9, f"max_rel_err={worst:.3e}")

    lat = LatticeConfig(
        speed_field=fmap.speed_field, k_p=mc.k_p, k_v=mc.k_v, dt=mc.dt, dx=mc.dx
    )
    cert = oracles.stability_check(lat)
    yield ("stability_certificate", cert.stable, str(cert))

    rng = np.random.default_rng(7)
    g = 16
    drive_pattern = rng.normal(size=(g, g))

    def run(dt: float, steps: int):
        c2field = np.full((g, g), 2.0)
        lcfg = LatticeConfig(speed_field=np.sqrt(c2field), k_p=2.0, k_v=3.0, dt=dt)
        return oracles.run_recorded(
            lcfg, lambda n: drive_pattern * math.sin(2 * math.pi * 3.0 * n * dt), steps
        )

    r1 = oracles.energy_balance_residual(run(0.01, 500))
    r2 = oracles.energy_balance_residual(run(0.005, 1000))
    factor = r1.normalized_max / max(r2.normalized_max, 1e-300)
    yield (
        "energy_balance_convergence",
        math.isfinite(r1.normalized_max) and factor >= 1.8,
        f"res(dt)={r1.normalized_max:.3e}\tres(dt/2)={r2.normalized_max:.3e}"
        f"\tfactor={factor:.2f}",
    )

    s1 = oracles.second_order_residual(run(0.01, 500))
    s2 = oracles.second_order_residual(run(0.005, 1000))
    sfactor = s1.normalized_max / max(s2.normalized_max, 1e-300)
    yield (
        "second_order_convergence",
        math.isfinite(s1.normalized_max) and sfactor >= 1.8,
        f"res(dt)={s1.normalized_max:.3e}\tres(dt/2)={s2.normalized_max:.3e}"
        f"\tfactor={sfactor:.2f}",
    )

    r = oracles.reflection_coefficient
    refl_ok = (
        r(3.0, 3.0) == 0.0
        and abs(r(0.9, 0.1)) == 0.8
        and r(1.0, 4.0) == -r(4.0, 1.0)
    )
    yield ("reflection_closed_form", refl_ok, "R(c,c)=0, |R(0.9,0.1)|=0.8, antisym")

    sq = oracles.square_wave_profile(10_000, 3)
    v = abs(oracles.stripe_fourier_coefficient(sq, 3))
    target = 2.0 / math.pi
    yield (
        "square_wave_fourier",
        abs(v - target) < 1e-3,
        f"|Vq|={v:.6f}\ttarget={target:.6f}",
    )

    probe = oracles.stripe_optimality_probe(1.0, 2, trials=200, seed=11)
    yield (
        "stripe_optimality_probe",
        probe.all_within,
        f"max={probe.max_observed:.6f}\tbound={probe.bound:.6f}",
    )

    stripe = build_striped_field(32, 0.5, 1.0, 2)
    mc_probe = oracles.modal_coupling_matrix(stripe, [(1, 2), (2, 2), (1, 4), (2, 4)])
    cross = max(
        abs(mc_probe.coupling[a, b])
        for a, (m1, _) in enumerate(mc_probe.modes)
        for b, (m2, _) in enumerate(mc_probe.modes)
        if m1 != m2
    )
    yield ("modal_block_diagonality", cross <= 1e-10, f"max_cross_m={cross:.3e}")


def cmd_verify(args) -> int:
    cfg = _load_session_config(args.config)
    failures = 0
    for name, passed, detail in _verify_rows(cfg):
        status = "PASS" if passed else "FAIL"
        print(f"{status}\t{name}\t{detail}")
        if not passed:
            failures += 1
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavegate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic frame stream")
    p.add_argument("--scenario", choices=stream_io.SCENARIO_KINDS, default="step_drift")
    p.add_argument("--frames", type=int, default=0, help="override stream length")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default="-")
    p.add_argument("--sidecar", default=None, help="ground-truth JSON path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="frames -> drift events")
    p.add_argument("--config", default=None)
    p.add_argument("--input", default="-")
    p.add_argument("--output", default="-")
    p.add_argument("--trace", default=None, help="CSV trace path")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("gate", help="frames -> gate decisions + metrics")
    p.add_argument("--config", default=None)
    p.add_argument("--input", default="-")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("spectrum", help="frames -> dominant-frequency CSV")
    p.add_argument("--config", default=None)
    p.add_argument("--input", default="-")
    p.add_argument("--output", default="-")
    p.add_argument("--every-n-steps", type=int, default=1)
    p.add_argument("--percentile", type=float, default=75.0)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run the numerical verification suite")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="lattice steps/second")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--steps", type=int, default=20_000)
    p.add_argument("--speed", type=float, default=0.1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WavegateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.strerror}: {exc.filename}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
