"""Batch command-line surface: `kovtop <command> --config <path>`.

Commands
  simulate          integrate a trajectory, write CSV + drift report
  painleve-test     leading balances and resonance verdict for a body
  classify          quartic root classification for (l1, k0, l0)
  separate-check    quadrature-relation residuals along a trajectory
  reconstruct-check round-trip state reconstruction along a trajectory
  theta-check       period matrix, characteristics, constants, quotients
  design-model      mount offset realizing the symmetric-top ratio

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 inadmissible
parameter regime.  Reports and CSVs are byte-deterministic for a fixed
config and seed; wall time goes to run.log only.  KOVTOP_THREADS bounds
the worker count of the fan-out sections.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import COMMANDS, RunConfig, parse_config
from .errors import ConfigError, KovtopError, NumericalError, RegimeError
from .euler_poisson import (
    IntegralSet,
    MotionState,
    OrientationState,
    first_integrals,
    integral_drift,
    integrate,
    state_from_invariants,
)
from .hyperelliptic import (
    abel_map,
    abel_trajectory,
    build_theta_context,
    p_via_theta,
    theta_constants,
)
from .painleve import painleve_test
from .plotting import render_residual_figure, render_trajectory_figure, write_plot_script
from .quartic import classify as classify_quartic
from .quartic import invariants as quartic_invariants
from .quartic import thresholds
from .realization import InertiaTriple, design_mount, verify_mount
from .reconstruction import ReconstructionSigns, context, p_values, reconstruct_trajectory
from .report import write_csv, write_report
from .separation import QuarticData, quadrature_residuals, separation_series

__all__ = ["main", "run"]


def _worker_count() -> int:
    raw = os.environ.get("KOVTOP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"KOVTOP_THREADS must be an integer, got {raw!r}")
    return max(1, min(n, 64))


def _trajectory_for(cfg: RunConfig):
    body = cfg.body
    if cfg.state0 is not None:
        state0 = cfg.state0
    else:
        inv = cfg.invariants
        target = IntegralSet(l1=inv["l1"], l=inv["l"], k_sq=inv["k"] ** 2, norm=1.0)
        state0 = state_from_invariants(body.c0, target, seed=cfg.seed)
    traj = integrate(
        body,
        state0,
        cfg.t_end,
        cfg.tol,
        sample_step=cfg.sample_step,
        renormalize=cfg.renormalize,
        orientation0=OrientationState.from_gamma_row(state0) if cfg.orientation else None,
        method=cfg.method,
    )
    return state0, traj


def _quartic_data_for(cfg: RunConfig, state0: MotionState) -> QuarticData:
    ints = first_integrals(cfg.body.c0, state0)
    if cfg.invariants is not None:
        return QuarticData(
            l1=cfg.invariants["l1"], l=cfg.invariants["l"], c0=cfg.body.c0,
            k=cfg.invariants["k"],
        )
    if ints.k_sq < 0.0:
        raise NumericalError("negative k^2 from the initial state")
    return QuarticData(l1=ints.l1, l=ints.l, c0=cfg.body.c0, k=float(np.sqrt(ints.k_sq)))


def _cmd_simulate(cfg: RunConfig, out: Path) -> dict:
    state0, traj = _trajectory_for(cfg)
    drift = integral_drift(cfg.body.c0, traj) if cfg.body.is_kovalevskaya else {}
    columns = {
        "t": traj.t,
        "p": traj.states[:, 0], "q": traj.states[:, 1], "r": traj.states[:, 2],
        "gamma": traj.states[:, 3], "gamma1": traj.states[:, 4],
        "gamma2": traj.states[:, 5],
    }
    s1 = s2 = None
    if cfg.body.is_kovalevskaya:
        qd = _quartic_data_for(cfg, state0)
        series = separation_series(qd, traj)
        s1, s2 = series.s1, series.s2
        columns["s1"] = np.real(s1)
        columns["s2"] = np.real(s2)
    write_csv(out / "trajectory.csv", columns)
    write_plot_script(out / "trajectory.gp", "trajectory.csv", list(columns))
    render_trajectory_figure(out / "trajectory.png", traj.t, traj.states, s1, s2)
    results = {
        "state0": state0.as_array(),
        "n_samples": len(traj),
        "n_steps": traj.n_steps,
        "nfev": traj.nfev,
        "integral_drift": drift,
        "artifacts": ["trajectory.csv", "trajectory.gp", "trajectory.png"],
    }
    if traj.orientations is not None:
        defects = [
            OrientationState(traj.orientations[i].copy()).orthogonality_defect()
            for i in range(len(traj))
        ]
        results["orthogonality_defect_max"] = float(np.max(defects))
    return results


def _cmd_painleve(cfg: RunConfig, out: Path) -> dict:
    verdict = painleve_test(cfg.body)
    return {
        "case": verdict.case.value,
        "passes": verdict.passes,
        "reason": verdict.reason,
        "distinct_nonnegative": list(verdict.distinct_nonnegative),
        "families": [
            {
                "family": s.family.value,
                "eps": s.eps,
                "roots": [{"re": float(r.real), "im": float(r.imag)} for r in np.sort_complex(s.roots)],
                "integer_roots": list(s.integer_roots),
                "all_integral": s.all_integral,
            }
            for s in verdict.spectra
        ],
    }


def _cmd_classify(cfg: RunConfig, out: Path) -> dict:
    l1, k0, l0 = cfg.classify["l1"], cfg.classify["k0"], cfg.classify["l0"]
    inv = quartic_invariants(l1, k0, l0)
    thr = thresholds(l1, k0)
    return {
        "root_class": classify_quartic(l1, k0, l0).value,
        "g2": inv.g2, "g3": inv.g3, "G": inv.G, "D": inv.D, "E": inv.E,
        "cubic_relation_residual": inv.cubic_relation_residual(),
        "l0p_sq": thr.l0p_sq, "l0pp_sq": thr.l0pp_sq,
    }


def _cmd_separate_check(cfg: RunConfig, out: Path) -> dict:
    state0, traj = _trajectory_for(cfg)
    qd = _quartic_data_for(cfg, state0)
    rep = quadrature_residuals(qd, traj)
    series = separation_series(qd, traj)
    ok = rep.valid
    r0 = np.abs(rep.residual_zero[ok])
    rt = np.abs(rep.residual_time[ok])
    columns = {
        "t": traj.t,
        "p": traj.states[:, 0], "q": traj.states[:, 1], "r": traj.states[:, 2],
        "gamma": traj.states[:, 3], "gamma1": traj.states[:, 4], "gamma2": traj.states[:, 5],
        "s1": np.real(series.s1), "s2": np.real(series.s2),
    }
    write_csv(out / "trajectory.csv", columns)
    write_plot_script(out / "trajectory.gp", "trajectory.csv", list(columns))
    render_trajectory_figure(out / "trajectory.png", traj.t, traj.states, series.s1, series.s2)
    return {
        "n_samples": len(traj),
        "n_excluded": rep.n_excluded,
        "residual_zero_max": float(np.max(r0)),
        "residual_zero_p99": float(np.percentile(r0, 99)),
        "residual_time_max": float(np.max(rt)),
        "residual_time_p99": float(np.percentile(rt, 99)),
        "fraction_below_1e-6": float(np.mean((r0 < 1e-6) & (rt < 1e-6))),
        "artifacts": ["trajectory.csv", "trajectory.gp", "trajectory.png"],
    }


def _cmd_reconstruct_check(cfg: RunConfig, out: Path) -> dict:
    state0, traj = _trajectory_for(cfg)
    qd = _quartic_data_for(cfg, state0)
    ctx = context(qd.l1, qd.l, qd.c0, qd.k)
    series = separation_series(qd, traj)
    res = reconstruct_trajectory(ctx, traj, series)
    ok = res.valid & np.isfinite(res.max_abs_error)
    errors = res.max_abs_error[ok]
    columns = {
        "t": traj.t,
        "p": traj.states[:, 0], "q": traj.states[:, 1], "r": traj.states[:, 2],
        "gamma": traj.states[:, 3], "gamma1": traj.states[:, 4], "gamma2": traj.states[:, 5],
        "s1": np.real(series.s1), "s2": np.real(series.s2),
        "p_rec": res.states[:, 0], "q_rec": res.states[:, 1], "r_rec": res.states[:, 2],
        "gamma_rec": res.states[:, 3], "gamma1_rec": res.states[:, 4],
        "gamma2_rec": res.states[:, 5],
    }
    write_csv(out / "trajectory.csv", columns)
    write_plot_script(out / "trajectory.gp", "trajectory.csv", list(columns))
    render_trajectory_figure(out / "trajectory.png", traj.t, traj.states, series.s1, series.s2)
    return {
        "n_samples": len(traj),
        "n_reconstructed": int(ok.sum()),
        "n_events": res.n_events,
        "error_median": float(np.median(errors)),
        "error_p99": float(np.percentile(errors, 99)),
        "error_max": float(np.max(errors)),
        "fraction_within_1e-6": res.fraction_within(1e-6),
        "imag_residue_p99": float(np.nanpercentile(res.imag_residue[ok], 99)),
        "base_signs": {
            "eta1": res.base_signs.eta1, "eta2": res.base_signs.eta2,
            "eta3": res.base_signs.eta3, "w1": res.base_signs.w1,
            "w2": res.base_signs.w2, "nu": res.base_signs.nu,
        },
        "formula_notes": list(res.notes),
        "artifacts": ["trajectory.csv", "trajectory.gp", "trajectory.png"],
    }


def _cmd_theta_check(cfg: RunConfig, out: Path) -> dict:
    inv = cfg.invariants
    ctx = context(inv["l1"], inv["l"], cfg.body.c0, inv["k"])
    tctx = build_theta_context(ctx)
    const_rep = theta_constants(tctx)

    # quasi-periodicity at a generic complex point
    rng = np.random.default_rng(cfg.seed)
    v_probe = rng.normal(size=2) * 0.3 + 1j * rng.normal(size=2) * 0.1
    t5 = tctx.theta(v_probe, "5")
    qp1 = abs(tctx.theta(v_probe + np.array([1.0, 0.0]), "5") - t5)
    phase = np.exp(-1j * np.pi * (2.0 * v_probe[0] + tctx.pd.tau[0, 0]))
    qp2 = abs(tctx.theta(v_probe + tctx.pd.tau[:, 0], "5") - t5 * phase) / abs(t5 * phase)

    # theta-route vs direct radicals on admissible samples
    def one_sample(i):
        r = np.random.default_rng(cfg.seed + 1000 + i)
        s1 = r.uniform(ctx.e[0] + 1e-3, ctx.k1 - 1e-3)
        s2 = ctx.s2_upper - 10 ** r.uniform(-2, 1.2)
        v = abel_map(tctx, s1, s2)
        P, Pab = p_via_theta(tctx, v)
        ref = p_values(ctx, s1, s2, ReconstructionSigns(w1=1, w2=1))
        scale = max(1.0, float(np.max(np.abs(ref.P))), float(np.max(np.abs(ref.Pab))))
        return max(
            float(np.max(np.abs(P - ref.P))), float(np.max(np.abs(Pab - ref.Pab)))
        ) / scale

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        errs = list(pool.map(one_sample, range(cfg.n_samples)))

    # Abel linearity along a trajectory
    state0, traj = _trajectory_for(cfg)
    qd = _quartic_data_for(cfg, state0)
    series = separation_series(qd, traj)
    lin = abel_trajectory(tctx, series)

    render_residual_figure(
        out / "theta-identities.png", const_rep.names, const_rep.residuals,
        title="root/theta-constant identity residuals",
    )
    return {
        "tau": tctx.pd.tau,
        "tau_symmetry_defect": tctx.pd.tau_symmetry_defect,
        "im_tau_eigenvalues": tctx.pd.im_tau_eigenvalues,
        "characteristics": {
            lab: {"m": list(ch.m), "n": list(ch.n), "parity": ch.parity}
            for lab, ch in sorted(tctx.chars.items())
        },
        "odd_labels": sorted(tctx.odd_labels),
        "theta_constants": {lab: tctx.constants[lab] for lab in sorted(tctx.constants)},
        "scale_constant_C": tctx.C,
        "quasi_periodicity": {"lattice": qp1, "tau_shift_relative": qp2},
        "constant_identities": {
            name: {"lhs": float(l), "rhs": float(r), "residual": float(abs(l - r))}
            for name, l, r in zip(const_rep.names, const_rep.lhs, const_rep.rhs)
        },
        "constant_identities_max_residual": const_rep.max_residual,
        "p_assignment_phases": tctx.phase_table,
        "quotient_vs_direct": {
            "n_samples": cfg.n_samples,
            "max_relative_error": float(np.max(errs)),
        },
        "abel_linearity": {
            "n_points": int(lin.t.size),
            "n_segments": lin.n_segments,
            "max_fit_residual": lin.max_residual,
            "slope": lin.slope,
            "expected_slope": lin.expected_slope,
        },
        "artifacts": ["theta-identities.png"],
    }


def _cmd_design(cfg: RunConfig, out: Path) -> dict:
    t = InertiaTriple(
        A1=cfg.design["A1"], B1=cfg.design["B1"], C1=cfg.design["C1"], M=cfg.design["M"]
    )
    spec = design_mount(t)
    rep = verify_mount(t, spec)
    return {
        "offset_a": spec.a,
        "moments_at_mount": [spec.A, spec.B, spec.C],
        "b_defect": rep.b_defect,
        "c_defect": rep.c_defect,
        "symmetric_top": rep.symmetric_top,
        "off_diagonal_zero": rep.off_diagonal_zero,
    }


_DISPATCH = {
    "simulate": _cmd_simulate,
    "painleve-test": _cmd_painleve,
    "classify": _cmd_classify,
    "separate-check": _cmd_separate_check,
    "reconstruct-check": _cmd_reconstruct_check,
    "theta-check": _cmd_theta_check,
    "design-model": _cmd_design,
}


def run(cfg: RunConfig, out_dir: Path) -> dict:
    """Dispatch one validated config; returns the results dict."""
    out_dir.mkdir(parents=True, exist_ok=True)
    results = _DISPATCH[cfg.command](cfg, out_dir)
    write_report(out_dir / f"{cfg.command}-report.json", cfg.command, cfg.raw, cfg.seed, results)
    return results


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="kovtop", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    args = parser.parse_args(argv)

    started = time.perf_counter()
    out_dir = Path(args.out)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
        if cfg.command != args.command:
            raise ConfigError(
                f"CLI command {args.command!r} does not match config command {cfg.command!r}"
            )
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be nonnegative")
            cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed})
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        run(cfg, out_dir)
    except RegimeError as exc:
        print(f"inadmissible regime: {exc}", file=sys.stderr)
        return 4
    except (NumericalError, KovtopError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    elapsed = time.perf_counter() - started
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run.log").write_text(
        f"command={cfg.command} seed={cfg.seed} wall_time_s={elapsed:.3f}\n"
    )
    print(f"{cfg.command}: ok ({elapsed:.2f} s); report in {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
