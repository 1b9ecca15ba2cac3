"""Config-driven batch runner: diagonalize | pite | filter-sweep | current |
gatecount | derivative-demo.

Every run is deterministic for a fixed config and seed; CSV outputs carry
'#'-prefixed metadata headers (units, parameters, git revision) and figures
are rendered next to the delimited files unless plotting is disabled.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import plotting
from .config import build_objects, load_config_file, merge_config, validate_config
from .errors import ConfigError, NumericalFailure
from .evolution import (DensePropagator, SpectralPropagator, Splitting,
                        TrotterPropagator)
from .filtration import FiltrationParams, apply_filtration
from .grid import BranchState, eigenweights, init_state
from .hamiltonian import fock_darwin_levels, lowest_eigenpairs
from .observables import (MeasurementModel, density, diamagnetic_current,
                          paramagnetic_current_measured,
                          paramagnetic_current_oracle, total_current,
                          DerivativeProblem, displacement_matrix,
                          reconstruct_derivatives, unknown_count)
from .pite import PiteParams, run_pite
from .presets import get_preset
from .resources import CnotModel, cnot_counts, subroutine_calls
from .units import UNITS


def _git_revision() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             capture_output=True, text=True, timeout=5,
                             cwd=Path(__file__).parent)
        if out.returncode == 0:
            return out.stdout.strip()
    except Exception:
        pass
    return "unknown"


def _metadata_lines(config: dict, extra: dict | None = None) -> list[str]:
    params = {k: v for k, v in config.items() if k != "outputs"}
    lines = [
        "# units: energy meV, length nm, time 1/meV (hbar = 1)",
        f"# constants: kinetic_coeff={UNITS.kinetic_coeff!r} meV nm^2, "
        f"tesla_to_inv_len2={UNITS.tesla_to_inv_len2!r} 1/nm^2/T",
        f"# parameters: {json.dumps(params, sort_keys=True)}",
        f"# git_revision: {_git_revision()}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {value}")
    return lines


def _write_csv(path: Path, comments: list[str], header: str,
               rows: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for line in comments:
            fh.write(line + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _load_scenario(args) -> dict:
    config: dict = {}
    if args.preset:
        try:
            config = get_preset(args.preset)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    if args.config:
        config = merge_config(config, load_config_file(args.config))
    if not config:
        raise ConfigError("provide --preset and/or --config")
    if args.out:
        config.setdefault("outputs", {})["directory"] = args.out
    if args.seed is not None:
        obs = config.setdefault("observables", {})
        obs.setdefault("model", {})["rng_seed"] = args.seed
    return validate_config(config)


def _outdir(config: dict) -> Path:
    return Path(config.get("outputs", {}).get("directory", "out"))


def _want_plot(args, config: dict) -> bool:
    if args.no_plot:
        return False
    return bool(config.get("outputs", {}).get("plot", True))


def _eigensolve(spec, config, count=None):
    count = count or config.get("diagonalize", {}).get("count", 10)
    return lowest_eigenpairs(spec, count)


def _measurement_model(config: dict) -> MeasurementModel:
    m = config.get("observables", {}).get("model", {"mode": "exact"})
    return MeasurementModel(mode=m.get("mode", "exact"),
                            shot_count=m.get("shot_count", 0),
                            rng_seed=m.get("rng_seed", 0))


def _filtration_time_step(e_remove: float, e_keep: float) -> float:
    gap = abs(e_remove - e_keep)
    if gap <= 0:
        raise NumericalFailure("degenerate filtration target")
    return np.pi / gap


def _run_filtrations(state, spec, config, eig, order=None):
    """Apply the configured filtration chain; returns (state, reports)."""
    fc = config.get("filtration")
    if not fc or not fc.get("targets"):
        return state, []
    order = order if order is not None else fc.get("order", 1)
    substep = fc.get("substep", 0.01)
    propagator = TrotterPropagator(spec, Splitting.TVT, substep=substep)
    reports = []
    for target in fc["targets"]:
        e_remove = float(eig.eigenvalues[target["state"]]) + target.get(
            "delta_e_mev", 0.0)
        e_keep = float(eig.eigenvalues[target["keep_state"]])
        params = FiltrationParams(lam=e_remove,
                                  dt_f=_filtration_time_step(e_remove, e_keep),
                                  order=order)
        report = apply_filtration(state, spec, params, propagator=propagator,
                                  eig=eig)
        if report.success_state is None:
            raise NumericalFailure(
                f"filtration of state {target['state']} produced a zero "
                "success branch"
            )
        reports.append((target, report))
        state = report.success_state
    return state, reports


def _resolve_pite(config, spec, eig):
    pc = config.get("pite", {})
    shift_cfg = pc.get("energy_shift", "target")
    target = pc.get("target_state", 0)
    if shift_cfg == "target":
        shift = float(eig.eigenvalues[target])
    elif shift_cfg == "none":
        shift = 0.0
    else:
        shift = float(shift_cfg)
    params = PiteParams(m0=pc.get("m0", 0.9),
                        splitting=Splitting(pc.get("splitting", "TVT")),
                        energy_shift=shift)
    backend = pc.get("backend", "trotter")
    if backend == "exact":
        if spec.grid.total_points <= 1024:
            propagator = DensePropagator(spec)
        else:
            propagator = SpectralPropagator(eig, remainder="project")
    else:
        propagator = TrotterPropagator(spec, params.splitting)
    return params, propagator, backend


def cmd_diagonalize(args) -> int:
    config = _load_scenario(args)
    outdir = _outdir(config)
    dcfg = config.get("diagonalize", {})
    count = dcfg.get("count", 10)
    b_values = dcfg.get("b_sweep_tesla")
    base_b = config["hamiltonian"]["b_tesla"]
    if not b_values:
        b_values = [base_b]
    analytic = (dcfg.get("analytic_comparison",
                         config["hamiltonian"]["potential"]["kind"] == "harmonic"))
    levels_by_b = []
    analytic_by_b = [] if analytic else None
    rows = []
    for b in b_values:
        cfg_b = merge_config(config, {"hamiltonian": {"b_tesla": b}})
        grid, spec, _, _, _ = build_objects(cfg_b)
        eig = lowest_eigenpairs(spec, count)
        levels_by_b.append(eig.eigenvalues.tolist())
        if analytic:
            fd = fock_darwin_levels(
                config["hamiltonian"]["potential"].get("omega0_mev", 0.0), b,
                config["hamiltonian"]["mass_ratio"], count)
            analytic_by_b.append(fd.tolist())
        for i, e in enumerate(eig.eigenvalues):
            cells = [_fmt(b), str(i), _fmt(e), _fmt(eig.residuals[i])]
            if analytic:
                cells += [_fmt(analytic_by_b[-1][i]),
                          _fmt(e - analytic_by_b[-1][i])]
            rows.append(",".join(cells))
        if dcfg.get("export_eigenvectors"):
            vec_rows = []
            n = grid.n_points
            for k in range(grid.total_points):
                k_x, k_y = k % n, (k // n) % n
                cells = [str(k_x), str(k_y)]
                for i in range(count):
                    cells += [_fmt(eig.eigenvectors[i, k].real),
                              _fmt(eig.eigenvectors[i, k].imag)]
                vec_rows.append(",".join(cells))
            vec_header = "k_x,k_y," + ",".join(
                f"re_{i},im_{i}" for i in range(count))
            _write_csv(outdir / f"eigenvectors_B{b:g}.csv",
                       _metadata_lines(config), vec_header, vec_rows)
    header = "B_tesla,index,energy_meV,residual"
    if analytic:
        header += ",analytic_meV,deviation_meV"
    _write_csv(outdir / "eigenvalues.csv", _metadata_lines(config), header, rows)
    if _want_plot(args, config):
        plotting.spectrum_figure(b_values, levels_by_b,
                                 outdir / "eigenvalues.png",
                                 analytic_by_b=analytic_by_b,
                                 title="lowest eigenvalues")
    print(f"wrote {outdir / 'eigenvalues.csv'}")
    return 0


def cmd_pite(args) -> int:
    config = _load_scenario(args)
    outdir = _outdir(config)
    grid, spec, init_spec, _, schedule = build_objects(config)
    if init_spec is None:
        raise ConfigError("pite needs an initial_state section")
    eig = _eigensolve(spec, config)
    state = init_state(grid, init_spec)
    state, reports = _run_filtrations(state, spec, config, eig)
    params, propagator, backend = _resolve_pite(config, spec, eig)
    if backend == "exact" and isinstance(propagator, SpectralPropagator):
        projected = propagator.project(state.single_branch())
        norm = float(np.linalg.norm(projected))
        if norm < 1e-12:
            raise NumericalFailure("state has no weight inside the eigen-subspace")
        state = BranchState(grid, projected / norm)
    n_steps = config.get("pite", {}).get("n_steps", 0)
    traj = run_pite(state, spec, params, schedule, n_steps, eig=eig,
                    propagator=propagator)
    extra = {"preset": args.preset or "custom",
             "energy_shift_meV": _fmt(params.energy_shift)}
    for target, report in reports:
        extra[f"filtration_state_{target['state']}"] = (
            f"p_success={_fmt(report.p_success)}"
        )
    _write_csv(outdir / "trajectory.csv", _metadata_lines(config, extra),
               traj.csv_header(), traj.csv_lines())
    if _want_plot(args, config) and traj.rows:
        plotting.trajectory_figure(traj.rows, outdir / "trajectory.png",
                                   title=args.preset or "pite run")
    print(f"wrote {outdir / 'trajectory.csv'}")
    return 0


def cmd_filter_sweep(args) -> int:
    config = _load_scenario(args)
    outdir = _outdir(config)
    fc = config.get("filtration", {})
    targets = fc.get("targets")
    if not targets or len(targets) != 2:
        raise ConfigError("filter-sweep needs filtration.targets with exactly "
                          "two entries (removed states)")
    sweep = fc.get("sweep", {})
    de2_values = sweep.get("delta_e2_mev", [0.0])
    de5_values = sweep.get("delta_e5_mev", [-0.2, 0.0, 0.2])
    orders = sweep.get("orders", [1, 2])
    grid, spec, init_spec, _, _ = build_objects(config)
    if init_spec is None:
        raise ConfigError("filter-sweep needs an initial_state section")
    eig = _eigensolve(spec, config, count=config.get("diagonalize", {})
                      .get("count", 32))
    base = init_state(grid, init_spec)
    propagator = SpectralPropagator(eig, remainder="project")
    projected = propagator.project(base.single_branch())
    base = BranchState(grid, projected / np.linalg.norm(projected))
    remove_a, remove_b = targets[0]["state"], targets[1]["state"]
    keep = targets[0]["keep_state"]
    e_a, e_b = float(eig.eigenvalues[remove_a]), float(eig.eigenvalues[remove_b])
    e_keep = float(eig.eigenvalues[keep])

    def one(order, de2, de5):
        state = base.copy()
        p_total = 1.0
        lam_a = e_a  # error on the first removed state is held at zero
        dt_a = _filtration_time_step(lam_a, e_keep + de2)
        rep_a = apply_filtration(
            state, spec, FiltrationParams(lam=lam_a, dt_f=dt_a, order=order),
            propagator=propagator, eig=eig)
        if rep_a.success_state is None:
            return None
        p_total *= rep_a.p_success
        lam_b = e_b + de5
        dt_b = _filtration_time_step(lam_b, e_keep + de2)
        rep_b = apply_filtration(
            rep_a.success_state, spec,
            FiltrationParams(lam=lam_b, dt_f=dt_b, order=order),
            propagator=propagator, eig=eig)
        if rep_b.success_state is None:
            return None
        p_total *= rep_b.p_success
        return {
            "order": order, "dE2": de2, "dE5": de5,
            "weight_phi2": float(rep_b.eigenweights_after[keep]),
            "weight_phi5": float(rep_b.eigenweights_after[remove_b]),
            "p_success": p_total,
        }

    jobs = [(order, de2, de5) for order in orders for de2 in de2_values
            for de5 in de5_values]
    if args.threads and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(lambda j: one(*j), jobs))
    else:
        results = [one(*j) for j in jobs]
    rows = []
    kept = []
    for job, res in zip(jobs, results):
        if res is None:
            continue
        kept.append(res)
        rows.append(",".join([
            _fmt(res["dE2"]), _fmt(res["dE5"]), _fmt(res["weight_phi2"]),
            _fmt(res["weight_phi5"]), _fmt(res["p_success"]), str(res["order"]),
        ]))
    _write_csv(outdir / "filter_sweep.csv", _metadata_lines(config),
               "dE2,dE5,weight_phi2,weight_phi5,p_success,order", rows)
    if _want_plot(args, config) and kept:
        plotting.sweep_figure(kept, outdir / "filter_sweep.png",
                              title="filtration error sweep")
    print(f"wrote {outdir / 'filter_sweep.csv'}")
    return 0


def _current_source_state(args, config, grid, spec, eig):
    obs = config.get("observables", {})
    source = obs.get("source", "eigenstate")
    if source == "pite_final":
        init_spec = build_objects(config)[2]
        if init_spec is None:
            raise ConfigError("pite_final source needs an initial_state")
        state = init_state(grid, init_spec)
        state, _ = _run_filtrations(state, spec, config, eig)
        params, propagator, backend = _resolve_pite(config, spec, eig)
        if backend == "exact" and isinstance(propagator, SpectralPropagator):
            projected = propagator.project(state.single_branch())
            state = BranchState(grid, projected / np.linalg.norm(projected))
        n_steps = config.get("pite", {}).get("n_steps", 0)
        from .pite import pite_step, tau_at_step

        schedule = build_objects(config)[4]
        for k in range(n_steps):
            state = pite_step(state, spec, params, tau_at_step(schedule, k),
                              propagator).success_state
        return state
    if source == "eigenstate":
        idx = obs.get("state_index", 0)
        return BranchState(grid, eig.eigenvectors[idx].copy())
    init_spec = build_objects(config)[2]
    if init_spec is None:
        raise ConfigError("initial source needs an initial_state")
    return init_state(grid, init_spec)


def cmd_current(args) -> int:
    config = _load_scenario(args)
    outdir = _outdir(config)
    grid, spec, _, _, _ = build_objects(config)
    if grid.dims != 2:
        raise ConfigError("current extraction is implemented for dims = 2")
    eig = _eigensolve(spec, config)
    state = _current_source_state(args, config, grid, spec, eig)
    obs = config.get("observables", {})
    model = _measurement_model(config)
    d = obs.get("d", 1)
    charge_units = obs.get("charge_units", False)
    mass = spec.mass_ratio

    rho = density(state, model=model)
    j_para = np.stack([
        paramagnetic_current_measured(state, axis, d, mass, model=model,
                                      charge_units=charge_units).values
        for axis in range(2)
    ])
    j_dia = diamagnetic_current(rho, spec.gauge, mass,
                                charge_units=charge_units).values
    j_tot = j_para + j_dia

    n = grid.n_points
    x = grid.axis_values(0)
    y = grid.axis_values(1)
    dens_rows = [
        ",".join([str(k % n), str((k // n) % n), _fmt(rho.values[k])])
        for k in range(grid.total_points)
    ]
    _write_csv(outdir / "density.csv", _metadata_lines(config),
               "k_x,k_y,density", dens_rows)
    for name, field in (("para", j_para), ("dia", j_dia), ("total", j_tot)):
        rows = [
            ",".join([_fmt(x[k]), _fmt(y[k]), _fmt(field[0, k]),
                      _fmt(field[1, k])])
            for k in range(grid.total_points)
        ]
        _write_csv(outdir / f"current_{name}.csv", _metadata_lines(config),
                   "x,y,jx,jy", rows)
        if _want_plot(args, config):
            plotting.quiver_figure(x, y, field[0], field[1],
                                   outdir / f"current_{name}.png",
                                   density=rho.values, grid_n=n,
                                   title=f"{name} probability current")
    print(f"wrote {outdir / 'current_total.csv'}")
    return 0


def cmd_gatecount(args) -> int:
    model = CnotModel(n=args.n, c_squared_distance=args.c_s, c_adder=args.c_add,
                      c_exp_phase=args.c_ue, c_exp_phase_controlled=args.c_cue)
    splitting = Splitting(args.splitting)
    calls = subroutine_calls(splitting, magnetic=not args.no_field)
    result = {
        "n": args.n,
        "splitting": splitting.value,
        "scenario": args.scenario,
        "cnot_total": cnot_counts(model, splitting, args.scenario),
        "subroutine_calls": {
            "qft": calls.qft,
            "u_kin": calls.u_kin,
            "u_kin_controlled": calls.u_kin_controlled,
            "u_mag": calls.u_mag,
            "u_pot": calls.u_pot,
            "u_pot_controlled": calls.u_pot_controlled,
        },
    }
    print(json.dumps(result, sort_keys=True))
    return 0


def cmd_derivative_demo(args) -> int:
    out = Path(args.out or "out")
    n, length, width = 6, 12.0, 2.0
    big_n = 2**n
    dx = length / big_n
    xs = np.arange(big_n) * dx - length / 2
    mesh_x, mesh_y = np.meshgrid(xs, xs, indexing="ij")
    f = np.exp(-(mesh_x**2 + mesh_y**2) / width**2) * np.exp(1j * 0.8 * mesh_x)
    f = f / np.linalg.norm(f)

    prob1 = DerivativeProblem(2, 1, ((1, 0), (0, 1)))
    prob2 = DerivativeProblem(2, 2, ((1, 0), (0, 1), (1, 1), (1, -1)))
    g1 = reconstruct_derivatives(prob1, f, dx)
    target = f * ((-2 * mesh_x / width**2 - 1j * 0.8) * f.conj())
    err = float(np.abs(g1[(1, 0)] - target).max())
    summary = {
        "unknown_counts": {"r1": unknown_count(1, 2), "r2": unknown_count(2, 2)},
        "matrix_r1": displacement_matrix(prob1, dx).tolist(),
        "matrix_r2": displacement_matrix(prob2, dx).tolist(),
        "gaussian_g1_max_error": err,
        "gaussian_g1_scale": float(np.abs(target).max()),
    }
    rows = []
    flat_g = g1[(1, 0)].reshape(-1)
    flat_t = target.reshape(-1)
    for k in range(flat_g.size):
        rows.append(",".join([
            str(k // big_n), str(k % big_n), _fmt(flat_g[k].real),
            _fmt(flat_g[k].imag), _fmt(flat_t[k].real), _fmt(flat_t[k].imag),
        ]))
    _write_csv(out / "derivative_demo.csv",
               ["# derivative-distribution demo: g(1)_{1,0} of an encoded "
                "Gaussian vs the analytic product"],
               "k0,k1,g_re,g_im,analytic_re,analytic_im", rows)
    print(json.dumps(summary, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridpite",
        description="Qubit-grid eigensolver simulations with probabilistic "
                    "imaginary-time evolution under a uniform magnetic field",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON scenario config")
        p.add_argument("--preset", help="named scenario preset")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="measurement sampling seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for sweeps")
        p.add_argument("--no-plot", action="store_true",
                       help="skip figure rendering")

    for name, fn in (("diagonalize", cmd_diagonalize), ("pite", cmd_pite),
                     ("filter-sweep", cmd_filter_sweep),
                     ("current", cmd_current)):
        p = sub.add_parser(name)
        add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("gatecount")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--splitting", choices=["TV", "TVT"], default="TV")
    p.add_argument("--scenario", choices=["harmonic", "double_well", "symbolic"],
                   default="harmonic")
    p.add_argument("--no-field", action="store_true")
    p.add_argument("--c-s", type=int, help="CNOTs of the squared-distance block")
    p.add_argument("--c-add", type=int, help="CNOTs of the adder block")
    p.add_argument("--c-ue", type=int, help="CNOTs of the exponential phase gate")
    p.add_argument("--c-cue", type=int,
                   help="CNOTs of the controlled exponential phase gate")
    p.set_defaults(fn=cmd_gatecount)

    p = sub.add_parser("derivative-demo")
    p.add_argument("--out", help="output directory")
    p.set_defaults(fn=cmd_derivative_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
