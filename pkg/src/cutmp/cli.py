"""Batch front-end: fit the order parameter, solve the PDE, run the
algorithms over graph ensembles, run oracles and diagnostics.

Subcommands: gamma-fit, pde-solve, run, oracle, diag, bench.  Every run
is fully determined by its flags plus seeds; rows are emitted in seed
order regardless of worker scheduling.  CSV is canonical, JSON mirrors
it.  A flat "key value" config file can seed any subcommand's flags
(command-line flags win).  Exit status is 0 iff all enabled checks pass.
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import engine, graph, iamp, oracle, parisi, rounding, wave

WORKERS_ENV = "CUTMP_WORKERS"

RUN_COLUMNS = ["run_id", "algo", "mode", "n", "k", "delta", "eta", "L",
               "seed", "epsilon_treelike", "u_value", "normalized_value",
               "edges_cut", "balance", "wall_ms"]

DIAG_COLUMNS = ["check", "statistic", "value", "stderr", "tolerance", "status"]


def _default_workers():
    return int(os.environ.get(WORKERS_ENV, "1"))


def save_gamma(gamma, path, p_value=None):
    """Text format: optional '# P <value>' comment, then 't g' per step."""
    with open(path, "w") as f:
        if p_value is not None:
            f.write(f"# P {p_value!r}\n")
        for t, g in zip(gamma.breakpoints, gamma.values):
            f.write(f"{float(t)!r} {float(g)!r}\n")


def load_gamma(path):
    bp, vals = [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            t, g = line.split()
            bp.append(float(t))
            vals.append(float(g))
    return parisi.GammaStep(np.array(bp), np.array(vals))


def _emit(rows, columns, out, fmt):
    if fmt == "json":
        text = json.dumps([dict(zip(columns, r)) for r in rows], indent=1)
    else:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(columns)
        w.writerows(rows)
        text = buf.getvalue()
    if out:
        with open(out, "w") as f:
            f.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def probe_radius(k, cap=2000):
    """Largest ball radius whose vertex count stays under the cap."""
    ell = 0
    size = 1 + k
    while size * (k - 1) <= cap:
        size *= (k - 1)
        ell += 1
    return ell


def cmd_gamma_fit(args):
    gamma, p = parisi.optimize_gamma(args.m, budget=args.budget, seed=args.seed)
    print(f"P({args.m}-step gamma) = {p:.6f}")
    if args.out:
        save_gamma(gamma, args.out, p_value=p)
        print(f"wrote {args.out}")
    return 0


def cmd_pde_solve(args):
    gamma = load_gamma(args.gamma_file) if args.gamma_file \
        else parisi.GammaStep.constant(args.gamma_const)
    sol = parisi.solve_pde(gamma, m_t=args.mt, m_x=args.mx, x_max=args.xmax)
    print(f"phi(0,0) = {sol.value_at_origin():.6f}")
    print(f"P(gamma)  = {parisi.parisi_value(sol):.6f}")
    if args.out:
        parisi.save_solution(sol, args.out)
        print(f"wrote {args.out}")
    return 0


def _run_one(payload):
    (n, k, seed, algo, mode, delta, eta, L, sol, xi_mode, mc_reps) = payload
    t0 = time.perf_counter()
    g = graph.generate_random_regular(n, k, seed)
    eps = graph.treelike_report(g, probe_radius(k)).epsilon
    if algo == "wave":
        cfg = wave.WaveConfig.make(L, L if mode == "maxcut" else 1)
        sched = wave.make_wave_schedule(cfg)
        res = engine.run(g, sched, seed)
        sigma = rounding.sign_round(res.z)
        zhat = res.z
    else:
        sched = iamp.build_schedule(sol, delta, eta, xi_mode=xi_mode,
                                    mc_reps=mc_reps, seed=seed,
                                    maxcut=(mode == "maxcut"))
        L = sched.L
        res = engine.run(g, sched, seed)
        zhat = rounding.clip(res.z)
        sigma = rounding.randomized_round(zhat, seed)
    if mode == "minbis":
        sigma = rounding.balance_repair(sigma, zhat)
    cut = rounding.evaluate(g, sigma, provenance=dict(
        algo=algo, mode=mode, seed=seed, delta=delta, eta=eta, L=L,
        descriptor=sched.descriptor))
    wall = (time.perf_counter() - t0) * 1000
    sign = -1.0 if mode == "maxcut" else 1.0
    run_id = f"{algo}-{mode}-n{n}-k{k}-s{seed}"
    return [run_id, algo, mode, n, k,
            delta if algo == "iamp" else "", eta if algo == "iamp" else "",
            L, seed, round(eps, 6), cut.u_value,
            round(sign * cut.normalized, 6), cut.edges_cut, cut.balance,
            round(wall, 1)]


def _parse_seeds(args):
    if args.seeds:
        return [int(s) for s in args.seeds.split(",")]
    return [args.seed]


def cmd_run(args):
    seeds = _parse_seeds(args)
    L = args.L
    sol = None
    if args.algo == "iamp":
        if args.solution_file:
            sol = parisi.load_solution(args.solution_file)
        elif args.gamma_file:
            sol = parisi.solve_pde(load_gamma(args.gamma_file))
        else:
            raise SystemExit("iamp needs --gamma-file or --solution-file")
        if int(np.floor((1 - args.eta) / args.delta + 1e-9)) < 1:
            raise SystemExit("L = floor((1-eta)/delta) must be >= 1")
    payloads = [(args.n, args.k, s, args.algo, args.mode, args.delta,
                 args.eta, L, sol, args.xi_mode, args.mc_reps) for s in seeds]
    if args.workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as ex:
            rows = list(ex.map(_run_one, payloads))
    else:
        rows = [_run_one(p) for p in payloads]
    _emit(rows, RUN_COLUMNS, args.out, args.format)
    return 0


def cmd_oracle(args):
    if args.graph_file:
        g = graph.load_graph(args.graph_file)
    else:
        g = graph.generate_random_regular(args.n, args.k, args.seed)
    exact = oracle.brute_force(g, args.mode)
    print(f"{args.mode} value = {exact.value}")
    print("witness = " + "".join("+" if s > 0 else "-" for s in exact.witness))
    return 0


class _ScaledCoeff(engine.Schedule):
    """Wraps a schedule with mis-scaled edge coefficients (diag canary)."""

    def __init__(self, inner, factor):
        self.inner = inner
        self.factor = factor
        self.delta, self.L, self.K = inner.delta, inner.L, inner.K * factor
        self.descriptor = inner.descriptor + f"*{factor}"

    def init_state(self, u0):
        return self.inner.init_state(u0)

    def step(self, state, ell, u_new):
        return self.inner.step(state, ell, u_new)

    def coeff(self, state, ell):
        return self.factor * np.asarray(self.inner.coeff(state, ell))

    def vertex_coeff(self, state, ell):
        return self.inner.vertex_coeff(state, ell)


def _per_round_A2(k, sched, samples, seed):
    """Per-round empirical (E[A^2], SE) along the degree-k message law."""
    u, _ = engine.sample_message_population(k, sched, sched.L, samples, seed,
                                            pop_size=100 * k)
    state = sched.init_state(u[0])
    out = []
    for ell in range(sched.L):
        a2 = np.broadcast_to(np.asarray(sched.coeff(state, ell), float) ** 2,
                             (samples,))
        out.append((float(a2.mean()),
                    float(a2.std(ddof=1) / np.sqrt(samples)) or 1e-12))
        state = sched.step(state, ell + 1, u[ell + 1])
    return out


def cmd_diag(args):
    rows = []

    def check(name, stat, value, tol, se=0.0):
        ok = abs(value) <= tol
        rows.append([name, stat, round(float(value), 6), round(float(se), 6),
                     tol, "pass" if ok else "FAIL"])
        return ok

    all_ok = True
    # heat-equation closed form
    sol0 = parisi.solve_pde(parisi.GammaStep.constant(0.0))
    all_ok &= check("pde_gamma0", "phi00_error",
                    sol0.value_at_origin() - np.sqrt(2 / np.pi), 5e-4)
    # constant-gamma closed forms
    for gv in (0.5, 1.0, 2.0):
        s = parisi.solve_pde(parisi.GammaStep.constant(gv))
        err = 0.0
        mask = np.abs(s.x_grid) <= 3.0
        for tv in (0.0, 0.5):
            i = int(round(tv / s.dt))
            ref = parisi.cole_hopf_reference(gv, tv, s.x_grid[mask])
            err = max(err, float(np.abs(s.phi[i, mask] - ref).max()))
        all_ok &= check("cole_hopf", f"supnorm_g{gv}", err, 1e-3)

    gamma = load_gamma(args.gamma_file)
    sol = parisi.solve_pde(gamma)
    # optimal-gamma identities along the diffusion
    paths = parisi.simulate_sde(sol, args.sde_paths, seed=11)
    rep = parisi.check_identities(sol, paths)
    worst = 0.0
    for tv in np.arange(0.1, 0.95, 0.1):
        m2, _ = rep.at_time(tv)
        worst = max(worst, abs(m2 - 1.0))
    all_ok &= check("identities", "max|E[a^2]-1|", worst, 0.02)
    all_ok &= check("identities", "integral_vs_P",
                    rep.time_integral - rep.parisi_value, 0.01,
                    se=rep.time_integral_se)

    # two-term correlation formula vs direct tree Monte Carlo
    cfg = wave.WaveConfig.make(5, 1)
    wsched = wave.make_wave_schedule(cfg)
    for name, sched in [
            ("wave", wsched),
            ("iamp", iamp.build_schedule(sol, args.delta, args.eta,
                                         mc_reps=args.mc_reps, seed=13))]:
        if name == "iamp":
            sched.L = 5  # truncated run is still a valid schedule
        direct, se_d = engine.tree_monte_carlo(4, sched, args.tree_reps, 17)
        rhs, se_r, _, _ = engine.prop26_rhs(4, sched, args.tree_reps, 19)
        se = np.hypot(se_d, se_r)
        all_ok &= check("edge_corr_formula", f"{name}_diff", direct - rhs,
                        3 * se, se=se)
        if name == "wave":
            closed = wave.predicted_edge_correlation(cfg, 4)
            all_ok &= check("edge_corr_formula", "wave_vs_closed",
                            direct - closed, 3 * se_d, se=se_d)

    # normalization of the edge coefficients at finite degree
    sched = iamp.build_schedule(sol, args.delta, args.eta,
                                xi_mode=f"finite_k:{args.norm_k}",
                                mc_reps=args.norm_samples, seed=23)
    if args.inject_bug:
        sched = _ScaledCoeff(sched, 1.1)
    for ell, (m, se) in enumerate(_per_round_A2(args.norm_k, sched,
                                                args.norm_samples, 29)):
        all_ok &= check("normalization", f"E[A^2]_round{ell}", m - 1.0,
                        max(3 * se, 1e-3), se=se)

    # large-degree normality of the message vector
    csched = iamp.build_schedule(sol, args.delta, args.eta,
                                 mc_reps=args.mc_reps, seed=31)
    csched.L = 5
    clt = engine.clt_diagnostics(2000, csched, args.clt_samples, 37)
    all_ok &= check("clt", "max_ks", clt.ks.max(), 0.02)
    off = clt.cov - np.eye(clt.cov.shape[0])
    all_ok &= check("clt", "max_offdiag_cov",
                    float(np.abs(off).max()), 3 * clt.cov_se, se=clt.cov_se)

    _emit(rows, DIAG_COLUMNS, args.out, args.format)
    return 0 if all_ok else 1


def cmd_bench(args):
    rows = []
    t0 = time.perf_counter()
    parisi.solve_pde(parisi.GammaStep.constant(1.0))
    rows.append(["pde_solve_default", round((time.perf_counter() - t0) * 1e3, 1)])
    g = graph.generate_random_regular(args.n, args.k, args.seed)
    sched = wave.make_wave_schedule(wave.WaveConfig.make(args.L, 1))
    t0 = time.perf_counter()
    engine.run(g, sched, args.seed)
    dt = time.perf_counter() - t0
    rows.append([f"wave_run_n{args.n}_k{args.k}_L{args.L}", round(dt * 1e3, 1)])
    rows.append(["edge_updates_per_sec",
                 round(args.n * args.k * args.L / dt)])
    for name, ms in rows:
        print(f"{name}: {ms}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="cutmp")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--out")
        sp.add_argument("--format", choices=["csv", "json"], default="csv")

    sp = sub.add_parser("gamma-fit")
    sp.add_argument("--m", type=int, default=8)
    sp.add_argument("--budget", type=int, default=5000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_gamma_fit)

    sp = sub.add_parser("pde-solve")
    sp.add_argument("--gamma-file")
    sp.add_argument("--gamma-const", type=float, default=0.0)
    sp.add_argument("--mt", type=int, default=parisi.DEFAULT_M_T)
    sp.add_argument("--mx", type=int, default=parisi.DEFAULT_M_X)
    sp.add_argument("--xmax", type=float, default=parisi.DEFAULT_X_MAX)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_pde_solve)

    sp = sub.add_parser("run")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--seeds")
    sp.add_argument("--algo", choices=["wave", "iamp"], default="wave")
    sp.add_argument("--mode", choices=["maxcut", "minbis"], default="minbis")
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--eta", type=float, default=0.1)
    sp.add_argument("--L", type=int, default=20)
    sp.add_argument("--gamma-file")
    sp.add_argument("--solution-file")
    sp.add_argument("--xi-mode", default="large_k")
    sp.add_argument("--mc-reps", type=int, default=100_000)
    sp.add_argument("--workers", type=int, default=_default_workers())
    common(sp)
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("oracle")
    sp.add_argument("--n", type=int, default=12)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--graph-file")
    sp.add_argument("--mode", choices=["maxcut", "minbis"], default="maxcut")
    sp.set_defaults(fn=cmd_oracle)

    sp = sub.add_parser("diag")
    sp.add_argument("--gamma-file", required=True)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--eta", type=float, default=0.1)
    sp.add_argument("--sde-paths", type=int, default=100_000)
    sp.add_argument("--mc-reps", type=int, default=100_000)
    sp.add_argument("--tree-reps", type=int, default=10_000)
    sp.add_argument("--norm-k", type=int, default=500)
    sp.add_argument("--norm-samples", type=int, default=10_000)
    sp.add_argument("--clt-samples", type=int, default=10_000)
    sp.add_argument("--inject-bug", action="store_true")
    common(sp)
    sp.set_defaults(fn=cmd_diag)

    sp = sub.add_parser("bench")
    sp.add_argument("--n", type=int, default=20000)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--L", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_bench)
    return p


def _apply_config(argv):
    """Insert flags from a 'key value' config file after the subcommand;
    explicit command-line flags still win (last occurrence)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    argv = argv[:i] + argv[i + 2:]
    extra = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.replace("=", " ").partition(" ")
            extra += [f"--{key}", val.strip()]
    return argv[:1] + extra + argv[1:]


def main(argv=None):
    argv = _apply_config(list(sys.argv[1:] if argv is None else argv))
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
