"""Exit criteria. Each test prints one PASS/FAIL line (also collected in the
terminal summary) and asserts its criterion at the stated tolerance and runtime."""

import time
from fractions import Fraction

import numpy as np
import pytest

from harper_ent import state_core as sc
from harper_ent.cli import main
from harper_ent.dynamics import EvolutionConfig, diffusion_exponent, evolve
from harper_ent.harper import HarperParams, ground_state, lambda_grid, lambda_sweep
from harper_ent.oracle import verify_block_formula
from harper_ent.verification import random_block

S144 = Fraction(89, 144)
FIB_SIGMA = {34: Fraction(21, 34), 55: Fraction(34, 55), 89: Fraction(55, 89), 144: S144}


def test_c1_oracle_equivalence(acceptance_report):
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    worst, count = 0.0, 0
    for n in range(2, 13):
        for _ in range(100):
            state = sc.random_state(n, rng)
            report = verify_block_formula(state, random_block(n, rng))
            worst = max(worst, report.abs_diff)
            count += 1
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 60
    acceptance_report("C1 oracle equivalence", ok,
                      f"{count} cases, max |diff| = {worst:.2e} (< 1e-10), {elapsed:.1f}s (< 60s)")
    assert ok


def test_c2_averaging_identity(acceptance_report):
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for n in range(2, 13):
        for _ in range(100):
            state = sc.random_state(n, rng)
            for L in range(n + 1):
                diff = abs(sc.average_block_entropy_enumerated(state, L)
                           - 2 * L * (n - L) / (n * (n - 1)) * sc.state_linear_entropy(state))
                worst = max(worst, diff)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-12 and elapsed < 60
    acceptance_report("C2 averaging identity", ok,
                      f"max |enumerated - closed| = {worst:.2e} (< 1e-12), {elapsed:.1f}s (< 60s)")
    assert ok


def test_c3_w_state_values(acceptance_report):
    worst, half_worst = 0.0, 0.0
    for n in range(2, 13):
        w = sc.w_state(n)
        for L in range(n + 1):
            worst = max(worst, abs(sc.average_block_entropy(w, L) - 2 * L * (n - L) / n**2))
        if n % 2 == 0:
            half_worst = max(half_worst, abs(sc.average_block_entropy(w, n // 2) - 0.5))
    ok = worst < 1e-14 and half_worst < 1e-14
    acceptance_report("C3 W-state values", ok,
                      f"max dev {worst:.2e}, L=N/2 dev from 1/2 {half_worst:.2e} (< 1e-14)")
    assert ok


def test_c4_identity_chain(acceptance_report):
    rng = np.random.default_rng(4)
    n = 100
    worst = {"E_s=1-1/(Np)": 0.0, "<C2>=4E_s/(N(N-1))": 0.0, "E_L=L(N-L)/2<C2>": 0.0}
    for _ in range(1000):
        s = sc.random_state(n, rng)
        e_s, p, c2 = sc.state_linear_entropy(s), sc.participation_ratio(s), sc.mean_square_concurrence(s)
        worst["E_s=1-1/(Np)"] = max(worst["E_s=1-1/(Np)"], abs(e_s - (1 - 1 / (n * p))))
        worst["<C2>=4E_s/(N(N-1))"] = max(worst["<C2>=4E_s/(N(N-1))"], abs(c2 - 4 / (n * (n - 1)) * e_s))
        L = int(rng.integers(0, n + 1))
        diff = abs(sc.average_block_entropy(s, L) - L * (n - L) / 2 * c2)
        worst["E_L=L(N-L)/2<C2>"] = max(worst["E_L=L(N-L)/2<C2>"], diff)
    ok = all(v < 1e-12 for v in worst.values())
    acceptance_report("C4 identity chain", ok,
                      ", ".join(f"{k}: {v:.1e}" for k, v in worst.items()) + " (< 1e-12)")
    assert ok


def test_c5_fig1_transition(acceptance_report):
    start = time.perf_counter()
    lams = lambda_grid(0.0, 2.0, 0.02)
    rows = lambda_sweep(144, lams, 1, S144, "periodic")
    e = np.array([r.e_avg for r in rows])
    below = e[lams <= 0.9 + 1e-9].mean()
    above = e[(lams >= 1.1 - 1e-9) & (lams <= 2.0 + 1e-9)].mean()
    near_free = lambda_sweep(144, [0.05], 1, S144)[0].e_avg
    target = 2 / 144 * (1 - 1 / 144)
    rel = abs(near_free - target) / target
    maxima = [max(r.e_avg for r in lambda_sweep(n, lams, 1, FIB_SIGMA[n])) for n in (34, 55, 89, 144)]
    decreasing = all(a > b for a, b in zip(maxima, maxima[1:]))
    elapsed = time.perf_counter() - start
    ok = below > 5 * above and rel < 0.10 and decreasing and elapsed < 300
    acceptance_report(
        "C5 Fig.1 transition", ok,
        f"mean[0,0.9]/mean[1.1,2] = {below / above:.2f} (> 5); E(0.05) rel dev {rel:.2e} (< 0.1); "
        f"max over sweep N=34..144 = {', '.join(f'{m:.4f}' for m in maxima)} (decreasing); {elapsed:.1f}s",
    )
    assert ok


def test_c6_fig2_localization(acceptance_report):
    start = time.perf_counter()
    loc = sc.entropy_distribution(ground_state(HarperParams(144, 2.0, S144)).state)
    top5 = np.sort(loc)[-5:].sum() / loc.sum()
    ext = sc.entropy_distribution(ground_state(HarperParams(144, 0.5, S144)).state)
    cv = ext.std() / ext.mean()
    elapsed = time.perf_counter() - start
    ok = top5 > 0.9 and cv < 0.5 and elapsed < 30
    acceptance_report("C6 Fig.2 localization", ok,
                      f"lambda=2 top-5 share {top5:.4f} (> 0.9); lambda=0.5 CV {cv:.3f} (< 0.5); {elapsed:.2f}s")
    assert ok


def test_c7_free_lattice_bessel(acceptance_report):
    from scipy.special import jv

    start = time.perf_counter()
    run = evolve(HarperParams(144, 0.0, S144), EvolutionConfig(t_max=20.0, dt=0.1))
    m = np.arange(1, 145) - run.initial_site
    exact = np.array([(-1j) ** m * jv(m, t) for t in run.times])
    amp_dev = np.max(np.abs(run.amplitudes - exact))
    t = run.times
    win = (t >= 2) & (t <= 20)
    var_rel = np.max(np.abs(run.variances[win] - t[win] ** 2 / 2) / (t[win] ** 2 / 2))
    elapsed = time.perf_counter() - start
    ok = amp_dev < 1e-6 and var_rel < 0.01 and elapsed < 30
    acceptance_report("C7 free-lattice Bessel oracle", ok,
                      f"max amplitude dev {amp_dev:.2e} (< 1e-6); variance rel dev {var_rel:.2e} (< 1%); "
                      f"{elapsed:.2f}s")
    assert ok


def test_c8_diffusion_regimes(acceptance_report):
    start = time.perf_counter()
    cfg = EvolutionConfig(t_max=100.0, dt=0.1)
    ext = evolve(HarperParams(144, 0.5, S144), cfg)
    crit = evolve(HarperParams(144, 1.0, S144), cfg)
    loc = evolve(HarperParams(144, 1.5, S144), cfg)
    # windows end before the packet reaches the chain ends
    a_ext = diffusion_exponent(ext, 10.0)
    a_crit = diffusion_exponent(crit, 5.0, 40.0)
    hit = loc.boundary_hit_time
    valid = loc.times < hit if hit is not None else np.ones(loc.times.size, bool)
    var5 = loc.variances[np.argmin(np.abs(loc.times - 5.0))]
    ratio = loc.variances[valid].max() / var5
    elapsed = time.perf_counter() - start
    ok = (1.8 <= a_ext.alpha <= 2.2 and 0.75 <= a_crit.alpha <= 1.25 and ratio < 4 and elapsed < 300)
    acceptance_report(
        "C8 diffusion regimes", ok,
        f"lambda=0.5 alpha={a_ext.alpha:.3f} on [{a_ext.t_lo:g},{a_ext.t_hi:g}] (in [1.8,2.2]); "
        f"lambda=1 alpha={a_crit.alpha:.3f} on [5,40] (in [0.75,1.25]); "
        f"lambda=1.5 max var / var(5) = {ratio:.2f} (< 4); {elapsed:.1f}s",
    )
    assert ok


def test_c9_unitarity_and_determinism(acceptance_report, tmp_path):
    drifts = []
    for lam in (0.0, 0.5, 1.0, 1.5, 2.0):
        run = evolve(HarperParams(144, lam, S144), EvolutionConfig(t_max=100.0, dt=0.1))
        drifts.append(float(np.max(np.abs(run.norms - 1.0))))
    identical = True
    for cmd in (
        ["dynamics", "--n-sites", "144", "--lambda", "0.5,1,1.5", "--exponent-window", "5,40"],
        ["verify", "--max-n", "8", "--states", "20", "--seed", "7"],
        ["ground-sweep", "--n-sites", "55,89", "--lambda-step", "0.1"],
    ):
        outs = []
        for rep in ("a", "b"):
            out = tmp_path / cmd[0] / rep
            assert main(cmd + ["--out", str(out)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
        identical &= outs[0] == outs[1] and bool(outs[0])
    ok = max(drifts) < 1e-12 and identical
    acceptance_report("C9 unitarity and determinism", ok,
                      f"max norm drift {max(drifts):.2e} (< 1e-12); repeated CSVs byte-identical: {identical}")
    assert ok
