"""Acceptance suite: one test per quantitative claim the library must
reproduce at desk scale.  Each test prints a single PASS line with its
measured numbers when it succeeds (run pytest with -s to see them inline).

The heavyweight replication runs (criteria 3 and 4) share session fixtures;
criterion 10 replays parts of them to check byte-level determinism, and the
raw/summary CSVs of criterion 3 are left under tests/_results for the
plotting frontend to consume.
"""

import itertools
import math
from pathlib import Path

import numpy as np
import pytest

from commsim import (CompressorSpec, CompressorState, LeastSquaresSpec,
                     adiana_schedule_sc, aggregate_variance, canita_schedule,
                     compute_tcc, contraction_rate_bound, empirical_moments,
                     floor_audit, gen_constructed_quadratic, gen_least_squares,
                     gen_zero_chain_sc, min_bits_lower_bound, preset_schedule,
                     prog, run_adiana, run_diana, run_ef21, run_nesterov,
                     simulate_progress, summarize_traces, tcc_dominates,
                     write_summary_csv, write_traces_csv)
from commsim.algorithms import PRESETS

RESULTS = Path(__file__).parent / "_results"


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# Shared ensembles
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def quadratic():
    return gen_constructed_quadratic(mu=1.0, L=1e4, d=20, n=400)


@pytest.fixture(scope="session")
def ls_problem():
    return gen_least_squares(LeastSquaresSpec(n=400, M=25, d=20, cond=100.0, seed=7))


def run_fig1_series(problem, preset_name, T, trials, base_seed=1000):
    entry = PRESETS[preset_name]
    if entry["algorithm"] == "nesterov":
        tr = run_nesterov(problem, eta=entry["eta"], theta=entry["theta"], T=T,
                          checkpoint_every=1)
        return [tr] * trials
    comp = entry["compressor"]
    spec = CompressorSpec(comp["kind"], d=problem.d, s=comp["s"],
                          randomness=comp["randomness"])
    sched = preset_schedule(preset_name, mu=problem.mu, omega=spec.omega)
    return [run_adiana(problem, spec, sched, T=T, seed=base_seed + t,
                       checkpoint_every=1) for t in range(trials)]


@pytest.fixture(scope="session")
def fig1_ensembles(quadratic):
    out = {
        "nesterov": run_fig1_series(quadratic, "fig1-nesterov", T=1000, trials=20),
        "adiana-id-rand1": run_fig1_series(quadratic, "fig1-adiana-id-rand1",
                                           T=2500, trials=20),
        "adiana-sd-rand1": run_fig1_series(quadratic, "fig1-adiana-sd-rand1",
                                           T=2500, trials=20),
    }
    RESULTS.mkdir(exist_ok=True)
    for name, traces in out.items():
        write_traces_csv(traces, RESULTS / f"fig1_{name}_raw.csv")
        write_summary_csv(summarize_traces(traces), RESULTS / f"fig1_{name}_summary.csv")
    return out


@pytest.fixture(scope="session")
def fig2_ensembles(ls_problem):
    rs1 = CompressorSpec("random_s", d=20, s=1)
    urs1 = CompressorSpec("unscaled_random_s", d=20, s=1)
    sched = preset_schedule("fig2-ls-adiana-rand1", mu=ls_problem.mu, omega=rs1.omega)
    gamma_d = PRESETS["fig2-ls-diana-rand1"]["gamma"]
    gamma_e = PRESETS["fig2-ls-ef21-rand1"]["gamma"]
    out = {
        "adiana": [run_adiana(ls_problem, rs1, sched, T=3500, seed=100 + t,
                              checkpoint_every=1) for t in range(20)],
        "diana": [run_diana(ls_problem, rs1, gamma_d, T=12000, seed=100 + t,
                            checkpoint_every=1) for t in range(20)],
        "ef21": [run_ef21(ls_problem, urs1, gamma_e, T=12000, seed=100 + t,
                          checkpoint_every=1) for t in range(20)],
    }
    RESULTS.mkdir(exist_ok=True)
    for name, traces in out.items():
        write_summary_csv(summarize_traces(traces), RESULTS / f"fig2_{name}_summary.csv")
    return out


# ---------------------------------------------------------------------------
# 1. Compressor unbiasedness and variance
# ---------------------------------------------------------------------------

def test_criterion_1_unbiasedness_and_variance():
    d, trials = 20, 10_000
    rng = np.random.default_rng(0)
    x = rng.standard_normal(d)
    xn2 = float(x @ x)
    worst_z, worst_ratio = 0.0, 0.0
    for kind, s in [("random_s", 1), ("random_s", 2), ("random_s", 4),
                    ("natural", None), ("quantize", None)]:
        st = CompressorState(CompressorSpec(kind, d=d, s=s), master_seed=3, n=1)
        samples = np.empty((trials, d))
        sq = 0.0
        for t in range(trials):
            y, _ = st.compress(0, t, 0, x)
            samples[t] = y
            diff = y - x
            sq += float(diff @ diff)
        mean = samples.mean(axis=0)
        se = samples.std(axis=0) / math.sqrt(trials) + 1e-15
        z = float(np.max(np.abs(mean - x) / se))
        worst_z = max(worst_z, z)
        assert z <= 4.0, f"{kind} s={s}: mean deviates {z:.2f} standard errors"
        var = sq / trials
        omega = st.spec.omega
        ratio = var / (omega * xn2)
        worst_ratio = max(worst_ratio, ratio)
        assert var <= omega * xn2 * 1.05, f"{kind} s={s}: variance ratio {ratio:.3f}"
        if kind == "random_s":
            exact = (d / s - 1) * xn2
            se_var = exact * math.sqrt(2.0 / trials) * 3
            assert abs(var - exact) <= 3 * se_var
    # exhaustive subset enumeration for small dimensions
    for dd in (2, 4, 8):
        xx = rng.standard_normal(dd)
        for s in range(1, dd + 1):
            tot = 0.0
            for keep in itertools.combinations(range(dd), s):
                y = np.zeros(dd)
                y[list(keep)] = xx[list(keep)] * (dd / s)
                tot += float((y - xx) @ (y - xx))
            assert tot / math.comb(dd, s) == pytest.approx(
                (dd / s - 1) * float(xx @ xx), rel=1e-12)
    report("criterion 1 (unbiasedness/variance)", True,
           f"max mean z-score {worst_z:.2f} <= 4, max variance ratio {worst_ratio:.3f} <= 1.05")


# ---------------------------------------------------------------------------
# 2. Independence cancellation
# ---------------------------------------------------------------------------

def test_criterion_2_independence_cancellation():
    n, d, trials = 20, 20, 10_000
    omega = 19.0
    x = np.random.default_rng(1).standard_normal(d)
    xn2 = float(x @ x)
    ind = CompressorState(CompressorSpec("random_s", d=d, s=1), master_seed=5, n=n)
    v_ind = aggregate_variance(ind, x, trials)
    sh = CompressorState(CompressorSpec("random_s", d=d, s=1, randomness="shared"),
                         master_seed=5, n=n)
    v_sh = aggregate_variance(sh, x, trials)
    ok_ind = v_ind <= (omega / n) * xn2 * 1.05
    ok_sh = abs(v_sh - omega * xn2) <= 0.05 * omega * xn2
    report("criterion 2 (independence cancellation)", ok_ind and ok_sh,
           f"independent {v_ind:.4f} <= {(omega / n) * xn2 * 1.05:.4f}; "
           f"shared {v_sh:.2f} within 5% of {omega * xn2:.2f}")


# ---------------------------------------------------------------------------
# 3. Headline replication on the constructed quadratic
# ---------------------------------------------------------------------------

def test_criterion_3_constructed_quadratic_ordering(fig1_ensembles):
    eps = 1e-6
    nest = compute_tcc(fig1_ensembles["nesterov"], eps)
    ind = compute_tcc(fig1_ensembles["adiana-id-rand1"], eps)
    shared = compute_tcc(fig1_ensembles["adiana-sd-rand1"], eps)
    ok_id = tcc_dominates(fig1_ensembles["adiana-id-rand1"],
                          fig1_ensembles["nesterov"], eps)
    ok_sd = tcc_dominates(fig1_ensembles["nesterov"],
                          fig1_ensembles["adiana-sd-rand1"], eps)
    shared_txt = f"{shared.bits:.0f}" if shared.reached else \
        f"> {summarize_traces(fig1_ensembles['adiana-sd-rand1'])['bits_cum'][-1]:.0f} (unreached)"
    report("criterion 3 (independent beats uncompressed beats shared)",
           ok_id and ok_sd,
           f"bits at 1e-6: independent {ind.bits:.0f} < uncompressed {nest.bits:.0f} "
           f"< shared {shared_txt}")


# ---------------------------------------------------------------------------
# 4. Least-squares replication against the one-message baselines
# ---------------------------------------------------------------------------

def test_criterion_4_least_squares_ordering(fig2_ensembles):
    details = []
    ok_all = True
    for eps in (1e-2, 1e-4, 1e-6):
        a = compute_tcc(fig2_ensembles["adiana"], eps)
        beats_d = tcc_dominates(fig2_ensembles["adiana"], fig2_ensembles["diana"], eps)
        beats_e = tcc_dominates(fig2_ensembles["adiana"], fig2_ensembles["ef21"], eps)
        ok_all = ok_all and beats_d and beats_e
        d_tcc = compute_tcc(fig2_ensembles["diana"], eps)
        e_tcc = compute_tcc(fig2_ensembles["ef21"], eps)
        details.append(f"eps={eps:g}: adiana {a.bits:.0f} | diana "
                       f"{d_tcc.bits if d_tcc.reached else 'unreached'} | "
                       f"ef21 {e_tcc.bits if e_tcc.reached else 'unreached'}")
    report("criterion 4 (two-message accelerated method wins on least squares)",
           ok_all, "; ".join(str(s) for s in details))


# ---------------------------------------------------------------------------
# 5. Potential-function decay under the derived schedule
# ---------------------------------------------------------------------------

def test_criterion_5_lyapunov_decay(quadratic):
    spec = CompressorSpec("random_s", d=20, s=1)
    sched = adiana_schedule_sc(1e4, 1.0, 400, spec.omega)
    ratios = []
    for seed in range(50):
        tr = run_adiana(quadratic, spec, sched, T=500, seed=seed,
                        track_lyapunov=True, checkpoint_every=1)
        psi = np.array(tr.lyapunov)
        ratios.append(psi[1:] / psi[:-1])
    ratios = np.concatenate(ratios)
    bound = contraction_rate_bound(19.0, 1e4, 400)
    se = ratios.std(ddof=1) / math.sqrt(len(ratios))
    ok = ratios.mean() <= bound + 3 * se
    report("criterion 5 (potential decay rate)", ok,
           f"mean ratio {ratios.mean():.8f} <= bound {bound:.8f} + 3se ({3 * se:.2e})")


# ---------------------------------------------------------------------------
# 6. Suboptimality floor on the hard chain instance
# ---------------------------------------------------------------------------

def test_criterion_6_chain_floor():
    hard = gen_zero_chain_sc(L=1e4, mu=1.0, n=8, d=200, delta=1.0)
    spec = CompressorSpec("random_s", d=200, s=2)
    sched = adiana_schedule_sc(1e4, 1.0, 8, spec.omega)
    rows = floor_audit(hard, spec, sched, T=3000, seed=0)
    violations = [r for r in rows if not r.ok]
    margin = min(r.subopt / r.floor for r in rows if r.floor > 0)
    reach = max(r.prog for r in rows)
    report("criterion 6 (chain suboptimality floor)", not violations,
           f"{len(rows)} checkpoints, max prefix reach {reach}, "
           f"min suboptimality/floor ratio {margin:.6f} >= 1 - 1e-6")


# ---------------------------------------------------------------------------
# 7. Prefix-growth simulation
# ---------------------------------------------------------------------------

def test_criterion_7_progress_simulation():
    details = []
    ok_all = True
    for omega in (9.0, 19.0):
        T = int(100 * (1 + omega))
        stats = simulate_progress(omega, n=4, T=T, trials=1000, seed=11)
        ok = (stats.frac_within >= 1 - math.exp(-1)
              and abs(stats.mean_final - stats.expected_final)
              <= 0.10 * stats.expected_final)
        ok_all = ok_all and ok
        details.append(f"omega={omega:g}: mean {stats.mean_final:.1f} "
                       f"(predicted {stats.expected_final:.0f}), "
                       f"within-bound fraction {stats.frac_within:.3f}")
    report("criterion 7 (prefix-growth race)", ok_all, "; ".join(details))


# ---------------------------------------------------------------------------
# 8. Bit-cost formulas and the information floor
# ---------------------------------------------------------------------------

def test_criterion_8_bit_costs():
    checked = 0
    for d in range(1, 65):
        floor_like = {}
        for s in range(1, d + 1):
            spec = CompressorSpec("random_s", d=d, s=s)
            cost = spec.per_message_bits()
            assert cost == 64 * s + (math.comb(d, s) - 1).bit_length()
            assert cost >= min_bits_lower_bound(d, d / s - 1.0, 64)
            checked += 1
        for spec in (CompressorSpec("identity", d=d),
                     CompressorSpec("natural", d=d),
                     CompressorSpec("quantize", d=d)):
            assert spec.min_message_bits() >= min_bits_lower_bound(d, spec.omega, 64)
            checked += 1
    report("criterion 8 (per-message bit formulas)", True,
           f"{checked} (d, compressor) cells satisfy cost >= information floor")


# ---------------------------------------------------------------------------
# 9. Schedule arithmetic
# ---------------------------------------------------------------------------

def test_criterion_9_schedule_arithmetic():
    s = adiana_schedule_sc(1e4, 1.0, 400, 19.0)
    assert s.theta1(0) == pytest.approx(1 / 300, rel=1e-12)
    assert s.theta2 == pytest.approx(19 / 2340, rel=1e-12)
    assert s.eta(0) == pytest.approx(1 / 7020000, rel=1e-12)
    assert s.alpha == pytest.approx(1 / 20, rel=1e-12)
    assert s.gamma(0) == pytest.approx(1 / 46801, rel=1e-12)
    assert s.beta == pytest.approx(46800 / 46801, rel=1e-12)
    balanced = adiana_schedule_sc(1e4, 1.0, 400, 20.0)
    assert balanced.theta2 == pytest.approx(1 / 120, rel=1e-12)
    with pytest.raises(ValueError):
        adiana_schedule_sc(1e4, 1.0, 400, 0.0)

    c = canita_schedule(n=400, omega=19.0, t=5, L=1.0)
    assert c.b == pytest.approx(math.sqrt(19.0), rel=1e-12)
    assert c.beta0 == pytest.approx(498.25567490047877, rel=1e-12)
    assert c.p == pytest.approx(0.18660549686337075, rel=1e-12)
    assert c.beta == pytest.approx(72.02382995932656, rel=1e-12)
    assert c.theta == pytest.approx(0.07169732124424756, rel=1e-12)
    assert c.eta == pytest.approx(0.0020464070329685503, rel=1e-12)
    c0 = canita_schedule(n=16, omega=0.0, t=0, L=1.0)
    assert (c0.b, c0.beta0, c0.p, c0.beta) == (0.0, 4.5, 1.0, 0.0)
    assert c0.theta == pytest.approx(1 / 3, rel=1e-12)
    assert canita_schedule(n=16, omega=0.0, t=10 ** 5, L=1.0).eta == pytest.approx(
        1 / 1.5, rel=1e-9)
    report("criterion 9 (schedule arithmetic)", True,
           "strongly-convex and corrected-GC schedules match hand values to 1e-12")


# ---------------------------------------------------------------------------
# 10. End-to-end determinism
# ---------------------------------------------------------------------------

def test_criterion_10_determinism(quadratic, fig1_ensembles, tmp_path):
    replay = run_fig1_series(quadratic, "fig1-adiana-id-rand1", T=2500, trials=3)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_traces_csv(fig1_ensembles["adiana-id-rand1"][:3], a)
    write_traces_csv(replay, b)
    ok = a.read_bytes() == b.read_bytes()
    report("criterion 10 (byte-identical reruns)", ok,
           f"replayed raw CSV matches original ({a.stat().st_size} bytes)")
