"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line for the behavior it gates and then
asserts every clause of that gate.  The drift-study standard-error
gates state reference magnitudes that this configuration does not
produce; those clauses are asserted as stated and left failing rather
than loosened, while the error clauses of the same checks are asserted
independently.
"""

from dataclasses import replace

import numpy as np

from fwdvol.calibration import VolQuote, fit
from fwdvol.charfn import integrate_ab
from fwdvol.driftfactor import closed_form_verification, drift_factor_result, k_sq_numeric
from fwdvol.mc import (
    McConfig,
    PayoffSpec,
    forward_reconstruct,
    price_payoff,
)
from fwdvol.model import integrated_variance
from fwdvol.pricing import (
    OptionSpec,
    atm_term_structure,
    black76_price,
    price,
    smile_slice,
)


def check(number: int, label: str, clauses) -> None:
    """Print one summary line for the gate, then assert each clause."""
    ok = all(flag for _, flag in clauses)
    detail = "; ".join(f"{text} [{'ok' if flag else 'FAIL'}]" for text, flag in clauses)
    print(f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {label}: {detail}")
    failed = [text for text, flag in clauses if not flag]
    assert not failed, f"criterion {number} failed: {failed}"


def test_lognormal_limit_matches_black76(fig1, curves, quad):
    p = replace(fig1, alpha=0.0)
    worst = 0.0
    for t_e, T in ((0.25, 0.25), (1.0, 1.0), (1.0, 2.0), (5.0, 5.0)):
        F = curves.forward(T)
        D = curves.discount(t_e)
        total_var = integrated_variance(0.0, t_e, T, p)
        for m in (0.5, 0.8, 1.0, 1.25, 2.0):
            K = m * F
            got = price(OptionSpec(t_e, T, K, "call"), curves, p, quad)
            want = black76_price(F, K, total_var, D, "call")
            worst = max(worst, abs(got - want) / want)
    check(1, "zero vol-of-vol pricing reduces to Black-76",
          [(f"max rel diff {worst:.2e} <= 1e-6", worst <= 1e-6)])


def test_gaussian_charfn_identity(fig1):
    p = replace(fig1, alpha=0.0)
    worst = 0.0
    for t_e, T in ((1.0, 1.0), (1.0, 2.0)):
        total_var = integrated_variance(0.0, t_e, T, p)
        for theta in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0):
            a_val, b_val = integrate_ab(theta, t_e, T, p)
            want = -0.5 * (theta * theta + 1j * theta) * total_var
            worst = max(worst, abs(a_val + b_val - want))
    check(2, "zero vol-of-vol exponent collapses to the Gaussian one",
          [(f"max abs diff {worst:.2e} <= 1e-8", worst <= 1e-8)])


def test_transform_and_simulation_price_alike(fig1, curves, quad):
    F = curves.forward(1.0)
    analytic = price(OptionSpec(1.0, 1.0, F, "call"), curves, fig1, quad)
    cfg = McConfig(
        n_paths=100_000,
        n_steps=100,
        horizon=1.0,
        seed=3,
        exact_settlements=(1.0,),
    )
    est = price_payoff(PayoffSpec("vanilla", F, t_e=1.0, T=1.0), cfg, curves, fig1)
    gap = abs(est.value - analytic)
    check(3, "ATM vanilla, transform pricer vs 100k-path simulation",
          [(f"|MC - Fourier| {gap:.2e} <= 3 se ({3 * est.std_error:.2e})",
            gap <= 3.0 * est.std_error)])


def test_atm_vol_decays_with_expiry(fig1, curves, quad):
    pairs = atm_term_structure((0.25, 0.5, 1.0, 2.0, 3.0, 5.0), curves, fig1, quad)
    vols = [vol for _, vol in pairs]
    drops = [vols[i + 1] < vols[i] for i in range(len(vols) - 1)]
    check(4, "ATM implied vol strictly decreasing in expiry",
          [("vols " + ", ".join(f"{v:.4f}" for v in vols), all(drops))])


def test_drift_study_forward_error(drift_study):
    rows = {row.alpha: row for row in drift_study}
    worst = max(abs(row.fwd_err_bp) for row in drift_study)
    se3 = rows[3.0].fwd_stderr_bp
    check(5, "drift approximation, forward error", [
        (f"alpha=0 error {rows[0.0].fwd_err_bp:.2e}bp exact to 1e-12 relative",
         abs(rows[0.0].fwd_err_bp) <= 1e-8),
        (f"max |error| {worst:.3f}bp <= 2bp", worst <= 2.0),
        (f"stderr at alpha=3 {se3:.1f}bp within 78 +/- 25% [58.5, 97.5]",
         58.5 <= se3 <= 97.5),
    ])


def test_drift_study_atm_vol_error(drift_study):
    worst = max(abs(row.atm_vol_err_pct) for row in drift_study)
    ses = [row.atm_vol_stderr_pct for row in drift_study]
    se_text = ", ".join(f"{se:.2f}" for se in ses)
    check(6, "drift approximation, ATM implied-vol error", [
        (f"max |error| {worst:.4f} vol pts <= 0.01", worst <= 0.01),
        (f"stderr {se_text} within 0.14 +/- 50% [0.07, 0.21]",
         all(0.07 <= se <= 0.21 for se in ses)),
    ])


def test_drift_study_otm_vol_error(drift_study):
    worst = max(abs(row.otm_vol_err_pct) for row in drift_study)
    ses = [row.otm_vol_stderr_pct for row in drift_study]
    se_text = ", ".join(f"{se:.2f}" for se in ses)
    check(7, "drift approximation, OTM (1.4F) implied-vol error", [
        (f"max |error| {worst:.4f} vol pts <= 0.02", worst <= 0.02),
        (f"stderr {se_text} within [0.1, 0.8]",
         all(0.1 <= se <= 0.8 for se in ses)),
    ])


def test_closed_form_drift_factor_verified(fig1):
    report = closed_form_verification()
    result = drift_factor_result(0.5, 2.0, fig1)
    numeric = k_sq_numeric(0.5, 2.0, fig1)
    rel = abs(result.k_sq - numeric) / numeric
    check(8, "closed-form k^2 against the numeric oracle", [
        (f"sweep of {report.n_checked} tuples, max rel diff "
         f"{report.max_rel_diff:.2e} <= 1e-6",
         report.verified and report.n_checked >= 50 and report.max_rel_diff <= 1e-6),
        (f"dispatcher route '{result.method}' matches numeric to {rel:.2e}",
         rel <= 1e-6),
    ])


def test_drift_approximation_exact_limits(sec5, curves):
    from fwdvol.mc import _grid_with_inserted, _nearest_node, _simulate

    worst = {}
    for label, p in (
        ("alpha=0", replace(sec5, alpha=0.0)),
        ("beta1=beta2=0", replace(sec5, beta1=0.0, beta2=0.0)),
    ):
        cfg = McConfig(
            n_paths=20_000,
            n_steps=50,
            horizon=1.0,
            seed=11,
            exact_settlements=(2.0,),
        )
        times = _grid_with_inserted(cfg, (1.0,))
        node = _nearest_node(times, 1.0)
        state = _simulate(cfg, p, times, (node,), True)[node]
        exact = forward_reconstruct(state, 2.0, curves, p, "exact_per_T")
        approx = forward_reconstruct(state, 2.0, curves, p, "approximate")
        worst[label] = float(np.max(np.abs(approx - exact) / exact))
    check(9, "per-path drift approximation exact in both limits",
          [(f"{label}: max rel diff {value:.2e} <= 1e-12", value <= 1e-12)
           for label, value in worst.items()])


def test_pricing_and_simulation_properties(fig1, curves, quad):
    clauses = []

    F = curves.forward(2.0)
    D = curves.discount(1.0)
    strikes = [m * F for m in (0.5, 0.8, 1.0, 1.25, 2.0)]
    parity_gap = max(
        abs(price(OptionSpec(1.0, 2.0, K, "call"), curves, fig1, quad)
            - price(OptionSpec(1.0, 2.0, K, "put"), curves, fig1, quad)
            - D * (F - K))
        for K in strikes
    )
    clauses.append((f"put/call parity gap {parity_gap:.2e} <= 1e-10",
                    parity_gap <= 1e-10))

    grid = np.linspace(0.5 * F, 2.0 * F, 15)
    calls = [price(OptionSpec(1.0, 2.0, float(K), "call"), curves, fig1, quad)
             for K in grid]
    second_diffs = [calls[i - 1] - 2.0 * calls[i] + calls[i + 1]
                    for i in range(1, len(calls) - 1)]
    clauses.append((f"call convexity in strike, min curvature {min(second_diffs):.2e}",
                    all(d >= -1e-12 for d in second_diffs)))

    cfg = McConfig(
        n_paths=50_000,
        n_steps=50,
        horizon=1.0,
        seed=17,
        exact_settlements=(2.0,),
    )
    position = PayoffSpec("early_exercise", 0.0, t_e=1.0, T=2.0)
    est = price_payoff(position, cfg, curves, fig1)
    drift_gap = abs(est.value - curves.discount(1.0) * F)
    clauses.append((f"martingale gap {drift_gap:.2e} <= 4 se ({4 * est.std_error:.2e})",
                    drift_gap <= 4.0 * est.std_error))

    repeat = price_payoff(position, cfg, curves, fig1)
    clauses.append(("seed determinism, rerun bit-identical",
                    repeat.value == est.value and repeat.std_error == est.std_error))

    threaded = price_payoff(position, replace(cfg, threads=4), curves, fig1)
    clauses.append(("worker-count independence, 4 threads bit-identical",
                    threaded.value == est.value and threaded.std_error == est.std_error))

    check(10, "pricing and simulation invariants", clauses)


def test_calibration_roundtrip_recovers_atm_vols(fig1, curves):
    quotes = []
    for t_e in (0.5, 1.0, 2.0):
        F = curves.forward(t_e)
        strikes = [m * F for m in (0.8, 1.0, 1.2, 1.4)]
        for K, vol in smile_slice(strikes, t_e, t_e, curves, fig1):
            quotes.append(VolQuote(t_e=t_e, T=t_e, strike=K, market_vol=vol))

    factors = {"sigma": 1.2, "beta1": 0.8, "beta2": 1.2, "R": 0.8,
               "rho": 0.8, "beta": 1.2, "alpha": 0.8, "rho1": 1.2, "rho2": 0.8}
    start = replace(fig1, **{k: getattr(fig1, k) * f for k, f in factors.items()})
    result = fit(quotes, start, curves, budget=2000)

    worst = 0.0
    for quote in quotes:
        if abs(quote.strike - curves.forward(quote.t_e)) > 1e-12:
            continue
        (_, vol), = smile_slice([quote.strike], quote.t_e, quote.T, curves, result.params)
        worst = max(worst, abs(vol - quote.market_vol))
    check(11, "round-trip calibration from a +/-20% perturbed start", [
        (f"objective {result.objective:.2e} after {result.n_evals} evaluations",
         result.n_evals <= 2000),
        (f"worst ATM vol gap {100 * worst:.4f} vol pts <= 0.25", worst <= 0.0025),
    ])
