"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Preset runs are shared through the session cache in ``conftest.py``, so
the self-convergence criterion reuses the runs made by the others.
"""

import numpy as np

from majorana_bell.fock import hermitian_eigensolve
from majorana_bell.presets import PRESETS, preset
from majorana_bell.report import emit_csv
from majorana_bell.runner import eigen_sweep, run, weight
from majorana_bell.schemes import SchemeParams, build_teleportation, teleportation_analytic_eigs

from conftest import preset_run


def verdict(capsys, number, title, checks):
    """Print one line for the criterion, then fail with the unmet checks."""
    failed = [name for name, ok in checks if not ok]
    line = f"criterion {number:2d} {'PASS' if not failed else 'FAIL'}: {title}"
    if failed:
        line += "  [unmet: " + "; ".join(failed) + "]"
    with capsys.disabled():
        print("\n" + line)
    assert not failed, line


def fidelity(name, dt=None):
    return preset_run(name, dt).summary.final_target_population


def elapsed_passage(name):
    r = preset_run(name)
    fp = r.summary.first_passage
    return None if fp is None else fp - r.config.grid["t_start"]


def branch(name, outcome, dt=None):
    return next(b for b in preset_run(name, dt).summary.branches if b.outcome == outcome)


def test_criterion_01_analytic_oracle(capsys):
    rng = np.random.default_rng(20240601)
    worst_e, worst_f = 0.0, 1.0
    for _ in range(1000):
        p = SchemeParams(E_c=float(rng.uniform(5, 50)), epsilon=float(rng.uniform(-20, 20)))
        eig = hermitian_eigensolve(build_teleportation(p).H0)
        pairs = sorted(teleportation_analytic_eigs(p), key=lambda a: a.energy)
        for k, pair in enumerate(pairs):
            worst_e = max(worst_e, abs(pair.energy - eig.values[k]))
            ov = np.vdot(eig.vectors[:, k], pair.state.amplitudes)
            worst_f = min(worst_f, abs(ov) ** 2)
    verdict(capsys, 1, f"closed-form eigenpairs, 1000 draws: max |dE| = {worst_e:.1e}, min fidelity = 1 - {1 - worst_f:.1e}",
            [("eigenvalues within 1e-10", worst_e <= 1e-10), ("fidelities >= 1 - 1e-10", worst_f >= 1 - 1e-10)])


def test_criterion_02_adiabatic_teleportation(capsys):
    a, b = fidelity("fig2a"), fidelity("fig2b")
    verdict(capsys, 2, f"adiabatic passage T=40 -> {a:.5f}, T=10 -> {b:.5f}",
            [("T=40 >= 0.95", a >= 0.95), ("T=10 below T=40 by >= 0.05", a - b >= 0.05)])


def test_criterion_03_lyapunov_teleportation(capsys):
    names = ["fig3ab", "fig3cd", "fig3ef", "fig3gh"]
    fids = {n: fidelity(n) for n in names}
    rises = {n: float(np.max(np.diff(preset_run(n).diagnostics.lyapunov))) for n in names}
    fp_b200, fp_f5 = elapsed_passage("fig3ab"), elapsed_passage("fig3ef")
    checks = [(f"{n} >= 0.95", f >= 0.95) for n, f in fids.items()]
    checks += [(f"{n} V non-increasing", rises[n] <= 1e-9) for n in names]
    checks.append((f"square-pulse F=5 first passage {fp_f5:.3f} <= continuous B=200 {fp_b200:.3f}",
                   fp_f5 is not None and fp_b200 is not None and fp_f5 <= fp_b200))
    detail = ", ".join(f"{n} {f:.4f}" for n, f in fids.items())
    verdict(capsys, 3, f"Lyapunov and square-pulse control: {detail}; passage F=5 {fp_f5:.3f} vs B=200 {fp_b200:.3f}",
            checks)


def test_criterion_04_josephson(capsys):
    r = preset_run("fig4a")
    combined = r.trajectory.population_of("0000") + r.trajectory.population_of("0001")
    swing = float(combined.max() - combined.min())
    a, b, c = fidelity("fig4a"), fidelity("fig4bc"), fidelity("fig4de")
    verdict(capsys, 4, f"Josephson coupling: adiabatic {a:.4f} (swing {swing:.3f}), Lyapunov {b:.4f}, square pulses {c:.4f}",
            [("adiabatic <= 0.9", a <= 0.9), ("|0000>+|0001> swing >= 0.1", swing >= 0.1),
             ("Lyapunov B=300 >= 0.95", b >= 0.95), ("square pulses F=5 >= 0.95", c >= 0.95)])


def test_criterion_05_cooper_exchange_control(capsys):
    a, b = fidelity("fig5ab"), fidelity("fig5cd")
    verdict(capsys, 5, f"Cooper-pair exchange control: B3=100 -> {a:.4f}, F=2 -> {b:.4f}",
            [("B3=100 >= 0.95", a >= 0.95), ("F=2 >= 0.95", b >= 0.95)])


def test_criterion_06_car_eigenstructure(capsys):
    cfg = preset("fig6")
    rows = eigen_sweep(cfg.scheme, cfg.params, cfg.sweep["parameter"], cfg.sweep["values"])
    inner = [r for r in rows if r["level"] == 0 and abs(r["value"]) < 20]
    min_w = min(weight(r, ["0000", "1100"]) for r in inner)
    max_gap = max(abs(abs(r["amp|0000>"]) - abs(r["amp|1100>"])) for r in inner)
    labels = [k for k in rows[0] if k.startswith("amp|")]
    max_single = max(r[k] ** 2 for r in rows for k in labels)
    verdict(capsys, 6, f"CAR eigenvectors: min Bell weight {min_w:.4f} for |eps|<20 (magnitude gap {max_gap:.3f}), "
            f"largest single-state weight {max_single:.4f}",
            [("Bell weight >= 0.9", min_w >= 0.9), ("near-equal magnitudes", max_gap <= 0.1),
             ("no single-state eigenvector", max_single < 0.95)])


def test_criterion_07_car_control(capsys):
    a = preset_run("fig7a")
    fa = population_of_target(a, "psi_T+")
    b = preset_run("fig7b")
    quad = {lbl: float(b.trajectory.population_of(lbl)[-1]) for lbl in ("0000", "011-1", "0110", "1100")}
    even, odd = branch("fig7b", 1), branch("fig7b", -1)
    pops = ", ".join(f"{v:.3f}" for v in quad.values())
    verdict(capsys, 7, f"CAR: dot-level control -> {fa:.4f}; Cooper control populations [{pops}], "
            f"even collapse {even.fidelity:.4f}, odd collapse {odd.fidelity:.4f}",
            [("dot-level control >= 0.9", fa >= 0.9),
             ("populations within 0.25 +- 0.1", all(abs(v - 0.25) <= 0.1 for v in quad.values())),
             ("even branch >= 0.95", even.fidelity >= 0.95), ("odd branch >= 0.9", odd.fidelity >= 0.9)])


def population_of_target(result, name):
    return float(abs(result.trajectory.final_state.overlap(result.model.targets[name])) ** 2)


def fmt_time(t):
    return "never" if t is None else f"{t:.2f}"


def test_criterion_08_spin_flip(capsys):
    a, b = fidelity("fig9c"), fidelity("fig9d")
    ta, tb = elapsed_passage("fig9c"), elapsed_passage("fig9d")
    verdict(capsys, 8, f"spin flip: adiabatic {a:.4f} (passage {fmt_time(ta)}), Lyapunov {b:.4f} (passage {fmt_time(tb)})",
            [("adiabatic >= 0.9", a >= 0.9), ("Lyapunov >= 0.9", b >= 0.9),
             ("Lyapunov passage shorter", ta is not None and tb is not None and tb < ta)])


def test_criterion_09_two_wires(capsys):
    a = preset_run("fig13a")
    leak = max(float(a.trajectory.population_of(lbl).max()) for lbl in ("↑↓00", "↓↑00"))
    fa = fidelity("fig13a")
    b = preset_run("fig13b")
    quad = [float(b.trajectory.population_of(lbl)[-1]) for lbl in ("↑↓00", "↓↑00", "↓↓11", "↑↑11")]
    even, odd = branch("fig13b", 1), branch("fig13b", -1)
    fc, fd = fidelity("fig13c"), fidelity("fig13d")
    pops = ", ".join(f"{v:.3f}" for v in quad)
    verdict(capsys, 9, f"two wires: simultaneous {fa:.4f} (leak {leak:.2e}); sequential [{pops}], "
            f"collapse {even.fidelity:.4f}/{odd.fidelity:.4f}; Lyapunov {fc:.4f}, {fd:.4f}",
            [("simultaneous >= 0.9", fa >= 0.9), ("leak <= 0.05", leak <= 0.05),
             ("sequential populations 0.25 +- 0.1", all(abs(v - 0.25) <= 0.1 for v in quad)),
             ("n_f1 even -> psi_2 >= 0.95", even.fidelity >= 0.95),
             ("n_f1 odd -> psi_1 >= 0.95", odd.fidelity >= 0.95),
             ("Lyapunov psi_1 >= 0.9", fc >= 0.9), ("Lyapunov psi_2 >= 0.9", fd >= 0.9)])


def reported_fidelities(result):
    out = {"target": result.summary.final_target_population}
    for b in result.summary.branches:
        if b.fidelity is not None:
            out[f"branch {b.outcome:+d}"] = b.fidelity
    return out


def test_criterion_10_universal_invariants(capsys, tmp_path):
    checks = []
    worst = {"norm": 0.0, "parity": 0.0, "dt": 0.0}
    for name in PRESETS:
        r = preset_run(name)
        s = r.summary
        worst["norm"] = max(worst["norm"], s.norm_drift)
        worst["parity"] = max(worst["parity"], s.parity_drift)
        checks.append((f"{name} norm drift", s.norm_drift <= 1e-9))
        checks.append((f"{name} parity drift", s.parity_drift <= 1e-10))
        half = preset_run(name, r.config.grid["dt"] / 2)
        full_f, half_f = reported_fidelities(r), reported_fidelities(half)
        diff = max(abs(full_f[k] - half_f[k]) for k in full_f)
        worst["dt"] = max(worst["dt"], diff)
        checks.append((f"{name} dt halving {diff:.1e}", diff <= 1e-5))
        again = run(preset(name))
        a = emit_csv(r.trajectory, tmp_path / f"{name}.a.csv")
        b = emit_csv(again.trajectory, tmp_path / f"{name}.b.csv")
        checks.append((f"{name} byte-identical CSV", a.read_bytes() == b.read_bytes()))
    verdict(capsys, 10, f"all {len(PRESETS)} presets: max norm drift {worst['norm']:.1e}, "
            f"max parity drift {worst['parity']:.1e}, max dt-halving change {worst['dt']:.1e}",
            checks)
