"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them live).

The Monte Carlo criteria run at the scales they specify; seeds are fixed so
every run is bit-reproducible. Budget for the full module is a few minutes.
"""

import itertools
import math

import numpy as np

from rareweak import classify, cli, detect, graph as gr, phase, select
from rareweak import models as mo
from rareweak.numerics import RngStream, sym_sqrt


def _report(num, ok, detail):
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_01_bandwidth_error_rates():
    """Six (epsilon, tau) mixtures at (p, n, b, b0, alpha) = (5000, 200, 2, 10,
    0.05), 200 reps: error rates within 5 points of (6.5, .5, 0, 8.5, 3, 2)%."""
    targets = {(0.01, 0.175): 6.5, (0.01, 0.2): 0.5, (0.01, 0.225): 0.0,
               (0.005, 0.225): 8.5, (0.005, 0.25): 3.0, (0.01, 0.275): 2.0}
    cfg = cli.resolve_config("bandwidth", {"scale": "paper", "seed": 2,
                                           "threads": 8})
    table = cli.run_bandwidth(cfg)
    observed = {(eps, tau): 100.0 * rate
                for eps, tau, rep, _, rate in table.rows if rep == -1}
    deltas = {k: abs(observed[k] - targets[k]) for k in targets}
    ok = all(d <= 5.0 for d in deltas.values())
    detail = "; ".join(f"({e},{t}): {observed[(e,t)]:.1f}% vs {targets[(e,t)]}%"
                       for e, t in targets)
    _report(1, ok, detail)


def test_criterion_02_ranking_auc_contrast():
    """(n, p, eps) = (500, 1000, 0.05), 200 reps: GS beats US by > 0.05 AUC
    under severe cancellation (-0.8, 4); comparable within 0.05 at (0.8, 1.5)."""
    cfg = cli.resolve_config("ranking", {"scale": "paper", "seed": 20260801,
                                         "threads": 8})
    table = cli.run_ranking(cfg)
    means = {(h0, tau): (auc_us, auc_gs)
             for h0, tau, rep, auc_us, auc_gs in table.rows if rep == -1}
    us1, gs1 = means[(-0.8, 4.0)]
    us2, gs2 = means[(0.8, 1.5)]
    ok = (gs1 - us1 > 0.05) and (abs(gs2 - us2) <= 0.05)
    _report(2, ok, f"cancellation gap {gs1 - us1:+.4f} (> 0.05 needed); "
                   f"benign gap {gs2 - us2:+.4f} (|.| <= 0.05 needed)")


def test_criterion_03_hard_threshold_rate():
    """Mean Hamming of ideal-threshold HT scales like p^0.21875 at
    (vartheta, r) = (0.5, 2): fitted log-log slope within 0.1."""
    cfg = cli.resolve_config("recover", {"scale": "paper", "seed": 20260801,
                                         "threads": 8})
    table = cli.run_recover(cfg)
    ps = np.array([row[0] for row in table.rows if row[1] == "ht_ideal"], dtype=float)
    means = np.array([row[2] for row in table.rows if row[1] == "ht_ideal"])
    slope = float(np.polyfit(np.log(ps), np.log(means), 1)[0])
    target = 1.0 - (0.5 + 2.0) ** 2 / 8.0
    ok = abs(slope - target) <= 0.1
    _report(3, ok, f"slope {slope:.4f} vs {target} (tol 0.1); "
                   f"means {np.round(means, 2).tolist()}")


def test_criterion_04_gs_equals_ht_under_identity():
    """With independent noise and singleton subgraphs, the screen step keeps
    exactly the hard-threshold support at t = sqrt(2 q log p), 50 seeds."""
    p, vartheta, r = 500, 0.5, 2.0
    om = mo.PrecisionModel.identity(p)
    params = mo.ArwParams(p=p, vartheta=vartheta, r=r)
    all_equal = True
    for seed in range(50):
        inst = mo.gen_arw(params, om, RngStream(404, 0).child(seed))
        reg = mo.to_regression(inst)
        for q in (0.5, 0.9):
            tuning = select.default_gs_tuning(p, vartheta, r, m0=1, q=q)
            kept = select.gs_screen(reg, om.graph(), tuning)
            ht = select.hard_threshold(inst.y, math.sqrt(2 * q * math.log(p)))
            all_equal &= np.array_equal(kept, ht.support)
    _report(4, all_equal, "screen support == HT support exactly on 50 seeds x 2 q values")


def test_criterion_05_subgraph_enumeration_oracle():
    """Bounded connected-subgraph enumeration matches brute force over all
    2^p subsets for 30 random graphs with p <= 12, at every m0."""
    rng = np.random.Generator(np.random.Philox(505))
    checked = 0
    for trial in range(30):
        p = int(rng.integers(4, 13))
        density = float(rng.uniform(0.1, 0.5))
        edges = [(i, j) for i in range(p) for j in range(i + 1, p)
                 if rng.random() < density]
        g = gr.DependencyGraph(p, edges)
        brute = {}
        adj = [set(map(int, a)) for a in g.adjacency]
        for size in range(1, p + 1):
            for comb in itertools.combinations(range(p), size):
                nodes = set(comb)
                seen, stack = {comb[0]}, [comb[0]]
                while stack:
                    u = stack.pop()
                    for v in adj[u] & nodes:
                        if v not in seen:
                            seen.add(v)
                            stack.append(v)
                if seen == nodes:
                    brute.setdefault(size, []).append(tuple(comb))
        for m0 in range(1, p + 1):
            want = [s for size in range(1, m0 + 1) for s in brute.get(size, [])]
            want.sort(key=lambda t: (len(t), t))
            got = gr.enum_connected_subgraphs(g, m0)
            assert got == want
            checked += 1
    _report(5, True, f"{checked} (graph, m0) pairs match the exhaustive oracle")


def test_criterion_06_detection_size_and_power():
    """OHC and IHC hold their level within binomial slack at alpha in
    {0.05, 0.2} (400 null reps) and beat their size at (0.6, 1.2), p = 1e4."""
    p = 10**4
    root = 20260801
    params = mo.ArwParams(p=p, vartheta=0.6, r=1.2)
    table = detect.critical_value(p, [0.05, 0.2], variant="ohc",
                                  num_null_reps=20000, rng=RngStream(root, 0))
    cases = (("ohc", mo.PrecisionModel.identity(p)),
             ("ihc", mo.PrecisionModel.block2(p, 0.5)))
    ok = True
    details = []
    for variant, omega in cases:
        for alpha in (0.05, 0.2):
            est = detect.power_estimate(params, omega, variant, alpha, 400,
                                        RngStream(root, 1), table=table)
            bound = alpha + 2 * math.sqrt(alpha * (1 - alpha) / 400)
            good = est.size <= bound and est.power > est.size
            ok &= good
            details.append(f"{variant}@{alpha}: size {est.size:.3f}<= {bound:.3f}, "
                           f"power {est.power:.2f}")
    _report(6, ok, "; ".join(details))


def test_criterion_07_boundary_values():
    """Closed-form boundary identities and the numeric block-model solve."""
    eps = 1e-10
    cont_half = abs(phase.rho_detect(0.5 + eps) - phase.rho_detect(0.5 - eps)) <= 1e-9
    cont_34 = abs(phase.rho_detect(0.75 + eps) - phase.rho_detect(0.75 - eps)) <= 1e-8
    exact_half = abs(phase.rho_exact_identity(0.5) - (3 + 2 * math.sqrt(2)) / 2) <= 1e-12
    block_ok = all(
        abs(phase.rho_exact_block(v, 0.0) - phase.rho_exact_identity(v)) <= 1e-6
        for v in np.arange(0.55, 0.951, 0.05))
    cp_ok = abs(phase.rho_changepoint(0.5) - 2.0) <= 1e-12
    ok = cont_half and cont_34 and exact_half and block_ok and cp_ok
    _report(7, ok, f"continuity {cont_half}/{cont_34}, exact(1/2) {exact_half}, "
                   f"block-vs-identity {block_ok}, changepoint {cp_ok}")


def test_criterion_08_block_snr_ordering_via_sym_sqrt():
    """sqrt(1-h0^2) <= diag(Omega^(1/2)) <= 1 for the paired-block model,
    with the middle term computed by the numeric square root."""
    ok = True
    for h0 in np.arange(-0.9, 0.91, 0.1):
        om = mo.PrecisionModel.block2(6, float(h0)).dense()
        s = sym_sqrt(om)
        sigma = np.linalg.inv(om)
        brute = 1.0 / math.sqrt(sigma[0, 0])
        mid = float(s[0, 0])
        closed = 0.5 * (math.sqrt(1 + h0) + math.sqrt(1 - h0))
        ok &= brute <= mid + 1e-8 <= 1.0 + 2e-8
        ok &= abs(mid - closed) <= 1e-8
    _report(8, ok, "ordering and closed-form agreement hold at h0 in {-0.9..0.9}")


def test_criterion_09_coloring_property():
    """Greedy coloring of 100 random sparse symmetric matrices is valid and
    uses at most the maximum row-nonzero count of colors."""
    rng = np.random.Generator(np.random.Philox(909))
    ok = True
    for _ in range(100):
        p = int(rng.integers(10, 80))
        density = float(rng.uniform(0.01, 0.1))
        m = np.where(rng.random((p, p)) < density,
                     rng.standard_normal((p, p)), 0.0)
        m = np.triu(m, 1)
        m = m + m.T + np.eye(p)
        g = gr.graph_from_matrix(m, 0.0)
        col = gr.greedy_coloring(g)
        row_nonzeros = int(np.max(np.count_nonzero(np.abs(m) > 1e-12, axis=1)))
        ok &= col.num_colors <= row_nonzeros
        for i in range(p):
            for j in g.neighbors(i):
                ok &= col.color_of[i] != col.color_of[j]
    _report(9, ok, "100 random sparse matrices colored within the row-nonzero bound")


def test_criterion_10_classification_contrast():
    """At p = 1e4, theta = 0.4: mean held-out error < 0.2 at (0.3, 1.2) and
    statistically indistinguishable from 1/2 at (0.5, 0.02); error does not
    increase in r under paired seeds."""
    p = 10**4
    om = mo.PrecisionModel.identity(p)
    strong = classify.classification_error(0.3, 1.2, 0.4, p, om, 50, 200,
                                           RngStream(42, 1))
    null = classify.classification_error(0.5, 0.02, 0.4, p, om, 50, 200,
                                         RngStream(42, 1))
    mid = classify.classification_error(0.3, 0.6, 0.4, p, om, 50, 200,
                                        RngStream(42, 1))
    ok = (strong.mean_error < 0.2
          and abs(null.mean_error - 0.5) <= 3 * null.se
          and strong.mean_error <= mid.mean_error)
    _report(10, ok, f"strong {strong.mean_error:.4f} (< 0.2); "
                    f"null {null.mean_error:.4f} +- {null.se:.4f} (3 SE of 0.5); "
                    f"monotone {strong.mean_error:.4f} <= {mid.mean_error:.4f}")


def test_criterion_11_cli_determinism():
    """Every experiment run twice, and with 1 vs 8 threads, produces
    byte-identical CSV bodies."""
    tiny = {
        "detect": {"p": 300, "grid": [[0.6, 1.5]], "variants": ["ohc", "ihc"],
                   "reps": 50, "null_reps": 200},
        "recover": {"p_grid": [64, 128], "reps": 5,
                    "methods": ["ht_ideal", "ht_universal", "gs"]},
        "bandwidth": {"p": 300, "n": 80, "b": 1, "b0": 3,
                      "cases": [[0.05, 0.4]], "reps": 5, "null_reps": 200},
        "ranking": {"p": 80, "reps": 5, "cases": [[-0.8, 4.0], [0.8, 1.5]]},
        "classify": {"p": 300, "grid": [[0.3, 1.5]], "reps": 20, "test_size": 50},
        "phase": {"vartheta_grid": [0.3, 0.5, 0.7]},
    }
    ok = True
    for experiment, overrides in tiny.items():
        cfg1 = cli.resolve_config(experiment, overrides, {"threads": 1})
        cfg8 = cli.resolve_config(experiment, overrides, {"threads": 8})
        runner = cli._RUNNERS[experiment]
        first = runner(cfg1).body_lines()
        again = runner(cfg1).body_lines()
        threaded = runner(cfg8).body_lines()
        ok &= first == again == threaded
    _report(11, ok, "6 experiments x {rerun, 1-vs-8 threads} byte-identical")
