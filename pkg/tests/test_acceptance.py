"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Budgets are fixed here (not tunable) so the stated tolerances are pinned;
the full module runs in a few minutes on a laptop core.
"""

import json
import time

import numpy as np

from affinecs import affine1d as a1
from affinecs import affinend as an
from affinecs import conemeasures as cm
from affinecs import conetest as ct
from affinecs import propagator as pr
from affinecs.matrixcore import rng_from, sample_glplus, sample_spd, sample_sym
from affinecs.mc import McConfig


def report(num, name, passed, detail):
    print(f"criterion {num:02d} {name}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, f"criterion {num} {name}: {detail}"


def test_criterion_01_normalization():
    worst = 0.0
    rng = rng_from(101)
    for n in (1, 2, 3):
        fid = an.FiducialND(n=n, alpha=1.0, beta=1.0)
        for _ in range(100):
            lab = an.LabelG(sample_sym(n, rng, 0.6), sample_spd(n, rng) + 0.3 * np.eye(n))
            worst = max(worst, abs(an.overlap_nd(fid, lab, lab) - 1.0))
    report(1, "normalization", worst < 1e-12, f"worst |<l|l>-1| = {worst:.2e}")


def test_criterion_02_closed_form_vs_quadrature():
    fid = a1.Fiducial1D(0.5, 1.0)
    rng = rng_from(102)
    labels = [a1.Label1D(float(rng.normal(0, 1.0)), float(rng.uniform(0.5, 2.0)))
              for _ in range(100)]
    grid = a1.make_grid(fid, tuple(labels), npoints=4096)
    worst = 0.0
    for i in range(50):
        la, lb = labels[2 * i], labels[2 * i + 1]
        inner = a1.grid_inner(a1.coherent_wavefunction(fid, la, grid=grid),
                              a1.coherent_wavefunction(fid, lb, grid=grid))
        worst = max(worst, abs(inner - a1.overlap_1d(fid, la, lb)))
    report(2, "closed form vs quadrature", worst < 1e-6, f"worst dev = {worst:.2e}")


def test_criterion_03_admissibility_1d():
    rng = rng_from(103)
    worst = 0.0
    for _ in range(10):
        fid = a1.Fiducial1D(float(rng.uniform(0.3, 3.0)), float(rng.uniform(0.3, 3.0)))
        closed, quad = a1.admissibility_1d(fid)
        worst = max(worst, abs(quad - closed) / closed)
    report(3, "admissibility 1-D", worst < 1e-3, f"worst rel dev = {worst:.2e}")


def test_criterion_04_minimum_uncertainty():
    rng = rng_from(104)
    worst = 0.0
    for _ in range(10):
        fid = a1.Fiducial1D(float(rng.uniform(0.3, 3.0)), float(rng.uniform(0.3, 3.0)))
        mom = a1.moments_1d(fid)
        worst = max(worst, abs(mom.sigma_var * mom.kappa_var - mom.sigma_mean**2 / 4))
    report(4, "minimum uncertainty", worst < 1e-10, f"worst |var product - <s>^2/4| = {worst:.2e}")


def test_criterion_05_commutators():
    rng = rng_from(105)
    worst = 0.0
    for n in (2, 3):
        pts = [sample_spd(n, rng) + 0.3 * np.eye(n) for _ in range(20)]
        base = sample_spd(n, rng) + 0.5 * np.eye(n)
        f = ct.ConeTestFunction(
            n, base, {((), 0.8): 1.0, ((((0, 0), 1),), 0.8): 0.5,
                      ((((0, 1), 1),), 0.8): 1.0j})
        for which in ("sigma_sigma", "sigma_kappa", "kappa_kappa"):
            for a in range(n):
                for b in range(n):
                    for j in range(n):
                        for k in range(n):
                            worst = max(worst, ct.commutator_residual(
                                f, which, (a, b, j, k), pts))
    report(5, "commutators", worst < 1e-8, f"worst residual = {worst:.2e}")


def test_criterion_06_kn_consistency():
    ok = True
    details = []
    for (n, a) in ((2, 0.5), (2, 1.0), (3, 1.0)):
        res = an.kn(n, a, McConfig(samples=1_000_000, seed=106))
        rel = max(res.gauss.stderr, res.cone.stderr) / res.closed
        ok &= res.consistent() and rel <= 0.01
        details.append(f"n={n},a={a}: rel stderr {rel:.3%}, consistent={res.consistent()}")
    report(6, "kn consistency", ok, "; ".join(details))


def test_criterion_07_admissibility_nd():
    fid = an.FiducialND(n=2, alpha=1.0, beta=1.0)
    res = an.admissibility_nd(fid, McConfig(samples=1_000_000, seed=107))
    dev = abs(res.mc.real - res.closed_so) / (3 * res.mc.stderr)
    ok = res.consistent() and abs(res.convention_ratio - 2.0) < 0.02
    report(7, "admissibility n-D", ok,
           f"closed(SO)={res.closed_so:.2f} mc={res.mc.real:.2f}+-{res.mc.stderr:.2f}, "
           f"dev={dev:.2f} of 3sigma, convention ratio={res.convention_ratio:.4f}")


def _pooled_constant(results):
    num = sum(float(np.real(r.estimate * np.conj(r.target))) / r.stderr**2 for r in results)
    den = sum(abs(r.target) ** 2 / r.stderr**2 for r in results)
    return num / den


def test_criterion_08_resolution_of_unity():
    fid1 = a1.Fiducial1D(0.5, 1.0)
    fid2 = an.FiducialND(n=2, alpha=1.0, beta=1.0)
    rng = rng_from(108)
    pairs1 = [(a1.Label1D(0, 1), a1.Label1D(0, 1)),
              (a1.Label1D(0, 1), a1.Label1D(1, 1)),
              (a1.Label1D(0.4, 1.3), a1.Label1D(-0.5, 0.8))]
    ident = an.LabelG(np.zeros((2, 2)), np.eye(2))
    labs2 = [an.LabelG(sample_sym(2, rng, 0.3), sample_spd(2, rng) + 0.6 * np.eye(2))
             for _ in range(2)]
    pairs2 = [(ident, ident), (labs2[0], labs2[0]), (labs2[0], labs2[1])]

    ok = True
    details = []
    constants = {}
    for tag, (fid, pairs, checker) in enumerate((
            ("1d", pairs1, a1.resolution_check_1d),
            ("2d", pairs2, an.resolution_check_nd))):
        name, prs, fn = fid, pairs, checker
        fobj = fid1 if name == "1d" else fid2
        consts = []
        for seed_shift in (0, 5000):
            results = []
            for i, (la, lb) in enumerate(prs):
                res = fn(fobj, la, lb, McConfig(samples=1_200_000,
                                                seed=108 + seed_shift + i))
                results.append(res)
                if seed_shift == 0:
                    ok &= res.within() and res.stderr <= 0.01
            consts.append(_pooled_constant(results))
        constants[name] = consts
        stable = abs(consts[0] - consts[1]) < 5e-3
        ok &= stable
        details.append(f"{name}: constant {consts[0]:.4f} / {consts[1]:.4f} "
                       f"(stable to 3 s.f.: {stable})")
    report(8, "resolution of unity", ok, "; ".join(details))


def test_criterion_09_polarization():
    rng = rng_from(109)
    fid1 = a1.Fiducial1D(0.5, 1.0)
    worst1 = 0.0
    for _ in range(100):
        lab = a1.Label1D(float(rng.normal()), float(rng.uniform(0.4, 2.5)))
        psi = a1.Label1D(float(rng.normal()), float(rng.uniform(0.4, 2.5)))
        worst1 = max(worst1, a1.polarization_residual_1d(fid1, lab, psi).residual)

    fid2 = an.FiducialND(n=2, alpha=1.0, beta=1.0)
    worst2 = 0.0
    for _ in range(100):
        lab = an.LabelG(sample_sym(2, rng, 0.5), sample_spd(2, rng) + 0.4 * np.eye(2))
        psi = an.LabelG(sample_sym(2, rng, 0.5), sample_spd(2, rng) + 0.4 * np.eye(2))
        worst2 = max(worst2, an.polarization_residual_nd(fid2, lab, psi).residual)

    r1 = a1.polarization_residual_1d(fid1, a1.Label1D(0.3, 1.2), a1.Label1D(-0.4, 0.8), h=0.2)
    r2 = a1.polarization_residual_1d(fid1, a1.Label1D(0.3, 1.2), a1.Label1D(-0.4, 0.8), h=0.1)
    order1 = np.log2(r1.residual / r2.residual)
    lab = an.LabelG(sample_sym(2, rng, 0.5), sample_spd(2, rng) + 0.4 * np.eye(2))
    psi = an.LabelG(sample_sym(2, rng, 0.5), sample_spd(2, rng) + 0.4 * np.eye(2))
    q1 = an.polarization_residual_nd(fid2, lab, psi, h=0.2)
    q2 = an.polarization_residual_nd(fid2, lab, psi, h=0.1)
    order2 = np.log2(q1.residual / q2.residual)

    ok = worst1 < 1e-6 and worst2 < 1e-5 and order1 >= 3.5 and order2 >= 3.5
    report(9, "polarization", ok,
           f"worst 1d={worst1:.2e} 2d={worst2:.2e}, orders {order1:.2f}/{order2:.2f}")


def test_criterion_10_geometry():
    def fit(mismatches, epss):
        mm, ee = np.array(mismatches), np.array(epss)
        good = mm > 1e-15
        slope, _ = np.polyfit(np.log(ee[good]), np.log(mm[good]), 1)
        return slope

    epss = (4e-2, 2e-2, 1e-2)
    fid1 = a1.Fiducial1D(0.5, 1.0)
    m_t, m_s = [], []
    for eps in epss:
        le = a1.local_expansion_1d(fid1, a1.Label1D(0.3, 1.2), eps, 0.7 * eps)
        m_t.append(abs(le.dtheta_num - le.dtheta_formula))
        m_s.append(abs(le.dsigma2_num - le.dsigma2_formula))
    o1t, o1s = fit(m_t, epss), fit(m_s, epss)

    fid2 = an.FiducialND(n=2, alpha=1.0, beta=1.0)
    rng = rng_from(110)
    lab = an.LabelG(sample_sym(2, rng, 0.4), sample_spd(2, rng) + 0.5 * np.eye(2))
    dfm, dgm = sample_sym(2, rng), sample_sym(2, rng, 0.5)
    m_t, m_s = [], []
    for eps in epss:
        le = an.local_expansion_nd(fid2, lab, eps * dfm, eps * dgm)
        m_t.append(abs(le.dtheta_num - le.dtheta_formula))
        m_s.append(abs(le.dsigma2_num - le.dsigma2_formula))
    o2t, o2s = fit(m_t, epss), fit(m_s, epss)

    ok = min(o1t, o1s, o2t, o2s) >= 2.7
    report(10, "geometry", ok,
           f"fitted remainder orders 1d ({o1t:.2f}, {o1s:.2f}) 2d ({o2t:.2f}, {o2s:.2f})")


def test_criterion_11_appendix_identity():
    rng = rng_from(111)
    worst_rt = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 6))
        s = sample_glplus(n, rng)
        pf = cm.polar_decompose(s)
        worst_rt = max(worst_rt,
                       float(np.abs(pf.m @ pf.t - s).max()) / max(1, np.abs(s).max()),
                       float(np.abs(pf.m.T @ pf.m - np.eye(n)).max()))

    worst_j = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 6))
        t = np.triu(rng.normal(size=(n, n)))
        t[np.diag_indices(n)] = np.abs(t[np.diag_indices(n)]) + 0.2
        rhs = 2.0**n * np.linalg.det(t) * cm.jacobian_polar(t)
        worst_j = max(worst_j, abs(cm.jacobian_t_to_g(t) - rhs) / abs(rhs))

    ok = worst_rt < 1e-12 and worst_j < 1e-12
    details = [f"polar {worst_rt:.2e}, wedge {worst_j:.2e}"]
    for n in (2, 3):
        ratios, errs = [], []
        for i, a in enumerate((0.5, 1.0, 1.5)):
            res = cm.pushforward_check(n, a, McConfig(samples=1_000_000, seed=111 + i))
            ratios.append(res.ratio)
            errs.append(res.ratio_stderr)
        spread = max(ratios) - min(ratios)
        tol = 3 * float(np.hypot(max(errs), max(errs)))
        res_b = cm.pushforward_check(n, 1.0, McConfig(samples=1_000_000, seed=211))
        stable = abs(res_b.ratio - ratios[1]) <= max(3 * np.hypot(res_b.ratio_stderr,
                                                                  errs[1]), 2e-3)
        ok &= spread <= max(tol, 2e-3) and stable
        details.append(f"n={n}: ratios {['%.4f' % r for r in ratios]} "
                       f"spread {spread:.4f} (tol {max(tol, 2e-3):.4f}) stable={stable}")
    report(11, "appendix identity", ok, "; ".join(details))


def test_criterion_12_propagator():
    fid = a1.Fiducial1D(0.5, 1.0)
    hs = pr.HamiltonianSpec1D("linear-sigma", 1.0)
    hk = pr.HamiltonianSpec1D("linear-kappa", 1.0)
    rng = rng_from(112)
    labels = [a1.Label1D(float(rng.normal(0, 0.8)), float(rng.uniform(0.7, 1.4)))
              for _ in range(100)]
    ctx_s = pr.GridPropagatorContext(fid, hs, tuple(labels), t_max=2.0, npoints=2048)
    ctx_k = pr.GridPropagatorContext(fid, hk, tuple(labels), t_max=2.0, npoints=2048)
    worst = 0.0
    for i in range(50):
        lo, li = labels[2 * i], labels[2 * i + 1]
        for T in (0.0, 0.5, 1.0, 2.0):
            worst = max(worst,
                        abs(ctx_s.propagate(T, lo, li)
                            - pr.analytic_propagator(fid, hs, T, lo, li)),
                        abs(ctx_k.propagate(T, lo, li)
                            - pr.analytic_propagator(fid, hk, T, lo, li)))
    ok = worst < 1e-5
    details = [f"grid vs analytic worst {worst:.2e}"]

    fid4 = a1.Fiducial1D(4.0, 1.0)
    lo = li = a1.Label1D(0.0, 1.0)
    T = 0.5
    for h, name in ((hs, "sigma"), (hk, "kappa")):
        exact = pr.analytic_propagator(fid4, h, T, lo, li)
        errs = []
        for M in (1, 2, 4, 8, 64):
            cfg = pr.SlicingConfig(mslices=M, ttotal=T, f_nodes=512, g_nodes=64,
                                   f_halfwidths=7.0, g_halfwidth=2.6)
            errs.append(abs(pr.time_sliced_propagator(fid4, h, cfg, lo, li) - exact)
                        / abs(exact))
        mono = all(errs[i + 1] <= errs[i] * 1.005 for i in range(3))
        ok &= mono and errs[-1] < 0.01
        details.append(f"{name}: M errs {['%.4f' % e for e in errs]} "
                       f"monotone={mono}, budget err {errs[-1]:.3%}")
    report(12, "propagator", ok, "; ".join(details))


def test_criterion_13_determinism(tmp_path):
    from affinecs.cli import main

    t0 = time.perf_counter()
    payloads = []
    for run in (1, 2):
        out = tmp_path / f"va{run}.json"
        code = main(["verify-all", "--seed", "97", "--budget", "quick",
                     "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        payload.pop("wall_time_s")
        payloads.append((json.dumps(payload, sort_keys=True),
                         out.with_suffix(".csv").read_bytes()))
    elapsed = time.perf_counter() - t0
    identical = payloads[0] == payloads[1]
    ok = identical and elapsed < 600
    report(13, "determinism", ok,
           f"byte-identical={identical}, two quick runs in {elapsed:.0f}s")
