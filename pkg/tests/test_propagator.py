import numpy as np
import pytest

from affinecs import propagator as pr
from affinecs.affine1d import Fiducial1D, Label1D, overlap_1d
from affinecs.affinend import FiducialND, LabelG
from affinecs.errors import BudgetExceeded, DomainError, UnsupportedHamiltonian
from affinecs.mc import McConfig

FID = Fiducial1D(0.5, 1.0)
HS = pr.HamiltonianSpec1D("linear-sigma", 1.0)
HK = pr.HamiltonianSpec1D("linear-kappa", 1.0)


def test_analytic_propagator_values():
    lo = li = Label1D(0.0, 1.0)
    assert abs(pr.analytic_propagator(FID, pr.HamiltonianSpec1D("linear-sigma", 0.0),
                                      1.0, lo, li) - 1.0) < 1e-14
    val = pr.analytic_propagator(FID, HS, 1.0, lo, li)
    assert abs(val - (0.48 - 0.64j)) < 1e-14
    # kappa transport moves the label along dilations
    lk = pr.analytic_propagator(FID, HK, 0.7, Label1D(0.3, 1.1), Label1D(-0.2, 0.9))
    direct = overlap_1d(FID, Label1D(0.3, 1.1),
                        Label1D(np.exp(-0.7) * -0.2, np.exp(0.7) * 0.9))
    assert abs(lk - direct) < 1e-14
    with pytest.raises(UnsupportedHamiltonian):
        pr.analytic_propagator(FID, pr.HamiltonianSpec1D("grid", matrix=np.eye(4)),
                               1.0, lo, li)


def test_grid_propagator_matches_analytic():
    labels = (Label1D(0.0, 1.0), Label1D(0.5, 1.3), Label1D(-0.7, 0.8))
    ctx_s = pr.GridPropagatorContext(FID, HS, labels, t_max=2.0, npoints=1536)
    ctx_k = pr.GridPropagatorContext(FID, HK, labels, t_max=2.0, npoints=1536)
    assert abs(ctx_k.propagate(0.0, labels[1], labels[2])
               - overlap_1d(FID, labels[1], labels[2])) < 1e-8
    for T in (0.3, 1.0, 2.0):
        for lo in labels[:2]:
            for li in labels[1:]:
                a_s = pr.analytic_propagator(FID, HS, T, lo, li)
                a_k = pr.analytic_propagator(FID, HK, T, lo, li)
                assert abs(ctx_s.propagate(T, lo, li) - a_s) < 1e-5
                assert abs(ctx_k.propagate(T, lo, li) - a_k) < 1e-5
    assert abs(ctx_k.propagate(1.0, labels[0], labels[0])) <= 1.0 + 1e-10


def test_grid_defined_hamiltonian_kind():
    # an explicit grid matrix for kappa propagates like the built-in kind
    from affinecs.affine1d import kappa_matrix, make_grid

    labels = (Label1D(0.2, 1.1), Label1D(-0.1, 0.9),
              Label1D(0.2 * np.exp(-0.5), 1.1 * np.exp(0.5)),
              Label1D(-0.1 * np.exp(0.5), 0.9 * np.exp(-0.5)))
    grid = make_grid(FID, labels, npoints=1024)
    hg = pr.HamiltonianSpec1D("grid", matrix=kappa_matrix(grid[0]))
    ctx = pr.GridPropagatorContext(FID, hg, labels, grid=grid)
    val = ctx.propagate(0.5, labels[0], labels[1])
    exact = pr.analytic_propagator(FID, HK, 0.5, labels[0], labels[1])
    assert abs(val - exact) < 1e-5
    with pytest.raises(DomainError):
        pr.HamiltonianSpec1D("grid")


def test_time_sliced_m0_and_budget():
    cfg0 = pr.SlicingConfig(mslices=0, ttotal=0.4)
    lo = li = Label1D(0.0, 1.0)
    fid4 = Fiducial1D(4.0, 1.0)
    val = pr.time_sliced_propagator(fid4, HS, cfg0, lo, li)
    gl = (fid4.alpha - 0.5) / fid4.beta
    assert abs(val - np.exp(-1j * 0.4 * gl)) < 1e-12

    with pytest.raises(BudgetExceeded):
        pr.time_sliced_propagator(
            fid4, HS, pr.SlicingConfig(mslices=4, ttotal=0.4, max_ops=10), lo, li)
    with pytest.raises(DomainError):
        pr.SlicingConfig(mslices=2, ttotal=0.4, f_nodes=4)


def test_time_sliced_converges_to_oracle():
    fid4 = Fiducial1D(4.0, 1.0)
    lo = li = Label1D(0.0, 1.0)
    T = 0.5
    for h in (HS, HK):
        exact = pr.analytic_propagator(fid4, h, T, lo, li)
        errs = []
        for M in (1, 2, 4, 8):
            cfg = pr.SlicingConfig(mslices=M, ttotal=T, f_nodes=256, g_nodes=40,
                                   f_halfwidths=6.0, g_halfwidth=2.2)
            errs.append(abs(pr.time_sliced_propagator(fid4, h, cfg, lo, li) - exact)
                        / abs(exact))
        assert all(errs[i + 1] <= errs[i] * 1.005 for i in range(3)), errs


def test_time_sliced_upper_symbol_converges_to_rescaled_operator():
    # with upper-symbol weights the chain approximates the operator whose
    # lower symbol is the upper symbol: c -> c (alpha+1/2)/(alpha-1/2)
    fid4 = Fiducial1D(4.0, 1.0)
    lo = li = Label1D(0.0, 1.0)
    T = 0.5
    scale = (fid4.alpha + 0.5) / (fid4.alpha - 0.5)
    exact_rescaled = pr.analytic_propagator(
        fid4, pr.HamiltonianSpec1D("linear-sigma", scale), T, lo, li)
    exact_plain = pr.analytic_propagator(fid4, HS, T, lo, li)
    errs_r, errs_p = [], []
    for M in (8, 32):
        cfg = pr.SlicingConfig(mslices=M, ttotal=T, f_nodes=384, g_nodes=48,
                               f_halfwidths=6.0, g_halfwidth=2.4, symbol="upper")
        v = pr.time_sliced_propagator(fid4, HS, cfg, lo, li)
        errs_r.append(abs(v - exact_rescaled) / abs(exact_rescaled))
        errs_p.append(abs(v - exact_plain) / abs(exact_plain))
    assert errs_r[1] < errs_r[0]
    assert errs_r[1] < 0.05
    assert min(errs_p) > 0.3


def test_action_evaluator():
    path = pr.LatticePath(fs=(0.0, 0.0, 0.0), gs=(1.0, 1.0, 1.0), ttotal=0.2)
    assert pr.action_evaluator(FID, path) == (0.0, 0.0)

    eps = 0.01
    single = pr.LatticePath(fs=(0.0, eps), gs=(1.0, 1.0), ttotal=0.1)
    phase, wiener = pr.action_evaluator(FID, single)
    assert abs(phase + FID.gamma1 * eps) < 1e-15
    assert wiener == 0.0

    _, w10 = pr.action_evaluator(FID, single, nu=10.0)
    _, w20 = pr.action_evaluator(FID, single, nu=20.0)
    assert abs(w10 / w20 - 2.0) < 1e-12

    h_up = lambda f, g: HS.upper_symbol(FID, f, g)
    phase_h, _ = pr.action_evaluator(FID, single, h_fn=h_up)
    assert abs(phase_h - (phase - 0.1 * FID.gamma1 * 1.0)) < 1e-15

    # matrix path reduces to traces
    eye = np.eye(2)
    fid2 = FiducialND(n=2, alpha=1.0, beta=1.0)
    mpath = pr.LatticePath(fs=(0 * eye, eps * eye), gs=(eye, eye), ttotal=0.1)
    mphase, mwiener = pr.action_evaluator(fid2, mpath, nu=5.0)
    assert abs(mphase + fid2.gamma * 2 * eps) < 1e-15
    assert mwiener > 0


def test_lower_symbol_verify_and_fit():
    fid = Fiducial1D(1.0, 1.0)
    # diagonal matrix element of sigma equals gamma1 G
    la = Label1D(0.0, 1.0)
    assert abs(pr._sigma_matrix_element(Fiducial1D(0.5, 1.0), la, la) - 1.0) < 1e-14

    mc = McConfig(samples=150_000, seed=33)
    res = pr.lower_symbol_verify(fid, pr.HamiltonianSpec1D("linear-sigma", 1.0),
                                 "lower", la, Label1D(0.4, 1.2), mc)
    assert res.within()
    res0 = pr.lower_symbol_verify(fid, pr.HamiltonianSpec1D("linear-sigma", 1.0),
                                  "zero", la, Label1D(0.4, 1.2), mc)
    assert abs(res0.rhs.mean) < 1e-14
    assert abs(res0.rhs.mean - res0.lhs) > 10 * res.rhs.stderr

    gam, se = pr.lower_symbol_fit(
        fid, pr.HamiltonianSpec1D("linear-sigma", 1.0),
        [(Label1D(0, 1), Label1D(0.4, 1.2)), (Label1D(0.2, 0.9), Label1D(-0.3, 1.1))],
        mc)
    assert abs(gam - 0.5) < max(4 * se, 0.02)

    with pytest.raises(DomainError):
        pr.HamiltonianSpec1D("linear-sigma", 1.0).lower_symbol(FID, 0.0, 1.0)


def test_nd_smoke():
    fid2 = FiducialND(n=2, alpha=1.0, beta=1.0)
    l_in = LabelG(np.zeros((2, 2)), np.eye(2))
    l_out = LabelG(0.1 * np.eye(2), np.eye(2))
    sig = np.diag([1.0, 0.5])
    sl0, ex0 = pr.time_sliced_nd_smoke(fid2, 0.0, sig, 0.0, l_out, l_in,
                                       f_nodes=8, g_nodes=8)
    assert abs(sl0 - ex0) / abs(ex0) < 0.05
    sl, ex = pr.time_sliced_nd_smoke(fid2, 0.3, sig, 0.2, l_out, l_in,
                                     f_nodes=8, g_nodes=8)
    assert abs(sl - ex) / abs(ex) < 2 * abs(sl0 - ex0) / abs(ex0) + 5e-3
    with pytest.raises(BudgetExceeded):
        pr.time_sliced_nd_smoke(fid2, 0.3, sig, 0.2, l_out, l_in,
                                f_nodes=40, g_nodes=40, max_ops=100)
