import numpy as np
import pytest

from affinecs import affine1d as a1
from affinecs.errors import DomainError, GridTooCoarse
from affinecs.matrixcore import rng_from
from affinecs.mc import McConfig

FID = a1.Fiducial1D(alpha=0.5, beta=1.0)


def test_fiducial_eval():
    assert a1.fiducial_eval(FID, 1e-12) < 1e-5
    with pytest.raises(DomainError):
        a1.fiducial_eval(FID, -1.0)
    fid = a1.Fiducial1D(1.0, 1.0)
    assert abs(fid.c1 - 2.0) < 1e-14
    assert abs(a1.fiducial_eval(fid, 1.0) - 2.0 * np.exp(-1.0)) < 1e-14


def test_fiducial_normalization_by_quadrature():
    for alpha, beta in ((0.5, 1.0), (1.3, 0.7), (3.0, 2.0)):
        fid = a1.Fiducial1D(alpha, beta)
        kgrid, weights = a1.make_grid(fid)
        norm = np.sum(weights * a1.fiducial_eval(fid, kgrid) ** 2)
        assert abs(norm - 1.0) < 1e-8


def test_coherent_wavefunction_norm_and_identity_label():
    state = a1.coherent_wavefunction(FID, a1.Label1D(0.0, 1.0))
    assert abs(state.norm() - 1.0) < 1e-6
    assert np.allclose(state.values, a1.fiducial_eval(FID, state.kgrid))
    assert abs(a1.coherent_wavefunction(FID, a1.Label1D(2.0, 0.5)).norm() - 1.0) < 1e-6


def test_overlap_reference_values():
    assert abs(a1.overlap_1d(FID, a1.Label1D(0.3, 1.7), a1.Label1D(0.3, 1.7)) - 1) < 1e-14
    val = a1.overlap_1d(FID, a1.Label1D(0, 1), a1.Label1D(1, 1))
    assert abs(val - (0.48 + 0.64j)) < 1e-14
    assert abs(abs(val) - 0.8) < 1e-14
    swapped = a1.overlap_1d(FID, a1.Label1D(1, 1), a1.Label1D(0, 1))
    assert val == np.conj(swapped)


def test_overlap_matches_grid_quadrature():
    la, lb = a1.Label1D(0.0, 1.0), a1.Label1D(1.0, 1.0)
    grid = a1.make_grid(FID, (la, lb))
    inner = a1.grid_inner(a1.coherent_wavefunction(FID, la, grid=grid),
                          a1.coherent_wavefunction(FID, lb, grid=grid))
    assert abs(inner - a1.overlap_1d(FID, la, lb)) < 1e-6


def test_overlap_bound_random_pairs():
    rng = rng_from(21)
    for _ in range(1000):
        la = a1.Label1D(float(rng.normal()), float(rng.uniform(0.2, 4.0)))
        lb = a1.Label1D(float(rng.normal()), float(rng.uniform(0.2, 4.0)))
        val = abs(a1.overlap_1d(FID, la, lb))
        assert val <= 1.0 + 1e-13
        if (la.f, la.g) != (lb.f, lb.g):
            assert val < 1.0


def test_admissibility_values():
    assert abs(a1.Fiducial1D(1.0, 1.0).nconst - 2 * np.pi) < 1e-14
    assert abs(a1.Fiducial1D(1.0, 2.0).nconst - 4 * np.pi) < 1e-14
    closed, quad = a1.admissibility_1d(FID)
    assert abs(quad - closed) < 1e-3 * closed


def test_grid_operators():
    state = a1.coherent_wavefunction(FID, a1.Label1D(0.0, 1.0), npoints=512)
    sig = a1.apply_sigma_grid(state)
    assert np.allclose(sig.values, state.kgrid * state.values)

    kgrid = state.kgrid
    weights = state.weights
    wmat = np.diag(weights)
    kap = a1.kappa_matrix(kgrid)
    met = wmat @ kap
    interior = slice(3, -3)
    asym = np.abs(met[interior, interior] - met[interior, interior].conj().T).max()
    assert asym < 1e-8

    theta = a1.theta_matrix(kgrid)
    met_t = wmat @ theta
    scale = np.abs(met_t).max()
    assert np.abs(met_t - met_t.conj().T).max() > 0.1 * scale

    with pytest.raises(GridTooCoarse):
        a1.apply_theta_grid(a1.GridState1D(np.geomspace(0.1, 1, 8),
                                           np.ones(8, complex), np.ones(8)))


def test_kappa_grid_matches_analytic_derivative():
    # kappa eta = -i((alpha+1/2) - beta k) eta on a dense narrow grid
    kgrid = np.geomspace(0.5, 2.0, 4096)
    du = np.log(kgrid[1] / kgrid[0])
    weights = kgrid * du
    state = a1.GridState1D(kgrid, a1.fiducial_eval(FID, kgrid).astype(complex), weights)
    kap = a1.apply_kappa_grid(state)
    expected = -1j * ((FID.alpha + 0.5) - FID.beta * kgrid) * state.values
    interior = slice(8, -8)
    assert np.abs(kap.values[interior] - expected[interior]).max() < 1e-8


def test_moments():
    mom = a1.moments_1d(FID)
    assert mom.sigma_mean == 1.0
    assert mom.kappa_mean == 0.0
    assert abs(mom.sigma_var - 0.5) < 1e-12
    assert abs(mom.kappa_var - 0.5) < 1e-12
    for alpha, beta in ((0.5, 1.0), (2.0, 0.5), (1.25, 3.0)):
        fid = a1.Fiducial1D(alpha, beta)
        mom = a1.moments_1d(fid)
        assert abs(mom.sigma_var * mom.kappa_var - mom.sigma_mean**2 / 4) < 1e-10


def test_upper_symbols():
    assert a1.upper_symbol_1d(FID, "sigma", a1.Label1D(5.0, 1.0)) == 1.0
    assert a1.upper_symbol_1d(FID, "kappa", a1.Label1D(0.0, 2.0)) == 0.0
    assert a1.upper_symbol_1d(FID, "sigma", a1.Label1D(0.0, 2.0)) == 2.0
    for which in ("sigma", "kappa"):
        closed = a1.upper_symbol_1d(FID, which, a1.Label1D(0.5, 2.0))
        grid = a1.upper_symbol_1d(FID, which, a1.Label1D(0.5, 2.0), method="grid")
        assert abs(closed - grid) < 1e-6


def test_polarization_residual():
    rng = rng_from(4)
    for _ in range(100):
        lab = a1.Label1D(float(rng.normal()), float(rng.uniform(0.4, 2.5)))
        psi = a1.Label1D(float(rng.normal()), float(rng.uniform(0.4, 2.5)))
        assert a1.polarization_residual_1d(FID, lab, psi).residual < 1e-6

    r1 = a1.polarization_residual_1d(FID, a1.Label1D(0.3, 1.2), a1.Label1D(-0.4, 0.8), h=0.2)
    r2 = a1.polarization_residual_1d(FID, a1.Label1D(0.3, 1.2), a1.Label1D(-0.4, 0.8), h=0.1)
    assert np.log2(r1.residual / r2.residual) > 3.5

    clamped = a1.polarization_residual_1d(FID, a1.Label1D(0.0, 1e-12), a1.Label1D(0, 1))
    assert clamped.clamped


def test_local_expansion():
    zero = a1.local_expansion_1d(FID, a1.Label1D(0.2, 1.1), 0.0, 0.0)
    assert zero == a1.LocalExpansion(0.0, 0.0, 0.0, 0.0)

    # gamma1 = 1: dtheta = -eps; the exact quadratic coefficient is the
    # fiducial variance metric, giving dSigma^2 = eps^2/2 at G = 1
    eps = 1e-2
    le = a1.local_expansion_1d(FID, a1.Label1D(0.0, 1.0), eps, 0.0)
    assert abs(le.dtheta_formula + eps) < 1e-15
    assert abs(le.dsigma2_formula - eps**2 / 2) < 1e-18
    assert abs(le.dtheta_num - le.dtheta_formula) < 2 * eps**3
    assert abs(le.dsigma2_num - le.dsigma2_formula) < eps**3

    lab = a1.Label1D(0.4, 1.3)
    m1 = a1.local_expansion_1d(FID, lab, 2e-2, 1.4e-2)
    m2 = a1.local_expansion_1d(FID, lab, 1e-2, 0.7e-2)
    mis1 = abs(m1.dtheta_num - m1.dtheta_formula)
    mis2 = abs(m2.dtheta_num - m2.dtheta_formula)
    assert mis1 / mis2 >= 8.0 * 0.9


def test_resolution_check():
    mc = McConfig(samples=200_000, seed=5)
    res = a1.resolution_check_1d(FID, a1.Label1D(0, 1), a1.Label1D(0, 1), mc)
    assert abs(res.estimate - 1.0) <= 3 * res.stderr

    res2 = a1.resolution_check_1d(FID, a1.Label1D(0, 1), a1.Label1D(1, 1), mc)
    assert abs(res2.estimate - (0.48 + 0.64j)) <= 3 * res2.stderr

    double = a1.resolution_check_1d(FID, a1.Label1D(0, 1), a1.Label1D(1, 1),
                                    McConfig(samples=400_000, seed=5))
    ratio = res2.stderr / double.stderr
    assert 1.2 < ratio < 1.7
