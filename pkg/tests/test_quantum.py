import math

import numpy as np
import pytest
from scipy.special import jv

from dharper.model import BetaClass, derive_params, params_from_split
from dharper.quantum import (EvolutionRecord, WaveFunction, dispersion,
                             initial_packet, propagate_eq2, propagate_eq8,
                             saturation)

FIG_ALPHA = 0.1545


def free_params(j_x=1.0):
    # J_y = 0, omega_x = 0: free tight-binding chain (drive irrelevant)
    return derive_params(params_from_split(1.0, BetaClass.rational(0, 1),
                                           j_x=j_x, j_y=0.0, alpha=FIG_ALPHA))


# ---------------------------------------------------------------------------
# initial packet and dispersion

def test_packet_norm_and_width(fig3_irrational):
    psi = initial_packet(fig3_irrational, n_sites=512)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    # Gaussian moment oracle: sigma_l = 1/sqrt(2 hbar_eff)
    expect = 1.0 / math.sqrt(2.0 * fig3_irrational.hbar_eff)
    assert dispersion(psi) == pytest.approx(expect, rel=0.01)
    assert expect == pytest.approx(0.7177, abs=2e-4)


def test_packet_delta_limit(fig3_irrational):
    psi = initial_packet(fig3_irrational, n_sites=256, width_sites=0.0)
    assert dispersion(psi) == 0.0
    assert psi.norm() == pytest.approx(1.0, abs=1e-14)


def test_packet_wide_rejected(fig3_irrational):
    with pytest.raises(ValueError, match="width"):
        initial_packet(fig3_irrational, n_sites=256, width_sites=64.0)


def test_packet_center_and_momentum(fig3_irrational):
    d = fig3_irrational
    x_c = 5 * d.hbar_eff          # exactly site 5
    psi = initial_packet(d, center_x=x_c, center_p=0.4, n_sites=256)
    dens = psi.density()
    mu = (psi.sites * dens).sum()
    assert mu == pytest.approx(5.0, abs=1e-9)
    # momentum centroid via discrete Fourier transform
    b = psi.amplitudes
    k = 2 * np.pi * np.fft.fftfreq(b.size)
    w = np.abs(np.fft.fft(b * np.exp(-1j * psi.offset * 0.0))) ** 2
    k_mean = np.angle(np.sum(w * np.exp(1j * k)))
    assert k_mean == pytest.approx(0.4, abs=0.02)


def test_dispersion_trivials():
    psi = WaveFunction(np.array([0, 0, 1.0 + 0j, 0]), offset=-2)
    assert dispersion(psi) == 0.0
    two = np.zeros(8, complex)
    two[2] = two[4] = 1 / math.sqrt(2)     # sites l = -2 and l = 0
    assert dispersion(WaveFunction(two, offset=-4)) == pytest.approx(1.0, rel=1e-12)


def test_dispersion_gaussian_oracle():
    s = 6.0
    l = np.arange(-128, 128)
    b = np.exp(-l ** 2 / (4 * s ** 2)).astype(complex)
    b /= np.linalg.norm(b)
    psi = WaveFunction(b, offset=-128)
    assert dispersion(psi) == pytest.approx(s, rel=0.01)


def test_dispersion_requires_normalized():
    psi = WaveFunction(np.ones(4, complex), offset=0)
    with pytest.raises(ValueError, match="normalized"):
        dispersion(psi)


# ---------------------------------------------------------------------------
# propagate_eq2

def test_free_particle_bessel_oracle():
    # |b_l(t)| = |J_l(J_x t)| for a delta start on the free chain
    d = free_params()
    psi = initial_packet(d, n_sites=256, width_sites=0.0)
    rec = propagate_eq2(psi, 20.0, 0.025, d, grow=False)
    dens = rec.psi_final.density()
    l = rec.psi_final.sites
    exact = jv(l, 20.0) ** 2
    assert np.abs(dens - exact).max() < 1e-8


def test_jx_zero_is_phase_only(fig3_irrational):
    d0 = fig3_irrational
    d = derive_params(params_from_split(d0.omega, BetaClass.golden(),
                                        j_x=0.0, j_y=1.0, alpha=FIG_ALPHA))
    psi = initial_packet(d, n_sites=128)
    before = psi.density().copy()
    rec = propagate_eq2(psi, 3 * d.t_y, d.t_y / 200, d, grow=False)
    assert np.abs(rec.psi_final.density() - before).max() < 1e-12


def test_eq2_norm_per_step(fig3_irrational):
    d = fig3_irrational
    psi = initial_packet(d, n_sites=512)
    rec = propagate_eq2(psi, 2 * d.t_y, d.t_y / 200, d, grow=False,
                        sigma_every=d.t_y / 10)
    assert abs(rec.psi_final.norm() - 1.0) < 1e-10


def test_eq2_reversibility(fig3_irrational):
    d = fig3_irrational
    psi = initial_packet(d, n_sites=512)
    fwd = propagate_eq2(psi, 5 * d.t_y, d.t_y / 200, d, grow=False)
    back = propagate_eq2(fwd.psi_final, 0.0, d.t_y / 200, d, grow=False)
    assert np.abs(back.psi_final.amplitudes - psi.amplitudes).max() < 1e-8


def test_eq2_dt_validation(fig3_irrational):
    d = fig3_irrational
    psi = initial_packet(d, n_sites=128)
    with pytest.raises(ValueError, match="dt"):
        propagate_eq2(psi, d.t_y, d.t_y / 100, d)


def test_eq2_window_growth(fig3_rational):
    # ballistic run outgrows the starting window without tripping the
    # edge-mass guard
    d = fig3_rational
    psi = initial_packet(d, n_sites=256)
    rec = propagate_eq2(psi, 60 * d.t_y, d.t_y / 200, d)
    assert rec.psi_final.n_sites > 256
    assert rec.psi_final.edge_mass() < 1e-10


# ---------------------------------------------------------------------------
# propagate_eq8 and the gauge relation

def test_eq8_jx_zero_one_period_phases(fig3_rational):
    # U_{l,l} = exp(-i 2 pi beta l) after one period, independent of alpha
    for alpha in (FIG_ALPHA, 0.41):
        d = derive_params(params_from_split(0.45, BetaClass.rational(1, 3),
                                            j_x=0.0, j_y=1.0, alpha=alpha))
        rng = np.random.Generator(np.random.Philox(2))
        b0 = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        b0[:8] = b0[-8:] = 0.0          # keep the edge guard quiet
        b0 /= np.linalg.norm(b0)
        psi = WaveFunction(b0.copy(), offset=-32)
        rec = propagate_eq8(psi, d.t_y, d.t_y / 400, d, grow=False)
        l = psi.sites
        expect = b0 * np.exp(-2j * np.pi * d.beta * l)
        assert np.abs(rec.psi_final.amplitudes - expect).max() < 1e-7


def test_gauge_equivalence_short(fig3_irrational):
    # densities agree; amplitudes map under b_l -> b_l exp(-i omega_x l t)
    d = fig3_irrational
    T = 2 * d.t_y
    psi = initial_packet(d, n_sites=512)
    r2 = propagate_eq2(psi, T, d.t_y / 1600, d, grow=False)
    r8 = propagate_eq8(psi, T, d.t_y / 400, d, grow=False, norm_budget=1e-10)
    d2 = r2.psi_final.density()
    d8 = r8.psi_final.density()
    assert np.abs(d2 - d8).max() < 1e-6
    l = r2.psi_final.sites
    mapped = r8.psi_final.amplitudes * np.exp(1j * d.omega_x * l * T)
    assert np.abs(mapped - r2.psi_final.amplitudes).max() < 3e-5


def test_omega_x_zero_propagators_agree():
    # omega_x = 0 reduces Eq. 8 to Eq. 2
    d = derive_params(params_from_split(0.45, BetaClass.rational(0, 1),
                                        alpha=FIG_ALPHA))
    psi = initial_packet(d, n_sites=256)
    T = 2 * d.t_y
    r2 = propagate_eq2(psi, T, d.t_y / 1600, d, grow=False)
    r8 = propagate_eq8(psi, T, d.t_y / 400, d, grow=False, norm_budget=1e-10)
    assert np.abs(r2.psi_final.density() - r8.psi_final.density()).max() < 1e-6


def test_eq8_norm_budget(fig3_irrational):
    d = fig3_irrational
    psi = initial_packet(d, n_sites=512)
    rec = propagate_eq8(psi, 10 * d.t_y, d.t_y / 200, d, grow=False)
    assert abs(rec.psi_final.norm() ** 2 - 1.0) < 1e-8


def test_convergence_orders(fig3_irrational):
    # Strang halving gains ~4x, RK4 halving ~16x against a fine reference
    d = fig3_irrational
    psi = initial_packet(d, n_sites=256)
    T = d.t_y

    def err2(steps):
        ref = propagate_eq2(psi, T, T / 4096, d, grow=False)
        cur = propagate_eq2(psi, T, T / steps, d, grow=False)
        return np.abs(cur.psi_final.amplitudes - ref.psi_final.amplitudes).max()

    e1, e2 = err2(256), err2(512)
    assert 2.8 < e1 / e2 < 5.5

    ref8 = propagate_eq8(psi, T, T / 8192, d, grow=False, substeps=1)

    def err8(steps):
        cur = propagate_eq8(psi, T, T / steps, d, grow=False, substeps=1)
        return np.abs(cur.psi_final.amplitudes - ref8.psi_final.amplitudes).max()

    e1, e2 = err8(512), err8(1024)
    assert 10.0 < e1 / e2 < 24.0


# ---------------------------------------------------------------------------
# saturation diagnostics

def test_saturation_synthetic_plateau():
    t = np.linspace(0, 40, 400)
    rec = EvolutionRecord(times=t, sigma=np.tanh(t), gauge="eq2")
    est = saturation(rec)
    assert est.saturated
    assert est.sigma_max == pytest.approx(1.0, rel=1e-3)
    assert est.t_sat < 5.0


def test_saturation_synthetic_ballistic():
    t = np.linspace(0, 40, 400)
    rec = EvolutionRecord(times=t, sigma=0.3 * t, gauge="eq2")
    est = saturation(rec)
    assert not est.saturated
