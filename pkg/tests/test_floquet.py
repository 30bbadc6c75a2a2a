import math

import numpy as np
import pytest

from dharper.floquet import (FloquetOperator, alpha_scan, apply_floquet,
                             band_truncate, build_floquet, eigendecompose,
                             localization_scan, mean_participation,
                             participation_ratio, read_floquet, write_floquet)
from dharper.model import BetaClass, derive_params, params_from_split
from dharper.quantum import WaveFunction, initial_packet, propagate_eq8

FIG_ALPHA = 0.1545


def params(omega=0.6, beta=None, j_x=1.0, j_y=1.0, alpha=FIG_ALPHA):
    if beta is None:
        beta = BetaClass.golden()
    return derive_params(params_from_split(omega, beta, j_x=j_x, j_y=j_y,
                                           alpha=alpha))


def test_jx_zero_diagonal():
    d = params(omega=0.6, beta=BetaClass.rational(1, 3), j_x=0.0)
    op = build_floquet(d, 128, tol=1e-8)
    l = op.sites()
    expect = np.exp(-2j * np.pi * d.beta * l)
    off_diag = op.matrix - np.diag(np.diag(op.matrix))
    assert np.abs(off_diag).max() < 1e-10
    assert np.abs(np.diag(op.matrix) - expect).max() < 1e-10
    # l = 3 with beta = 1/3: phase exp(-i 2 pi) = 1
    row = 128 // 2 + 3
    assert op.matrix[row, row] == pytest.approx(1.0 + 0j, abs=1e-10)


def test_jx_zero_alpha_independent():
    d1 = params(omega=0.6, beta=BetaClass.golden(), j_x=0.0, alpha=FIG_ALPHA)
    d2 = params(omega=0.6, beta=BetaClass.golden(), j_x=0.0, alpha=0.4123)
    u1 = build_floquet(d1, 96, tol=1e-8)
    u2 = build_floquet(d2, 96, tol=1e-8)
    assert np.abs(u1.matrix - u2.matrix).max() < 1e-10


def test_unitarity_generic():
    op = build_floquet(params(), 128, tol=1e-8)
    assert op.unitarity_defect() < 1e-8


def test_half_step_reference_agreement():
    # column-wise agreement between the chosen step count and a half-step
    # reference build, within 10*tol
    d = params(omega=0.7)
    tol = 1e-8
    from dharper.floquet import _probe_steps
    n = _probe_steps(d, 64, 3.0 * tol)
    u1 = build_floquet(d, 64, tol=tol, n_steps=n)
    u2 = build_floquet(d, 64, tol=tol, n_steps=2 * n)
    assert np.abs(u1.matrix - u2.matrix).max() < 10 * tol


def test_band_truncate():
    d = params(omega=0.6, beta=BetaClass.rational(1, 3), j_x=0.0)
    op = build_floquet(d, 64, tol=1e-8)
    banded, err = band_truncate(op, 0)
    assert err < 1e-10
    op2 = build_floquet(params(), 64, tol=1e-8)
    full, err_full = band_truncate(op2, 64)
    assert err_full == 0.0
    # bandedness: error decays below 1e-6 well before bandwidth ~ L
    errs = [band_truncate(op2, bw)[1] for bw in (2, 6, 12, 20, 28)]
    assert all(np.diff(errs) <= 1e-15)
    assert errs[-1] < 1e-6


def test_eigendecompose_basics():
    op = build_floquet(params(), 96, tol=1e-8)
    eig = eigendecompose(op)
    assert np.all(eig.residuals < 1e-8)
    assert not eig.flagged.any()
    assert np.all(np.diff(eig.eigenphases) >= 0)
    assert np.abs(np.linalg.norm(eig.eigenvectors, axis=0) - 1).max() < 1e-12
    # reconstruction from the eigendecomposition
    V = eig.eigenvectors
    rebuilt = V @ np.diag(np.exp(1j * eig.eigenphases)) @ np.linalg.inv(V)
    assert np.abs(rebuilt - op.matrix).max() < 1e-6


def test_eigendecompose_identity():
    op = FloquetOperator(matrix=np.eye(32, dtype=complex), period=1.0,
                         params=params())
    eig = eigendecompose(op)
    assert np.abs(eig.eigenphases).max() < 1e-12


def test_eigendecompose_jx_zero_phases():
    d = params(omega=0.6, beta=BetaClass.rational(1, 3), j_x=0.0)
    op = build_floquet(d, 32, tol=1e-8)
    eig = eigendecompose(op)
    l = op.sites()
    expect = np.sort(np.angle(np.exp(-2j * np.pi * d.beta * l)))
    assert eig.eigenphases == pytest.approx(expect, abs=1e-9)


def test_participation_ratio_limits():
    v = np.zeros(50, complex)
    v[7] = 1.0
    assert participation_ratio(v) == pytest.approx(1.0, rel=1e-12)
    u = np.full(50, 1 / math.sqrt(50), dtype=complex)
    assert participation_ratio(u) == pytest.approx(50.0, rel=1e-12)
    with pytest.raises(ValueError, match="unit"):
        participation_ratio(np.ones(8))


def test_participation_ratio_gaussian_oracle():
    # Gaussian density of site-width s: P ~ 2 s sqrt(pi)
    s = 6.0
    l = np.arange(-200, 200)
    v = np.exp(-l ** 2 / (4 * s ** 2)).astype(complex)
    v /= np.linalg.norm(v)
    assert participation_ratio(v) == pytest.approx(2 * s * math.sqrt(math.pi),
                                                   rel=0.01)


def test_propagator_equivalence_with_eq8():
    # applying U equals one-period RK4 propagation of Eq. 8
    d = params(omega=0.6)
    L = 64
    op = build_floquet(d, L, tol=1e-8, accuracy=3e-10)
    psi = initial_packet(d, n_sites=L, offset=-L // 2)
    via_op = apply_floquet(op, psi.amplitudes)
    rec = propagate_eq8(psi, d.t_y, d.t_y / 200, d, grow=False,
                        norm_budget=1e-11)
    assert np.abs(via_op - rec.psi_final.amplitudes).max() < 1e-8


def test_localization_scan_jx_zero():
    scan = localization_scan([0.5, 0.7], BetaClass.golden(), j_x=0.0,
                             L=64, n_states=16, island_grid=8,
                             island_t=None)
    assert scan.mean_p == pytest.approx(np.ones(2), abs=1e-9)


def test_mean_participation_size_stability():
    # localized regime: doubling L changes mean P by < 10%
    d = params(omega=0.8)
    p1, _ = mean_participation(build_floquet(d, 256, tol=1e-8, accuracy=1e-6), 60)
    p2, _ = mean_participation(build_floquet(d, 512, tol=1e-8, accuracy=1e-6), 60)
    assert abs(p2 - p1) / p1 < 0.10


def test_alpha_scan_trend():
    # P grows as alpha decreases; log P vs 1/alpha close to linear.  The
    # fixed omega must stay well below Omega = 2 pi alpha sqrt(JxJy) over
    # the whole alpha range, and L large enough that the most extended
    # states are not window-limited.
    scan = alpha_scan([0.18, 0.22, 0.26, 0.30], 0.35,
                      BetaClass.golden(), L=512, n_states=60,
                      accuracy=1e-6)
    assert np.all(np.diff(scan.mean_p) < 0)          # decreasing with alpha
    assert scan.fit.r2 > 0.9
    assert scan.fit.slope > 0


def test_floquet_file_round_trip(tmp_path):
    op = build_floquet(params(), 48, tol=1e-8)
    path = tmp_path / "op.dhfq"
    write_floquet(path, op)
    raw = path.read_bytes()
    assert raw[:4] == b"DHFQ"
    assert len(raw) == 32 + 16 * 48 * 48
    matrix, period = read_floquet(path)
    assert np.array_equal(matrix, op.matrix)
    assert period == op.period
