import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import factorial, ive

from l2lab.complexes import builtin_complex
from l2lab.oracle import (GAUSS, QuadratureGrid, UnsupportedOracle, default_grid, l2_betti,
                          l2_betti_from_euler, lattice_heat_kernel, spectral_support, symbol,
                          vn_heat_trace, vn_spectral_function, vn_zeta)

CIRCLE = builtin_complex("circle_Z")
TORUS = builtin_complex("torus2_Z2")
SURFACE = builtin_complex("surface_genus(2)_Z4")
BESSEL1 = math.exp(-2) * sum(1 / math.factorial(k) ** 2 for k in range(30))  # e^{-2} I_0(2)


def test_bessel_constant():
    assert BESSEL1 == pytest.approx(0.30850832255, abs=1e-10)


def test_symbols():
    th = np.random.default_rng(0).uniform(0, 2 * np.pi, size=(50, 2))
    np.testing.assert_allclose(symbol(CIRCLE, 0)(th[:, :1])[:, 0, 0].real, 2 - 2 * np.cos(th[:, 0]),
                               atol=1e-12)
    s0 = 4 - 2 * np.cos(th[:, 0]) - 2 * np.cos(th[:, 1])
    np.testing.assert_allclose(symbol(TORUS, 0)(th)[:, 0, 0].real, s0, atol=1e-12)
    s1 = symbol(TORUS, 1)(th)
    np.testing.assert_allclose(np.trace(s1, axis1=1, axis2=2).real, 2 * s0, atol=1e-12)


@pytest.mark.parametrize("name", ["torus3_Z3", "surface_genus(2)_Z4", "torus2_Z2"])
def test_symbol_hermitian_psd_and_paired(name):
    X = builtin_complex(name)
    th = np.random.default_rng(1).uniform(0, 2 * np.pi, size=(20, X.spec.rank))
    sym = [symbol(X, j) for j in range(X.dim + 1)]
    for j, s in enumerate(sym):
        A = s(th)
        np.testing.assert_allclose(A, np.conj(np.swapaxes(A, 1, 2)), atol=1e-12)
        assert s.eigenvalues(th).min() > -1e-10
    # positive spectrum of Δ_j = positive spectrum of ∂_j*∂_j ∪ ∂_{j+1}∂_{j+1}*
    for p in th[:5]:
        for j in range(1, X.dim + 1):
            B = sym[j].boundary(j, p)[0]
            up = np.linalg.eigvalsh(B @ B.conj().T)
            down = np.linalg.eigvalsh(B.conj().T @ B)
            np.testing.assert_allclose(np.sort(up[up > 1e-9]), np.sort(down[down > 1e-9]),
                                       atol=1e-9)


def test_heat_trace_bessel():
    assert vn_heat_trace(CIRCLE, 0, 1.0) == pytest.approx(BESSEL1, abs=1e-8)
    assert vn_heat_trace(TORUS, 0, 1.0) == pytest.approx(BESSEL1 ** 2, abs=1e-8)
    for t in (0.1, 3.0):
        assert vn_heat_trace(TORUS, 0, t) == pytest.approx(ive(0, 2 * t) ** 2, abs=1e-8)
    assert vn_heat_trace(TORUS, 1, 1e4) < 1e-3
    with pytest.raises(ValueError):
        vn_heat_trace(CIRCLE, 0, 0.0)


@pytest.mark.parametrize("lam", [0.25, 0.5, 1.0, 2.0, 3.5])
def test_circle_ids_arccos(lam):
    assert vn_spectral_function(CIRCLE, 0, lam) == pytest.approx(
        math.acos(1 - lam / 2) / math.pi, abs=1e-4)


def test_ids_properties():
    assert vn_spectral_function(CIRCLE, 0, 2.0) == pytest.approx(0.5, abs=1e-12)
    for j in range(3):
        assert vn_spectral_function(TORUS, j, 8.0) == pytest.approx(TORUS.orbit_counts[j])
    lams = np.linspace(0, 8, 33)
    N = [vn_spectral_function(TORUS, 1, lam) for lam in lams]
    assert all(b >= a - 1e-12 for a, b in zip(N, N[1:]))
    coarse = vn_spectral_function(TORUS, 0, 1.0, QuadratureGrid(64))
    assert vn_spectral_function(TORUS, 0, 1.0, QuadratureGrid(64, GAUSS)) == pytest.approx(
        coarse, abs=0.02)


def test_torus_weyl_law():
    lams = np.geomspace(0.01, 0.1, 8)
    N = np.array([vn_spectral_function(TORUS, 0, lam) for lam in lams])
    slope = np.polyfit(np.log(lams), np.log(N), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.05)
    assert N[-1] / lams[-1] == pytest.approx(1 / (4 * math.pi), rel=0.05)


def test_l2_betti():
    for X in (CIRCLE, TORUS):
        assert [l2_betti(X, j).value for j in range(X.dim + 1)] == [0.0] * (X.dim + 1)
    est = l2_betti(SURFACE, 1, QuadratureGrid(8))
    # Δ_1(0) = 0 drops the rank at one node; the generic rank decides the value
    assert est.value == 2.0 and est.max_rank == 2 and est.min_rank == 0
    assert est.sampled_measure == pytest.approx(2 + 2 / 8 ** 4)
    assert [l2_betti_from_euler(SURFACE, j) for j in range(3)] == [0, 2, 0]
    assert l2_betti_from_euler(builtin_complex("wedge2_F2"), 1) == 1
    with pytest.raises(UnsupportedOracle):
        l2_betti_from_euler(builtin_complex("torus3_Z3"), 1)
    with pytest.raises(UnsupportedOracle):
        l2_betti(builtin_complex("heisenberg_manifold"), 0)


def test_vn_zeta_closed_form():
    assert vn_zeta(CIRCLE, 0, 2, 1.0).real == pytest.approx(3 * 5 ** -1.5, abs=1e-10)
    ref, _ = integrate.quad(lambda th: (3 - 2 * math.cos(th)) ** -1.5 / (2 * math.pi), 0,
                            2 * math.pi)
    assert vn_zeta(CIRCLE, 0, 1.5, 1.0).real == pytest.approx(ref, abs=1e-10)
    big = vn_zeta(TORUS, 1, 2, 1e4)
    assert big.real * 1e8 == pytest.approx(2, rel=1e-2)
    with pytest.raises(ValueError):
        vn_zeta(TORUS, 0, 1.0, 1.0)
    with pytest.raises(ValueError):
        vn_zeta(CIRCLE, 0, 2, 0.0)


def test_vn_zeta_subtracts_only_generic_kernel():
    # the kernel of Δ_0(θ) at θ=0 is a node of the grid but has measure zero
    assert vn_zeta(TORUS, 0, 1.5, 1.0, QuadratureGrid(64)).real == pytest.approx(
        vn_zeta(TORUS, 0, 1.5, 1.0, QuadratureGrid(128)).real, abs=1e-6)


@pytest.mark.parametrize("name", ["circle_Z", "torus2_Z2"])
def test_grid_refinement(name):
    X = builtin_complex(name)
    g = default_grid(X.spec.rank)
    for j in range(X.dim + 1):
        for t in (0.1, 1.0, 10.0):
            assert abs(vn_heat_trace(X, j, t, g) - vn_heat_trace(X, j, t, g.refined())) <= 1e-6
        for s in (1.5, 2.0, 3.0):
            if s > X.spec.rank / 2:
                assert abs(vn_zeta(X, j, s, 1.0, g) - vn_zeta(X, j, s, 1.0, g.refined())) <= 1e-6
        for lam in (0.5, 1.0, 2.0):
            # interpolated counting function: second order, looser than the smooth integrals
            assert abs(vn_spectral_function(X, j, lam, g)
                       - vn_spectral_function(X, j, lam, g.refined())) <= 1e-4


def test_lattice_heat_kernel():
    assert lattice_heat_kernel(1, 1.0, 0) == pytest.approx(BESSEL1, abs=1e-12)
    series = math.exp(-0.2) * sum(0.1 ** (2 * k + 3) / (factorial(k) * factorial(k + 3))
                                  for k in range(10))
    assert lattice_heat_kernel(1, 0.1, 3) == pytest.approx(series, rel=1e-12)
    assert lattice_heat_kernel(1, 0.1, 3) == pytest.approx(1.3680e-4, rel=1e-3)
    assert lattice_heat_kernel(2, 1.0, (0, 0)) == pytest.approx(BESSEL1 ** 2, abs=1e-12)
    with pytest.raises(ValueError):
        lattice_heat_kernel(2, 1.0, (0, 0, 0))


def test_default_grid_and_support():
    assert default_grid(2).m == 256 and default_grid(3).m == 32 and default_grid(4).m == 16
    sup = spectral_support(CIRCLE, 0, QuadratureGrid(16))
    assert sup[0] == pytest.approx(0, abs=1e-12) and sup[-1] == pytest.approx(4)
    with pytest.raises(ValueError):
        QuadratureGrid(4)
    with pytest.raises(UnsupportedOracle):
        vn_heat_trace(builtin_complex("heisenberg_manifold"), 0, 1.0)
