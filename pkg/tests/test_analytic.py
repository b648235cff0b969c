import mpmath
import numpy as np
import pytest

from boundary_pairs import analytic as an
from boundary_pairs.errors import OutOfDomain, TooCloseToDirichletSpectrum


def _mp_cot(z, ell):
    k = mpmath.sqrt(mpmath.mpc(z))
    return complex(k * mpmath.cot(k * ell))


def _mp_csc(z, ell):
    k = mpmath.sqrt(mpmath.mpc(z))
    return complex(k / mpmath.sin(k * ell))


@pytest.mark.parametrize("z", [1e-2, -1e-2, 1e-2j, 0.007 - 0.007j])
def test_series_match_high_precision(z):
    mpmath.mp.dps = 40
    # truncation after six terms leaves O(x^6) ~ 1e-12 at |x| = 1e-2
    assert abs(an.cot_term(z, 1.0, series=True) - _mp_cot(z, 1)) <= 1e-13
    assert abs(an.csc_term(z, 1.0, series=True) - _mp_csc(z, 1)) <= 1e-13


def test_series_coefficients_exact():
    mpmath.mp.dps = 30
    cot = mpmath.taylor(lambda x: mpmath.sqrt(x) * mpmath.cot(mpmath.sqrt(x)) if x else 1, mpmath.mpf("1e-40"), 5)
    csc = mpmath.taylor(lambda x: mpmath.sqrt(x) / mpmath.sin(mpmath.sqrt(x)) if x else 1, mpmath.mpf("1e-40"), 5)
    assert np.allclose([float(c) for c in cot], an.COT_SERIES, rtol=1e-8, atol=1e-14)
    assert np.allclose([float(c) for c in csc], an.CSC_SERIES, rtol=1e-8, atol=1e-14)


@pytest.mark.parametrize("z", [2e-3, -2e-3, 2e-3j])
def test_series_and_trig_agree_near_threshold(z):
    for ell in (1.0, 0.5):
        assert abs(an.cot_term(z, ell, series=True) - an.cot_term(z, ell, series=False)) <= 1e-12
        assert abs(an.csc_term(z, ell, series=True) - an.csc_term(z, ell, series=False)) <= 1e-12


@pytest.mark.parametrize("z", [-3.0, 2.0 + 1j, 50.0, -0.4j])
def test_branch_independence(z):
    assert an.interval_dtn(1.3, z, branch=1) == pytest.approx(an.interval_dtn(1.3, z, branch=-1), abs=1e-12)


def test_interval_at_zero():
    lam = an.interval_dtn(1.0, 0.0)
    assert np.allclose(lam, [[1, -1], [-1, 1]], atol=1e-12)
    vals, vecs = np.linalg.eigh(lam.real)
    assert np.allclose(vals, [0.0, 2.0], atol=1e-12)
    assert abs(abs(vecs[:, 0] @ np.array([1, 1]) / np.sqrt(2)) - 1) <= 1e-12
    assert abs(abs(vecs[:, 1] @ np.array([-1, 1]) / np.sqrt(2)) - 1) <= 1e-12
    assert np.allclose(np.linalg.eigvalsh(an.interval_dtn(0.25, 0.0).real), [0.0, 8.0])


def test_interval_norm_identity():
    lam = an.interval_dtn(1.0, -1.0)
    assert 1.0 / np.min(np.linalg.eigvalsh(lam.real)) == pytest.approx(np.cosh(0.5) / np.sinh(0.5), abs=1e-12)


def test_interval_guard():
    with pytest.raises(TooCloseToDirichletSpectrum):
        an.interval_dtn(1.0, np.pi**2)
    assert np.isfinite(an.interval_dtn(1.0, np.pi**2 + 1e-3)).all()


def test_interval_dirichlet_points():
    assert np.allclose(an.interval_dirichlet_points(1.0, 0, 100), [np.pi**2, 4 * np.pi**2, 9 * np.pi**2])
    assert an.interval_dirichlet_points(1.0, -5, 0).size == 0


def test_interval_solution_cases():
    assert an.interval_solution(1.0, 0.0, (1.0, 3.0), 0.25) == pytest.approx(1.5)
    # z = -1: sinh((l - s)) / sinh(l)
    assert an.interval_solution(1.0, -1.0, (1.0, 0.0), 0.3) == pytest.approx(np.sinh(0.7) / np.sinh(1.0), abs=1e-14)
    assert an.interval_solution(1.0, 4.0, (0.0, 1.0), 0.5) == pytest.approx(np.sin(1.0) / np.sin(2.0), abs=1e-14)
    assert an.interval_solution(2.0, 1.0, (2.0, 5.0), 2.0) == 5.0
    with pytest.raises(OutOfDomain):
        an.interval_solution(1.0, 0.0, (1.0, 1.0), 1.5)


def test_interval_solution_derivative_is_dtn():
    ell, z, h = 1.0, 2.0 + 0.3j, 1e-6
    lam = an.interval_dtn(ell, z)
    for phi, row in (((1.0, 0.0), 0), ((0.0, 1.0), 0)):
        d0 = -(an.interval_solution(ell, z, phi, h) - an.interval_solution(ell, z, phi, 0.0)) / h
        assert d0 == pytest.approx(lam[row] @ np.array(phi), abs=1e-5)


def test_chain_rejects_bad_input():
    with pytest.raises(ValueError):
        an.ChainPair((1.0, -1.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        an.ChainPair((1.0,), (1.0, 2.0))


def test_jacobi_coefficients_random_chains():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 12))
        c = an.ChainPair(tuple(rng.uniform(0.1, 2.0, n)), tuple(rng.uniform(0.1, 2.0, n)))
        lam = an.chain_dtn(c, 0.0)
        ell, rho = np.array(c.lengths), np.array(c.rhos)
        # closed forms with the left Dirichlet end at x_0 and a free right end
        for i in range(n):
            expected = (1 / ell[i] + (1 / ell[i + 1] if i + 1 < n else 0)) / rho[i]
            assert abs(lam[i, i] - expected) <= 1e-12 * (1 + abs(expected))
            if i + 1 < n:
                expected = -1 / (ell[i + 1] * np.sqrt(rho[i] * rho[i + 1]))
                assert abs(lam[i, i + 1] - expected) <= 1e-12 * (1 + abs(expected))
        off, diag = an.jacobi_coefficients_at_zero(c)
        assert np.allclose(np.diag(lam).real, diag, rtol=1e-12)
        assert np.allclose(np.diag(lam, 1).real, off, rtol=1e-12)


def test_uniform_chain_at_zero():
    n = 4
    c = an.ChainPair.uniform(n)
    lam = an.chain_dtn(c, 0.0).real
    # rho = l = 1/N gives 2 N^2 on the diagonal, N^2 at the free end, -N^2 off
    assert np.allclose(np.diag(lam), [2 * n**2] * (n - 1) + [n**2])
    assert np.allclose(np.diag(lam, 1), -(n**2))


def test_chain_matches_interval_blocks():
    rng = np.random.default_rng(11)
    c = an.ChainPair(tuple(rng.uniform(0.3, 1.0, 4)), tuple(rng.uniform(0.5, 2.0, 4)))
    z = 1.7 + 0.2j
    n = c.size
    full = np.zeros((n + 1, n + 1), complex)
    for i, ell in enumerate(c.lengths):
        full[i : i + 2, i : i + 2] += an.interval_dtn(ell, z)
    # drop the Dirichlet node x_0 and rescale by the trace weights
    scale = 1 / np.sqrt(np.array(c.rhos))
    expected = scale[:, None] * full[1:, 1:] * scale[None, :]
    assert np.max(np.abs(an.chain_dtn(c, z) - expected)) <= 1e-13


def test_chain_dirichlet_spectrum():
    c = an.ChainPair((1.0, 0.5), (1.0, 1.0))
    pts = an.chain_dirichlet_spectrum(c, 50.0)
    assert np.allclose(pts, [np.pi**2, 4 * np.pi**2, 4 * np.pi**2])
    assert c.lowest_dirichlet == pytest.approx(np.pi**2)
    with pytest.raises(ValueError):
        an.chain_dirichlet_spectrum(c, 0.0)


def test_chain_neumann_spectrum():
    c = an.ChainPair.uniform(3, total_length=2.0)
    assert np.allclose(c.neumann_spectrum(2), [(np.pi / 4) ** 2, (3 * np.pi / 4) ** 2])


@pytest.mark.parametrize(
    "bcs, exact",
    [
        (("dirichlet", "dirichlet"), lambda k: ((k + 1) * np.pi) ** 2),
        (("dirichlet", "neumann"), lambda k: ((k + 0.5) * np.pi) ** 2),
        (("neumann", "neumann"), lambda k: (k * np.pi) ** 2),
    ],
)
def test_fd_oracle_converges(bcs, exact):
    vals = an.fd_oracle(1.0, *bcs, mesh_points=2000, count=4)
    ref = np.array([exact(k) for k in range(4)])
    assert np.allclose(vals, ref, rtol=1e-5, atol=1e-8)


def test_fd_oracle_second_order():
    errs = [abs(an.fd_oracle(1.0, "dirichlet", "neumann", m, count=1)[0] - np.pi**2 / 4) for m in (201, 401)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_fd_oracle_validation():
    with pytest.raises(ValueError):
        an.fd_oracle(1.0, "dirichlet", "neumann", 10)
    with pytest.raises(ValueError):
        an.fd_oracle(1.0, "robin", "neumann", 100)
