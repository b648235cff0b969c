import warnings

import numpy as np
import pytest

from boundary_pairs import analytic as an
from boundary_pairs import pair_core as pc
from boundary_pairs import spectral as sp
from boundary_pairs.errors import (
    GridDensityWarning,
    NotAnIsolatedHit,
    TooCloseToDirichletSpectrum,
    WindowInsideDirichletPoint,
)

from conftest import random_graph_pairs


def _window(p):
    return (float(p.neumann_spectrum.min()) - 1.0, float(p.neumann_spectrum.max()) + 1.0)


def test_path3_hits(path3):
    hits = sp.find_neumann_eigenvalues(sp.matrix_provider(path3), (-0.5, 4.0))
    assert [h.eigenvalue for h in hits] == pytest.approx([0.0, 1.0, 3.0], abs=1e-12)
    assert [h.multiplicity for h in hits] == [1, 1, 1]
    assert all(h.min_eig_residual <= 1e-10 for h in hits)
    assert not any(h.at_dirichlet for h in hits)


# roots in the first cell after a pole trip the steepness heuristic; monotone branches make it advisory only
@pytest.mark.filterwarnings("ignore::boundary_pairs.errors.GridDensityWarning")
def test_hits_cover_neumann_spectrum_of_random_graphs():
    for g in random_graph_pairs(12, seed=5, max_n=15, max_m=4):
        p = pc.graph_pair(g)
        hits = sp.find_neumann_eigenvalues(sp.matrix_provider(p), _window(p), grid=512)
        found = np.repeat([h.eigenvalue for h in hits], [h.multiplicity for h in hits])
        assert found.size == p.n
        assert np.allclose(np.sort(found), np.sort(p.neumann_spectrum), atol=1e-8)


def test_degenerate_eigenvalue_multiplicity():
    # star with three boundary leaves: eigenvalue 1 has multiplicity 2 away from the Dirichlet point
    g = pc.GraphModel.from_edges([("o", "x"), ("o", "y"), ("o", "z")], ["x", "y", "z"])
    p = pc.graph_pair(g)
    hits = sp.find_neumann_eigenvalues(sp.matrix_provider(p), _window(p))
    got = {round(h.eigenvalue, 9): h.multiplicity for h in hits}
    vals, counts = np.unique(np.round(p.neumann_spectrum, 9), return_counts=True)
    assert got == dict(zip(vals, counts))


def test_kernel_transport(path3):
    for h in sp.find_neumann_eigenvalues(sp.matrix_provider(path3), (-0.5, 4.0)):
        assert sp.kernel_transport_residual(path3, h.eigenvalue, h.multiplicity) <= 1e-8


def test_interval_hits_and_determinant():
    pr = an.interval_provider(1.0)
    hits = sp.find_neumann_eigenvalues(pr, (-0.5, 100.0))
    assert [h.eigenvalue for h in hits] == pytest.approx([0.0, np.pi**2, 4 * np.pi**2, 9 * np.pi**2], rel=1e-10, abs=1e-10)
    assert [h.at_dirichlet for h in hits] == [False, True, True, True]
    zeros = sp.determinant_zeros(pr, (-0.5, 100.0))
    assert len(zeros) == 1 and abs(zeros[0]) <= 1e-10


def test_interval_window_inside_tube():
    pr = an.interval_provider(1.0)
    with pytest.raises(WindowInsideDirichletPoint):
        sp.find_neumann_eigenvalues(pr, (np.pi**2 - 1e-9, np.pi**2 + 1e-9))


def test_window_validation(path3):
    with pytest.raises(ValueError):
        sp.find_neumann_eigenvalues(sp.matrix_provider(path3), (1.0, 0.0))
    with pytest.raises(ValueError):
        sp.find_neumann_eigenvalues(sp.matrix_provider(path3), (0.0, 1.0), grid=4)


def test_chain_ground_truth():
    c = an.ChainPair.uniform(16)
    hits = sp.find_neumann_eigenvalues(an.chain_provider(c), (-0.5, 220.0))
    vals = np.array([h.eigenvalue for h in hits[:5]])
    exact = ((np.arange(5) + 0.5) * np.pi) ** 2
    assert np.max(np.abs(vals - exact) / exact) <= 1e-8
    fd = an.fd_oracle(1.0, "dirichlet", "neumann", 4000, count=5)
    assert np.max(np.abs(vals - fd) / fd) <= 1e-3


def test_coarse_grid_warns_near_pole():
    p = pc.random_pair(5, 2, np.random.default_rng(1))
    pr = sp.matrix_provider(p)
    with pytest.warns(GridDensityWarning):
        hits = sp.find_neumann_eigenvalues(pr, _window(p), grid=16)
    assert np.allclose([h.eigenvalue for h in hits], np.sort(p.neumann_spectrum), atol=1e-10)


def test_threads_do_not_change_results(monkeypatch, path3):
    pr = sp.matrix_provider(path3)
    serial = sp.find_neumann_eigenvalues(pr, (-0.5, 4.0))
    monkeypatch.setenv("BOUNDARY_PAIRS_THREADS", "4")
    parallel = sp.find_neumann_eigenvalues(pr, (-0.5, 4.0))
    assert [h.as_dict() for h in serial] == [h.as_dict() for h in parallel]
    monkeypatch.setenv("BOUNDARY_PAIRS_THREADS", "nonsense")
    assert sp._threads() == 1


def test_monotonicity(path3):
    pr = sp.matrix_provider(path3)
    gaps, _ = sp.dirichlet_free_gaps(pr, (-2.0, 6.0))
    assert len(gaps) == 2
    for gap in gaps:
        rep = sp.monotonicity_suite(pr, gap)
        assert rep.passed and rep.max_violation <= 1e-10
    rep = sp.monotonicity_suite(pr, (-2.0, 0.0))
    assert rep.min_eig_nonpositive >= -1e-12


def test_monotonicity_rejects_dirichlet_point(path3):
    with pytest.raises(TooCloseToDirichletSpectrum):
        sp.monotonicity_suite(sp.matrix_provider(path3), (1.0, 3.0))


def test_herglotz_random_graphs():
    zs = (1j, 1 + 1j, 3 + 0.5j)
    for g in random_graph_pairs(10, seed=8, max_n=20, max_m=5):
        rep = sp.herglotz_suite(sp.matrix_provider(pc.graph_pair(g)), zs)
        assert rep.max_im_dtn <= 1e-12 and rep.min_im_ntd >= -1e-12
        assert rep.passed


def test_herglotz_needs_upper_half_plane(path3):
    with pytest.raises(ValueError):
        sp.herglotz_suite(sp.matrix_provider(path3), [1.0])


def test_pole_probe(path3):
    pr = sp.matrix_provider(path3)
    for lam in (0.0, 1.0, 3.0):
        rep = sp.pole_probe(pr, lam)
        assert rep.bounded and rep.verdict == "pole"
        assert rep.slope == pytest.approx(-1.0, abs=0.05)
    assert sp.pole_probe(pr, 0.5).verdict == "no pole"
    with pytest.raises(NotAnIsolatedHit):
        sp.pole_probe(pr, 2.0)


def test_pole_probe_chain():
    c = an.ChainPair((1.0,), (1.0,))
    rep = sp.pole_probe(an.chain_provider(c), np.pi**2 / 4)
    assert rep.bounded and rep.verdict == "pole"


def test_isolation_probe(path3):
    pr = sp.matrix_provider(path3)
    rep = sp.isolation_probe(pr, 1.0, 0.25)
    assert rep.isolated and rep.in_pencil_spectrum
    assert not sp.isolation_probe(pr, 0.5, 0.1).in_pencil_spectrum
    with pytest.raises(TooCloseToDirichletSpectrum):
        sp.isolation_probe(pr, 1.0, 1.5)


def test_identity_suite_random(rng):
    p = pc.random_pair(12, 4, rng, complex_entries=True)
    rep = sp.identity_suite(p, [-1.0, 0.5 + 1j, 2 + 1j])
    assert rep.passed, [c for c in rep.checks if not c.passed]
    names = {c.name.split("[")[0] for c in rep.checks}
    assert {"transfer_inverse", "krein", "ntd_difference", "derivative_fd", "green"} <= names


def test_identity_suite_skips_near_spectra(path3):
    rep = sp.identity_suite(path3, [2.0, 1.0])
    assert rep.skipped
    assert rep.passed


def test_check_verdict():
    assert sp.Check("x", 1e-11, 1e-10).verdict == "pass"
    assert sp.Check("x", 2e-10, 1e-10).verdict == "fail"
    assert sp.Check("x", float("nan"), 1e-10).verdict == "fail"


def test_no_warnings_default_grid(path3):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sp.find_neumann_eigenvalues(sp.matrix_provider(path3), (-0.5, 4.0))
