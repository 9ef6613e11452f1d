import numpy as np
import pytest

from udmrg.linalg import dag, max_abs, random_hermitian, random_unitary
from udmrg.models import PAULI_X, PAULI_Z
from udmrg.spectral import (
    DEGENERACY_THRESHOLD,
    SpectralPoint,
    align_phases,
    derivative_overlaps,
    eigh_sorted,
    max_overlap_permutation,
    second_derivative_overlaps,
    track_hermitian_family,
)


def rotating_family(grid, omega=0.3):
    """Two-level Hamiltonians rotating in the xz-plane at rate ``omega``."""
    return [0.5 * (np.cos(omega * t) * PAULI_Z + np.sin(omega * t) * PAULI_X)
            for t in grid]


class TestEighSorted:
    def test_ascending_and_orthonormal(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            point = eigh_sorted(random_hermitian(rng, 5))
            assert np.all(np.diff(point.eigenvalues) >= 0)
            assert max_abs(dag(point.vectors) @ point.vectors - np.eye(5)) < 1e-13

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="not hermitian"):
            eigh_sorted(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_reconstructs_input(self):
        h = random_hermitian(np.random.default_rng(1), 4)
        p = eigh_sorted(h)
        np.testing.assert_allclose((p.vectors * p.eigenvalues) @ dag(p.vectors),
                                   h, atol=1e-13)


def test_max_overlap_permutation_recovers_permutation():
    w = np.array([[0.1, 0.9, 0.0],
                  [0.8, 0.1, 0.1],
                  [0.0, 0.2, 0.95]])
    np.testing.assert_array_equal(max_overlap_permutation(w), [1, 0, 2])


def test_max_overlap_permutation_greedy_order():
    # row 1 has the largest maximum so it claims column 0 first; row 0 must
    # settle for its second-best column.
    w = np.array([[0.6, 0.5],
                  [0.9, 0.4]])
    np.testing.assert_array_equal(max_overlap_permutation(w), [1, 0])


def test_align_phases_makes_diagonal_real_nonnegative():
    rng = np.random.default_rng(2)
    prev = eigh_sorted(random_hermitian(rng, 4))
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=4))
    cur = SpectralPoint(eigenvalues=prev.eigenvalues,
                        vectors=prev.vectors * phases[None, :])
    fixed = align_phases(prev, cur)
    overlap = np.diagonal(dag(prev.vectors) @ fixed.vectors)
    assert np.all(overlap.real > 1 - 1e-12)
    assert max_abs(overlap.imag) < 1e-12
    again = align_phases(prev, fixed)
    np.testing.assert_allclose(again.vectors, fixed.vectors, atol=1e-14)


def test_align_phases_dimension_mismatch():
    a = eigh_sorted(np.eye(2))
    b = eigh_sorted(np.eye(3))
    with pytest.raises(ValueError, match="mismatch"):
        align_phases(a, b)


def test_track_validates_grid():
    mats = [np.eye(2), np.eye(2)]
    with pytest.raises(ValueError, match="strictly increasing"):
        track_hermitian_family([0.0, 0.0], mats)
    with pytest.raises(ValueError, match="matching lengths"):
        track_hermitian_family([0.0, 1.0, 2.0], mats)
    with pytest.raises(ValueError, match="empty"):
        track_hermitian_family([], [])


def test_track_follows_diabatic_branches_through_crossing():
    """H = diag(t, -t) crosses at t = 0; tracking keeps the branch order."""
    grid = np.array([-0.25, -0.15, -0.05, 0.05, 0.15, 0.25])
    track = track_hermitian_family(grid, [np.diag([t, -t]).astype(complex)
                                          for t in grid])
    # every post-crossing point needs the max-overlap reordering because the
    # raw eigh output re-sorts ascending against the tracked order
    assert track.degenerate_points == [3, 4, 5]
    for t, point in zip(grid, track.points):
        np.testing.assert_allclose(point.eigenvalues, [t, -t], atol=1e-14)


def test_track_smooth_family_has_no_degenerate_points():
    grid = np.linspace(0.0, 1.0, 11)
    track = track_hermitian_family(grid, rotating_family(grid))
    assert track.degenerate_points == []
    assert len(track) == 11
    assert track.dim == 2


def test_derivative_overlaps_rotating_oracle():
    """The off-diagonal overlap of the rotating family is omega / 2 exactly."""
    omega, h = 0.3, 1e-3
    grid = 0.4 + h * np.arange(-2, 3)
    track = track_hermitian_family(grid, rotating_family(grid, omega))
    d = derivative_overlaps(track, 2)
    assert abs(abs(d[0, 1]) - omega / 2) < 1e-6
    assert abs(abs(d[1, 0]) - omega / 2) < 1e-6
    # phase alignment kills the diagonal at this order
    assert max_abs(np.diagonal(d)) < 1e-9


def test_derivative_overlaps_forward_scheme_and_bounds():
    grid = np.linspace(0.0, 1.0, 6)
    track = track_hermitian_family(grid, rotating_family(grid))
    fwd = derivative_overlaps(track, 0, scheme="forward")
    assert fwd.shape == (2, 2)
    with pytest.raises(IndexError):
        derivative_overlaps(track, 0)
    with pytest.raises(IndexError):
        derivative_overlaps(track, 5, scheme="forward")
    with pytest.raises(ValueError, match="scheme"):
        derivative_overlaps(track, 2, scheme="midpoint")


def test_derivative_overlaps_anti_hermitian_refinement():
    """The symmetrized residual D + D^H shrinks by ~4x per grid halving."""
    norms = []
    for n in (21, 41, 81):
        grid = np.linspace(0.0, 2.0, n)
        base = np.diag(np.arange(3, dtype=float))
        rng = np.random.default_rng(15)
        vs = [random_unitary(rng, 3)]
        # smooth rotation: V(t) = exp(-i G t) V0 for a fixed generator
        g = random_hermitian(np.random.default_rng(16), 3, scale=0.4)
        w, u = np.linalg.eigh(g)
        mats = []
        for t in grid:
            v = (u * np.exp(-1j * w * t)) @ dag(u) @ vs[0]
            mats.append(v @ base @ dag(v))
        track = track_hermitian_family(grid, mats)
        d = derivative_overlaps(track, (n - 1) // 2)
        norms.append(max_abs(d + dag(d)))
    ratios = [a / b for a, b in zip(norms, norms[1:])]
    for r in ratios:
        assert 3.2 < r < 4.8


def test_second_derivative_overlaps_requires_uniform_spacing():
    grid = np.array([0.0, 0.1, 0.3])
    track = track_hermitian_family(grid, rotating_family(grid))
    with pytest.raises(ValueError, match="uniform spacing"):
        second_derivative_overlaps(track, 1)


def test_second_derivative_overlaps_quadratic_oracle():
    # eigenvector components vary like cos/sin of (omega t / 2); the second
    # derivative overlap onto the partner state carries a curvature of order
    # omega^2 / 4 while diagonal terms pick up -omega^2 / 4.
    omega, h = 0.5, 1e-3
    grid = 0.3 + h * np.arange(-1, 2)
    track = track_hermitian_family(grid, rotating_family(grid, omega))
    d2 = second_derivative_overlaps(track, 1)
    assert abs(d2[0, 0].real + omega**2 / 4) < 1e-5
    assert abs(d2[1, 1].real + omega**2 / 4) < 1e-5


def test_degeneracy_threshold_is_sensible():
    assert 0.0 < DEGENERACY_THRESHOLD < 1.0
