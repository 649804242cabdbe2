import numpy as np
import pytest

from stability_lab.algebra import (
    AlgebraMismatch,
    Element,
    make_matrix_algebra,
    make_scalar_algebra,
    norm,
)
from stability_lab.grid import (
    EmptyGrid,
    Grid,
    ball_points,
    default_grid,
    lattice_points,
    sample_tuples,
    scaled_grid,
)
from stability_lab.util import rng_for

R = make_scalar_algebra()
M3 = make_matrix_algebra(3)


def test_small_lattices_are_complete():
    assert lattice_points(1, 2).ravel().tolist() == [-2.0, -1.0, 0.0, 1.0, 2.0]
    assert lattice_points(2, 1).shape == (9, 2)


def test_large_lattices_fall_back_to_axes():
    points = lattice_points(9, 10)
    assert points.shape == (1 + 9 * 20, 9)
    assert (np.count_nonzero(points, axis=1) <= 1).all()


def test_scaled_grid_fills_the_ball():
    grid = scaled_grid(R, 4.0, lattice_radius=2, random_count=3, seed=1)
    assert len(grid) == 8
    assert [p.coords[0] for p in grid.points[:5]] == [-4.0, -2.0, 0.0, 2.0, 4.0]
    assert max(norm(p) for p in grid) <= 4.0


def test_grids_are_reproducible():
    first = default_grid(M3, lattice_radius=1, random_count=5, seed=9)
    second = default_grid(M3, lattice_radius=1, random_count=5, seed=9)
    assert all(np.array_equal(a.coords, b.coords) for a, b in zip(first, second))


def test_ball_points_respect_the_radius():
    points = ball_points(M3, 50, rng_for(0, "ball"), radius=2.0)
    assert len(points) == 50
    assert max(norm(p) for p in points) <= 2.0 * (1 + 1e-12)
    assert ball_points(M3, 0, rng_for(0, "ball")) == []


def test_grid_errors():
    with pytest.raises(EmptyGrid):
        Grid([], "empty")
    with pytest.raises(AlgebraMismatch):
        Grid([Element(R, [1.0]), Element(M3, np.zeros(9))], "mixed")
    with pytest.raises(EmptyGrid):
        Grid([Element(R, [0.0])], "origin").nonzero()


def test_extended_and_nonzero():
    small = default_grid(R, lattice_radius=1, random_count=0)
    large = scaled_grid(R, 10.0, lattice_radius=1, random_count=0)
    both = small.extended(large)
    assert len(both) == 6
    assert len(both.nonzero()) == 4


def test_sample_tuples():
    grid = default_grid(R, lattice_radius=2, random_count=0)
    tuples = sample_tuples(grid, 3, count=10, seed=4)
    assert len(tuples) == len(grid) + 10
    assert all(len(t) == 3 for t in tuples)
    assert tuples[0] == [grid.points[0]] * 3
    again = sample_tuples(grid, 3, count=10, seed=4)
    assert all(a is b for s, t in zip(tuples, again) for a, b in zip(s, t))
