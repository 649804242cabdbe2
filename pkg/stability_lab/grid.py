"""Finite stand-ins for "for all a in A": lattices, ball samples and tuples."""

import itertools
from typing import Iterator, List, Sequence

import numpy as np

from stability_lab.algebra import AlgebraMismatch, Element, NormedSpace
from stability_lab.typedefs import FloatArray
from stability_lab.util import rng_for

DEFAULT_LATTICE_RADIUS = 10
DEFAULT_RANDOM_COUNT = 256
DEFAULT_TUPLE_COUNT = 512
MAX_LATTICE_POINTS = 4096


class VerificationError(Exception):
    pass


class EmptyGrid(VerificationError):
    pass


class Grid:
    def __init__(self, points: Sequence[Element], description: str):
        if not points:
            raise EmptyGrid(f"Grid '{description}' has no points")
        space = points[0].space
        for p in points:
            if not p.space.same_as(space):
                raise AlgebraMismatch(
                    f"Grid '{description}' mixes {space.space_id} and {p.space.space_id}"
                )
        self.points = list(points)
        self.description = description
        self.space = space

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.points)

    def extended(self, other: "Grid") -> "Grid":
        return Grid(self.points + other.points, f"{self.description} + {other.description}")

    def nonzero(self) -> "Grid":
        return Grid(
            [p for p in self.points if p.coords.any()], f"{self.description} \\ 0"
        )


def lattice_points(dim: int, radius: int) -> FloatArray:
    """The integer lattice {-r..r}^dim, or its coordinate axes when that is too large."""
    side = range(-radius, radius + 1)
    if (2 * radius + 1) ** dim <= MAX_LATTICE_POINTS:
        return np.array(list(itertools.product(side, repeat=dim)), dtype=float)
    rows = [np.zeros(dim)]
    for axis in range(dim):
        for t in side:
            if t != 0:
                row = np.zeros(dim)
                row[axis] = t
                rows.append(row)
    return np.array(rows)


def ball_points(
    space: NormedSpace, count: int, rng: np.random.Generator, radius: float = 1.0
) -> List[Element]:
    """``count`` random points of the closed ball of ``radius`` in ``space``'s norm."""
    if count <= 0:
        return []
    directions = rng.standard_normal((count, space.dim))
    lengths = space.norms(directions)
    lengths[lengths == 0.0] = 1.0
    radii = radius * rng.random(count) ** (1.0 / space.dim)
    rows = directions * (radii / lengths)[:, None]
    return [Element(space, row) for row in rows]


def scaled_grid(
    space: NormedSpace,
    radius: float,
    lattice_radius: int = DEFAULT_LATTICE_RADIUS,
    random_count: int = DEFAULT_RANDOM_COUNT,
    seed: int = 0,
) -> Grid:
    lattice = lattice_points(space.dim, lattice_radius)
    top = float(np.max(space.norms(lattice), initial=0.0))
    if top > 0.0:
        lattice = lattice * (radius / top)
    rng = rng_for(seed, "grid", space.space_id, repr(radius))
    points = [Element(space, row) for row in lattice]
    points += ball_points(space, random_count, rng, radius)
    return Grid(
        points,
        f"lattice r={lattice_radius} + {random_count} random in ball({radius:g}) "
        f"of {space.space_id}",
    )


def default_grid(
    space: NormedSpace,
    lattice_radius: int = DEFAULT_LATTICE_RADIUS,
    random_count: int = DEFAULT_RANDOM_COUNT,
    seed: int = 0,
) -> Grid:
    return scaled_grid(space, 1.0, lattice_radius, random_count, seed)


def sample_tuples(
    grid: Grid, n: int, count: int = DEFAULT_TUPLE_COUNT, seed: int = 0
) -> List[List[Element]]:
    """Every grid point repeated n times, then ``count`` seeded random n-tuples."""
    tuples = [[p] * n for p in grid.points]
    rng = rng_for(seed, "tuples", grid.description, str(n))
    for row in rng.integers(0, len(grid), size=(count, n)):
        tuples.append([grid.points[int(i)] for i in row])
    return tuples
