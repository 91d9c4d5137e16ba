"""Deterministic test spaces with known dimensions and natural measures."""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from scipy.spatial.distance import pdist, squareform

from core.metric_core import build_space
from models.generator import GeneratorKind, GeneratorSpec, GroundTruth
from models.measure import SampledMeasure
from models.metric_space import FiniteMetricSpace

logger = logging.getLogger(__name__)

SIERPINSKI_SHIFTS = np.array([[0.0, 0.0], [0.5, 0.0], [0.25, math.sqrt(3) / 4]])

Generated = Tuple[FiniteMetricSpace, Optional[SampledMeasure], GroundTruth]


def moran_dimension(ratios: Sequence[float], tol: float = 1e-12) -> float:
    """
    Root ``s >= 0`` of ``sum(r ** s) = 1`` by Brent's method.

    Args:
        ratios: Contraction ratios, each in (0, 1)
        tol: Absolute tolerance on the root

    Returns:
        Similarity dimension
    """
    ratios = [float(r) for r in ratios]
    if not ratios:
        raise ValueError("moran_dimension needs at least one ratio")
    for r in ratios:
        if not 0 < r < 1:
            raise ValueError(f"ratio {r} outside (0, 1)")

    def excess(s: float) -> float:
        return math.fsum(r ** s for r in ratios) - 1.0

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
    return float(optimize.brentq(excess, 0.0, hi, xtol=tol))


def _coords_space(coords: np.ndarray, prefix: str) -> FiniteMetricSpace:
    if coords.shape[0] == 1:
        dist = np.zeros((1, 1))
    else:
        dist = squareform(pdist(coords, metric='euclidean'))
    ids = [f"{prefix}{i}" for i in range(coords.shape[0])]
    return build_space(dist, ids=ids, coords=coords, metric="euclidean", check_triangle=False)


def _jitter(coords: np.ndarray, spec: GeneratorSpec) -> np.ndarray:
    if spec.jitter <= 0 or coords.shape[0] < 2:
        return coords
    h = float(pdist(coords).min())
    rng = np.random.default_rng(spec.seed)
    return coords + rng.uniform(-spec.jitter * h, spec.jitter * h, size=coords.shape)


def _grid(spec: GeneratorSpec) -> Generated:
    coords = _jitter(np.linspace(0.0, 1.0, spec.n)[:, None], spec)
    space = _coords_space(coords, "g")
    dim = 1.0 if spec.n > 1 else 0.0
    truth = GroundTruth(kind="grid", dimension=dim, piece_dimensions=[dim],
                        piece_slices=[(0, space.n)], q_expected=np.full(space.n, dim))
    return space, SampledMeasure.uniform(space.n), truth


def _cantor(spec: GeneratorSpec) -> Generated:
    r1, r2 = spec.ratios
    dim = moran_dimension([r1, r2])
    p1, p2 = r1 ** dim, r2 ** dim
    points = np.zeros(1)
    weights = np.ones(1)
    for _ in range(spec.depth):
        points = np.concatenate([r1 * points, r2 * points + (1.0 - r2)])
        weights = np.concatenate([p1 * weights, p2 * weights])
    coords = _jitter(points[:, None], spec)
    space = _coords_space(coords, "c")
    truth = GroundTruth(kind="cantor", dimension=dim, piece_dimensions=[dim],
                        piece_slices=[(0, space.n)], q_expected=np.full(space.n, dim))
    return space, SampledMeasure(weights / weights.sum()), truth


def _sierpinski(spec: GeneratorSpec) -> Generated:
    points = np.zeros((1, 2))
    for _ in range(spec.depth):
        points = np.concatenate([0.5 * points + shift for shift in SIERPINSKI_SHIFTS])
    coords = _jitter(points, spec)
    space = _coords_space(coords, "s")
    dim = moran_dimension([0.5, 0.5, 0.5])
    truth = GroundTruth(kind="sierpinski", dimension=dim, piece_dimensions=[dim],
                        piece_slices=[(0, space.n)], q_expected=np.full(space.n, dim))
    return space, SampledMeasure.uniform(space.n), truth


def _anchor(space: FiniteMetricSpace, rightmost: bool) -> int:
    """Extreme point of a piece: by first coordinate, else the first or last index."""
    if space.coords is not None:
        column = space.coords[:, 0]
        return int(np.argmax(column) if rightmost else np.argmin(column))
    return space.n - 1 if rightmost else 0


def _glue(spec: GeneratorSpec) -> Generated:
    parts = [generate(piece) for piece in spec.pieces]
    spaces = [p[0] for p in parts]
    sizes = [s.n for s in spaces]
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    ids = [f"{k}.{pid}" for k, s in enumerate(spaces) for pid in s.ids]

    one_dimensional = all(s.coords is not None and s.coords.shape[1] == 1 for s in spaces)
    if one_dimensional:
        placed = []
        right = None
        for s in spaces:
            x = s.coords[:, 0]
            shift = 0.0 if right is None else right + spec.gap - x.min()
            placed.append(x + shift)
            right = float(x.max() + shift)
        coords = np.concatenate(placed)[:, None]
        space = build_space(squareform(pdist(coords)), ids=ids, coords=coords,
                            metric="euclidean", check_triangle=False)
    else:
        # chain metric: piece k is joined to piece k+1 through its right anchor
        left = [_anchor(s, False) for s in spaces]
        right = [_anchor(s, True) for s in spaces]
        span = [float(s.dist[left[k], right[k]]) for k, s in enumerate(spaces)]
        dist = np.zeros((starts[-1], starts[-1]))
        for i, si in enumerate(spaces):
            dist[starts[i]:starts[i + 1], starts[i]:starts[i + 1]] = si.dist
            for j in range(i + 1, len(spaces)):
                sj = spaces[j]
                bridge = spec.gap * (j - i) + sum(span[i + 1:j])
                block = si.dist[:, right[i]][:, None] + bridge + sj.dist[left[j], :][None, :]
                dist[starts[i]:starts[i + 1], starts[j]:starts[j + 1]] = block
                dist[starts[j]:starts[j + 1], starts[i]:starts[i + 1]] = block.T
        space = build_space(dist, ids=ids, metric="precomputed", check_triangle=False)

    weights = np.concatenate([p[1].weights / p[1].total / len(parts) for p in parts])
    piece_dims = [p[2].dimension for p in parts]
    truth = GroundTruth(
        kind="glue",
        dimension=max(piece_dims),
        piece_dimensions=piece_dims,
        piece_slices=[(int(starts[k]), int(starts[k + 1])) for k in range(len(parts))],
        q_expected=np.concatenate([p[2].q_expected for p in parts]),
    )
    return space, SampledMeasure(weights), truth


def _product(spec: GeneratorSpec) -> Generated:
    parts = [generate(piece) for piece in spec.pieces]
    for space, _, _ in parts:
        if space.coords is None:
            raise ValueError("product pieces need coordinates")
    coords = parts[0][0].coords
    weights = parts[0][1].weights / parts[0][1].total
    q = parts[0][2].q_expected
    for space, measure, truth in parts[1:]:
        na, nb = coords.shape[0], space.n
        coords = np.hstack([np.repeat(coords, nb, axis=0), np.tile(space.coords, (na, 1))])
        weights = np.outer(weights, measure.weights / measure.total).ravel()
        q = np.add.outer(q, truth.q_expected).ravel()
    space = _coords_space(coords, "x")
    dim = sum(p[2].dimension for p in parts)
    truth = GroundTruth(kind="product", dimension=dim, piece_dimensions=[dim],
                        piece_slices=[(0, space.n)], q_expected=q)
    return space, SampledMeasure(weights), truth


_BUILDERS = {
    GeneratorKind.GRID: _grid,
    GeneratorKind.CANTOR: _cantor,
    GeneratorKind.SIERPINSKI: _sierpinski,
    GeneratorKind.GLUE: _glue,
    GeneratorKind.PRODUCT: _product,
}


def generate(spec: GeneratorSpec) -> Generated:
    """
    Build a space, its natural measure and its ground truth.

    Args:
        spec: Validated generator spec

    Returns:
        (space, measure, ground truth)
    """
    space, measure, truth = _BUILDERS[spec.kind](spec)
    if space.n != len(measure.weights):
        raise ValueError(f"{spec.kind.value}: duplicate points merged; measure no longer matches the space")
    logger.info(f"Generated {spec.kind.value}: {space.n} points, dimension {truth.dimension:.6g}")
    return space, measure, truth


def standard_fixtures(quick: bool = False) -> List[Tuple[str, GeneratorSpec]]:
    """Named fixtures shared by the verification suite and the tests."""
    if quick:
        return [
            ("grid", GeneratorSpec.grid(65)),
            ("cantor", GeneratorSpec.cantor(depth=6)),
            ("glue", GeneratorSpec.glue([GeneratorSpec.cantor(depth=6), GeneratorSpec.grid(65)], gap=2.0)),
        ]
    return [
        ("grid", GeneratorSpec.grid(257)),
        ("cantor", GeneratorSpec.cantor(depth=8)),
        ("sierpinski", GeneratorSpec.sierpinski(depth=5)),
        ("glue", GeneratorSpec.glue([GeneratorSpec.cantor(depth=6), GeneratorSpec.grid(129)], gap=2.0)),
    ]
