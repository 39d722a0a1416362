import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

import numpy as np

from src.core.errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

INTERVAL_UNION = 'interval-union'
CIRCLE = 'circle'
DISK = 'disk'
POINT_CLOUD = 'point-cloud'
LINE = 'line'

DOMAIN_KINDS = (INTERVAL_UNION, CIRCLE, DISK, POINT_CLOUD, LINE)


@dataclass(frozen=True, eq=False)
class Domain:
    """
    Closed planar set carrying a problem.

    Intervals are kept sorted; circles and disks are centered at `center`.
    The unbounded `line` kind is only usable after restriction to an interval.
    """
    kind: str
    intervals: Tuple[Tuple[float, float], ...] = ()
    radius: float = 1.0
    center: complex = 0j
    points: Tuple[complex, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ConfigurationError(f"Unsupported domain kind '{self.kind}'", field='domain.kind')
        if self.kind == INTERVAL_UNION:
            if not self.intervals:
                raise ConfigurationError("Interval union needs at least one interval",
                                         field='domain.params.intervals')
            ordered = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
            for a, b in ordered:
                if not b > a:
                    raise ConfigurationError(f"Degenerate interval [{a}, {b}]",
                                             field='domain.params.intervals')
            for (_, b0), (a1, _) in zip(ordered, ordered[1:]):
                if a1 <= b0:
                    raise ConfigurationError("Intervals must be pairwise disjoint",
                                             field='domain.params.intervals')
            object.__setattr__(self, 'intervals', ordered)
        if self.kind in (CIRCLE, DISK) and not self.radius > 0:
            raise ConfigurationError(f"Radius must be positive, got {self.radius}",
                                     field='domain.params.radius')
        if self.kind == POINT_CLOUD:
            if len(self.points) == 0:
                raise ConfigurationError("Point cloud must be nonempty", field='domain.params.points')
            object.__setattr__(self, 'points', tuple(complex(p) for p in self.points))
        object.__setattr__(self, 'center', complex(self.center))

    # Constructors

    @classmethod
    def interval_union(cls, intervals: Iterable[Sequence[float]]) -> 'Domain':
        return cls(INTERVAL_UNION, intervals=tuple(tuple(iv) for iv in intervals))

    @classmethod
    def interval(cls, a: float, b: float) -> 'Domain':
        return cls.interval_union([(a, b)])

    @classmethod
    def circle(cls, radius: float = 1.0, center: complex = 0j) -> 'Domain':
        return cls(CIRCLE, radius=float(radius), center=center)

    @classmethod
    def disk(cls, radius: float = 1.0, center: complex = 0j) -> 'Domain':
        return cls(DISK, radius=float(radius), center=center)

    @classmethod
    def point_cloud(cls, points: Iterable[complex]) -> 'Domain':
        return cls(POINT_CLOUD, points=tuple(points))

    @classmethod
    def real_line(cls) -> 'Domain':
        return cls(LINE)

    # Properties

    @property
    def is_bounded(self) -> bool:
        return self.kind != LINE

    @property
    def is_one_dimensional(self) -> bool:
        return self.kind in (INTERVAL_UNION, CIRCLE)

    @property
    def is_real(self) -> bool:
        if self.kind in (INTERVAL_UNION, LINE):
            return True
        if self.kind == POINT_CLOUD:
            return all(p.imag == 0.0 for p in self.points)
        return False

    @property
    def bounding_box(self) -> Tuple[complex, complex]:
        """Lower-left and upper-right corners"""
        if self.kind == INTERVAL_UNION:
            return complex(self.intervals[0][0], 0.0), complex(self.intervals[-1][1], 0.0)
        if self.kind in (CIRCLE, DISK):
            r = self.radius
            return self.center - complex(r, r), self.center + complex(r, r)
        if self.kind == POINT_CLOUD:
            pts = np.asarray(self.points)
            return (complex(pts.real.min(), pts.imag.min()),
                    complex(pts.real.max(), pts.imag.max()))
        return complex(-np.inf, 0.0), complex(np.inf, 0.0)

    @property
    def length(self) -> float:
        """Linear measure of a one-dimensional domain"""
        if self.kind == INTERVAL_UNION:
            return float(sum(b - a for a, b in self.intervals))
        if self.kind == CIRCLE:
            return float(2.0 * np.pi * self.radius)
        raise DomainError(f"Length is undefined for domain kind '{self.kind}'")

    def contains(self, z, tol: float = 1e-12) -> np.ndarray:
        """Elementwise membership test with absolute tolerance tol"""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.kind == INTERVAL_UNION:
            on_axis = np.abs(z.imag) <= tol
            inside = np.zeros(z.shape, dtype=bool)
            for a, b in self.intervals:
                inside |= (z.real >= a - tol) & (z.real <= b + tol)
            return on_axis & inside
        if self.kind == LINE:
            return np.abs(z.imag) <= tol
        if self.kind == CIRCLE:
            return np.abs(np.abs(z - self.center) - self.radius) <= tol * max(1.0, self.radius)
        if self.kind == DISK:
            return np.abs(z - self.center) <= self.radius + tol * max(1.0, self.radius)
        pts = np.asarray(self.points)
        return np.min(np.abs(z[:, None] - pts[None, :]), axis=1) <= tol

    def interior_interval(self, x: float):
        """Interval strictly containing x, or None"""
        if self.kind != INTERVAL_UNION:
            return None
        for a, b in self.intervals:
            if a < x < b:
                return a, b
        return None

    def grid(self, count: int) -> np.ndarray:
        """
        Equispaced search grid.

        Intervals get count+1 points each (endpoints and, for even count,
        the midpoint included); circles get count points starting at angle 0;
        disks get concentric rings; point clouds return their points.
        """
        count = int(count)
        if count < 1:
            raise DomainError(f"Grid count must be positive, got {count}")
        if self.kind == INTERVAL_UNION:
            return np.concatenate([np.linspace(a, b, count + 1) for a, b in self.intervals]).astype(complex)
        if self.kind == CIRCLE:
            theta = 2.0 * np.pi * np.arange(count) / count
            return self.center + self.radius * np.exp(1j * theta)
        if self.kind == DISK:
            rings = max(1, int(np.sqrt(count)))
            pts = [np.array([self.center])]
            for k in range(1, rings + 1):
                r = self.radius * k / rings
                m = max(4, int(round(count * k / (rings * (rings + 1) / 2) / 2)))
                theta = 2.0 * np.pi * np.arange(m) / m
                pts.append(self.center + r * np.exp(1j * theta))
            return np.concatenate(pts)
        if self.kind == POINT_CLOUD:
            return np.asarray(self.points, dtype=complex)
        raise DomainError("The real line has no finite grid; restrict it to an interval first")

    def energy_cells(self, count: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Cell midpoints and widths for energy discretization.

        Interval cells are cosine-graded (refined towards endpoints) and
        distributed over components proportionally to length; circle cells
        are equal arcs.
        """
        count = int(count)
        if self.kind == INTERVAL_UNION:
            total = self.length
            nodes, widths = [], []
            remaining = count
            for idx, (a, b) in enumerate(self.intervals):
                if idx == len(self.intervals) - 1:
                    cells = remaining
                else:
                    cells = max(2, int(round(count * (b - a) / total)))
                    remaining -= cells
                k = np.arange(cells + 1)
                edges = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.pi * k / cells)
                edges[0], edges[-1] = a, b
                nodes.append(0.5 * (edges[1:] + edges[:-1]))
                widths.append(np.diff(edges))
            return np.concatenate(nodes).astype(complex), np.concatenate(widths)
        if self.kind == CIRCLE:
            theta = 2.0 * np.pi * (np.arange(count) + 0.5) / count
            nodes = self.center + self.radius * np.exp(1j * theta)
            widths = np.full(count, 2.0 * np.pi * self.radius / count)
            return nodes, widths
        raise DomainError(f"Energy cells need a one-dimensional domain, got '{self.kind}'")

    def to_dict(self) -> dict:
        params = {}
        if self.kind == INTERVAL_UNION:
            params['intervals'] = [list(iv) for iv in self.intervals]
        elif self.kind in (CIRCLE, DISK):
            params['radius'] = self.radius
            if self.center != 0:
                params['center'] = [self.center.real, self.center.imag]
        elif self.kind == POINT_CLOUD:
            params['points'] = [[p.real, p.imag] for p in self.points]
        return {'kind': self.kind, 'params': params}
