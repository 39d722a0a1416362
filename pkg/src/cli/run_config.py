import os
import logging
from dataclasses import dataclass, field
from typing import List, Optional

from src.core.errors import ConfigurationError
from src.core.precision import validate_mode

logger = logging.getLogger(__name__)

ROUTES = ('norm', 'gram', 'mc', 'all')


def parse_n_list(text: str) -> List[int]:
    """
    Parse a level list: 'a..b' (inclusive range), 'a,b,c' or a single integer.

    Raises:
        ConfigurationError: malformed, empty or not strictly increasing
    """
    text = str(text).strip()
    try:
        if '..' in text:
            start, stop = text.split('..', 1)
            levels = list(range(int(start), int(stop) + 1))
        else:
            levels = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ConfigurationError(f"Malformed level list '{text}'", field='n')
    if not levels:
        raise ConfigurationError(f"Level list '{text}' is empty", field='n')
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ConfigurationError(f"Level list '{text}' is not strictly increasing", field='n')
    if levels[0] < 0:
        raise ConfigurationError("Levels must be nonnegative", field='n')
    return levels


@dataclass
class RunConfig:
    """One CLI invocation, validated"""
    command: str
    problem: Optional[str] = None
    n_list: List[int] = field(default_factory=lambda: [1])
    seeds: Optional[List[int]] = None
    out_dir: str = 'out'
    precision: Optional[str] = None
    levels_given: bool = False
    route: str = 'all'
    grid_size: Optional[int] = None
    count: Optional[int] = None
    eta: Optional[float] = None
    method: Optional[str] = None
    suite: str = 'core'
    dump_samples: bool = False
    threads: Optional[int] = None

    def __post_init__(self):
        if not self.n_list:
            raise ConfigurationError("Level list is empty", field='n')
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ConfigurationError("Level list must be strictly increasing", field='n')
        if self.route not in ROUTES:
            raise ConfigurationError(f"Unknown route '{self.route}'", field='route')
        if self.precision is not None:
            validate_mode(self.precision)

    @property
    def seed(self) -> int:
        return self.seeds[0] if self.seeds else 0

    def prepare_output(self) -> str:
        """Create the output directory and check that it is writable"""
        try:
            os.makedirs(self.out_dir, exist_ok=True)
        except OSError as e:
            raise ConfigurationError(f"Cannot create output directory: {e}", field='out')
        if not os.access(self.out_dir, os.W_OK):
            raise ConfigurationError(f"Output directory {self.out_dir} is not writable", field='out')
        return self.out_dir

    def output_path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    @classmethod
    def from_args(cls, args) -> 'RunConfig':
        seeds = None
        if getattr(args, 'seed', None) is not None:
            try:
                seeds = [int(s) for s in str(args.seed).split(',') if s.strip()]
            except ValueError:
                raise ConfigurationError(f"Malformed seed list '{args.seed}'", field='seed')
        levels_given = getattr(args, 'n', None) is not None
        return cls(
            command=args.command,
            problem=getattr(args, 'problem', None),
            n_list=parse_n_list(args.n) if levels_given else [1],
            seeds=seeds,
            out_dir=args.out,
            precision=getattr(args, 'precision', None),
            levels_given=levels_given,
            route=getattr(args, 'route', 'all') or 'all',
            grid_size=getattr(args, 'grid_size', None),
            count=getattr(args, 'count', None),
            eta=getattr(args, 'eta', None),
            method=getattr(args, 'method', None),
            suite=getattr(args, 'suite', 'core') or 'core',
            dump_samples=bool(getattr(args, 'dump_samples', False)),
            threads=getattr(args, 'threads', None),
        )
