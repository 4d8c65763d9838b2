import logging
import os
import sys
from dataclasses import dataclass, replace

from dotenv import find_dotenv, load_dotenv
from tqdm import tqdm


DEFAULT_PRECISION_BITS = 256
DEFAULT_CHUNK_SIZE = 2 ** 16
DEFAULT_WORKERS = 1
OUTPUT_FORMATS = ('table', 'json', 'csv')
TOLERANCE_PROFILES = ('strict', 'relaxed')

ENV_PRECISION_BITS = 'SUDLERLAB_PRECISION_BITS'
ENV_WORKERS = 'SUDLERLAB_WORKERS'
ENV_CHUNK_SIZE = 'SUDLERLAB_CHUNK_SIZE'

# identity residual tolerances, keyed by the largest denominator they cover
STRICT_TOLERANCES = ((10 ** 5, 1e-9), (10 ** 8, 1e-6))
RELAXED_FACTOR = 1e3


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by every command.

    Args:
        precision_bits (int): working precision of extended-precision reals
        chunk_size (int): number of factors per evaluation chunk
        workers (int): number of worker processes for chunked evaluation
        output_format (str): one of 'table', 'json', 'csv'
        tolerance_profile (str): 'strict' or 'relaxed'
    """

    precision_bits: int = DEFAULT_PRECISION_BITS
    chunk_size: int = DEFAULT_CHUNK_SIZE
    workers: int = DEFAULT_WORKERS
    output_format: str = 'table'
    tolerance_profile: str = 'strict'

    def __post_init__(self):
        if self.precision_bits < 64:
            raise ValueError(
                "precision_bits must be >= 64, got %d" % self.precision_bits)
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(
                "unknown output format {!r}".format(self.output_format))
        if self.tolerance_profile not in TOLERANCE_PROFILES:
            raise ValueError(
                "unknown tolerance profile {!r}".format(
                    self.tolerance_profile))

    @classmethod
    def from_env(cls, **overrides):
        """Build a config from the environment (and a .env file if present).

        Keyword arguments that are not None win over the environment.
        """
        load_dotenv(find_dotenv(usecwd=True))
        values = {}
        for field, env in ((
                'precision_bits', ENV_PRECISION_BITS),
                ('workers', ENV_WORKERS),
                ('chunk_size', ENV_CHUNK_SIZE)):
            raw = os.environ.get(env)
            if raw:
                values[field] = int(raw)
                log.debug("%s=%s taken from the environment", env, raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_overrides(self, **overrides):
        return replace(
            self, **{k: v for k, v in overrides.items() if v is not None})

    def tolerance(self, b):
        """Residual tolerance for identities over denominators up to b."""
        for b_max, tol in STRICT_TOLERANCES:
            if b <= b_max:
                break
        if self.tolerance_profile == 'relaxed':
            tol *= RELAXED_FACTOR
        return tol


# None lets tqdm switch itself off when stderr is not a terminal
_PROGRESS = {'disable': None}


def set_progress(enabled):
    _PROGRESS['disable'] = None if enabled else True


def progress(iterable, **kwargs):
    """tqdm progress bar on stderr, muted by set_progress(False)."""
    return tqdm(iterable, disable=_PROGRESS['disable'], file=sys.stderr,
                leave=False, **kwargs)
