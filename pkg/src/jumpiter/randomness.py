"""Keyed random streams and the handful of laws the models need.

Every stream is a Philox counter-based generator whose 128-bit key is a
BLAKE2b digest of ``(master_seed, replicate_id, role_tag)``.  Streams for
different keys never share state, so replicates can be generated in any
order, on any worker, and still reproduce bit for bit.

Normal variates always come from ``Generator.standard_normal`` (numpy's
ziggurat); that choice is fixed so seeded runs stay comparable.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

RandomStream = np.random.Generator

_KINDS = ("normal", "uniform01", "two_point", "shifted_chi1")


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    replicate_id: int
    role_tag: str

    def __post_init__(self):
        if self.replicate_id < 0:
            raise ConfigError("must be >= 0", field="replicate_id")
        if not self.role_tag:
            raise ConfigError("must be a non-empty string", field="role_tag")

    def digest(self) -> int:
        seed = int(self.master_seed) & 0xFFFFFFFFFFFFFFFF
        payload = f"{seed}:{int(self.replicate_id)}:{self.role_tag}".encode()
        return int.from_bytes(hashlib.blake2b(payload, digest_size=16).digest(), "little")


def derive_stream(key: StreamKey) -> RandomStream:
    """Return a fresh generator whose output depends only on ``key``."""
    return np.random.Generator(np.random.Philox(key=key.digest()))


def stream(master_seed: int, replicate_id: int, role_tag: str) -> RandomStream:
    return derive_stream(StreamKey(master_seed, replicate_id, role_tag))


@dataclass(frozen=True)
class DistSpec:
    """One-dimensional law.

    ``params`` by kind:

    * ``normal``: ``(mean, sd)`` with ``sd > 0``
    * ``uniform01``: ``()``
    * ``two_point``: ``(a, p, b)``; value ``a`` with probability ``p``, else ``b``
    * ``shifted_chi1``: ``()``; the law of ``N**2 - 1``
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        self.validate()

    def validate(self):
        arity = {"normal": 2, "uniform01": 0, "two_point": 3, "shifted_chi1": 0}
        if self.kind not in arity:
            raise ConfigError(f"unknown distribution kind {self.kind!r}; expected one of {_KINDS}")
        if len(self.params) != arity[self.kind]:
            raise ConfigError(f"{self.kind} takes {arity[self.kind]} parameters, got {len(self.params)}")
        if not all(math.isfinite(p) for p in self.params):
            raise ConfigError(f"{self.kind} parameters must be finite")
        if self.kind == "normal" and not self.params[1] > 0:
            raise ConfigError("normal sd must be > 0")
        if self.kind == "two_point" and not 0.0 <= self.params[1] <= 1.0:
            raise ConfigError("two_point probability must lie in [0, 1]")

    def mean(self) -> float:
        if self.kind == "normal":
            return self.params[0]
        if self.kind == "uniform01":
            return 0.5
        if self.kind == "two_point":
            a, p, b = self.params
            return p * a + (1 - p) * b
        return 0.0

    def second_moment(self) -> float:
        if self.kind == "normal":
            m, s = self.params
            return m * m + s * s
        if self.kind == "uniform01":
            return 1.0 / 3.0
        if self.kind == "two_point":
            a, p, b = self.params
            return p * a * a + (1 - p) * b * b
        return 2.0

    def __str__(self):
        return f"{self.kind}({','.join(repr(p) for p in self.params)})"


_SPEC_RE = re.compile(r"^\s*([a-z_0-9]+)\s*(?:\((.*)\))?\s*$")


def parse_dist(text: str) -> DistSpec:
    """Parse ``"normal(0, 0.5)"``, ``"two_point(-1, 0.5, 1)"``, ``"uniform01"``."""
    match = _SPEC_RE.match(text)
    if not match:
        raise ConfigError(f"cannot parse distribution {text!r}")
    kind, body = match.group(1), match.group(2)
    params = ()
    if body is not None and body.strip():
        try:
            params = tuple(float(p) for p in body.split(","))
        except ValueError as exc:
            raise ConfigError(f"cannot parse distribution parameters in {text!r}") from exc
    return DistSpec(kind, params)


def sample(dist: DistSpec, stream: RandomStream, count: int) -> np.ndarray:
    """Draw ``count`` iid values.

    Stream consumption: ``normal`` and ``shifted_chi1`` use ``count`` standard
    normals; ``uniform01`` and ``two_point`` use ``count`` doubles from
    ``Generator.random``.
    """
    if count < 0:
        raise ConfigError("count must be >= 0")
    dist.validate()
    if dist.kind == "normal":
        mean, sd = dist.params
        return mean + sd * stream.standard_normal(count)
    if dist.kind == "uniform01":
        return stream.random(count)
    if dist.kind == "two_point":
        a, p, b = dist.params
        return np.where(stream.random(count) < p, a, b)
    z = stream.standard_normal(count)
    return z * z - 1.0
