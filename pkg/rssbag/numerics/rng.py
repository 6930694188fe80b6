"""Seeded, splittable pseudo-randomness.

`RngStream` wraps numpy's counter-based `Philox` bit generator. The key of a
stream is its `(seed, path)` pair where `path` is the tuple of stream ids
leading to it, so any task can derive an independent child stream without
coordinating with its siblings:

    root = RngStream(7)
    plan_stream = root.child(3)             # classifier 3
    batch_stream = plan_stream.child(0)     # first use inside that task

Streams are single-owner; hand a child to each thread instead of sharing.
"""
from __future__ import annotations

from typing import Final, Tuple

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .._algae.exceptions import ContractViolation
from .._algae.utils import isint, raiseif

MASK64: Final[int] = (1 << 64) - 1


class RngStream:

    def __init__(self, seed: int, stream_id: int = 0, parent: Tuple[int, ...] = ()):
        raiseif(
            not isint(seed) or not isint(stream_id),
            ContractViolation(f':[{seed!r}, {stream_id!r}]: Seed and stream id must be integers.')
        )

        self.__seed = int(seed) & MASK64
        self.__path = tuple(parent) + (int(stream_id) & MASK64,)
        self.__generator = Generator(Philox(SeedSequence(self.__seed, spawn_key=self.__path)))

    def __repr__(self):
        return f'{RngStream.__name__}[seed={self.__seed}, path={self.__path}]'

    @property
    def generator(self) -> Generator:
        """The underlying `numpy.random.Generator`."""
        return self.__generator

    @property
    def path(self) -> Tuple[int, ...]:
        return self.__path

    @property
    def seed(self) -> int:
        return self.__seed

    @property
    def stream_id(self) -> int:
        return self.__path[-1]

    def child(self, stream_id: int) -> RngStream:
        """A fresh stream keyed by this stream's path extended with `stream_id`.

        Deriving a child never advances this stream.
        """
        return RngStream(self.__seed, stream_id, self.__path)

    def choice(self, n: int, size, replace: bool = True, p=None) -> np.ndarray:
        return self.__generator.choice(n, size=size, replace=replace, p=p)

    def integers(self, low: int, high: int = None, size=None) -> np.ndarray:
        return self.__generator.integers(low, high, size=size)

    def normal(self, loc=0.0, scale=1.0, size=None) -> np.ndarray:
        return self.__generator.normal(loc, scale, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.__generator.permutation(n)

    def random(self, size=None) -> np.ndarray:
        return self.__generator.random(size)

    def uniform(self, low=0.0, high=1.0, size=None) -> np.ndarray:
        return self.__generator.uniform(low, high, size)
