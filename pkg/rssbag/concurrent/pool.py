"""A thread pool whose results never depend on how many threads it has.

Tasks are identified by their position; results come back in task order
and every task is expected to draw randomness only from a stream derived
from its own id.
"""
from __future__ import annotations

import concurrent.futures
import os
from typing import Callable, Iterable, List, TypeVar

from .._algae.exceptions import ContractViolation
from .._algae.utils import isint, raiseif

T = TypeVar('T')
R = TypeVar('R')


def default_workers() -> int:
    return max(min(os.cpu_count() or 1, 8), 1)


class TaskPool:

    def __init__(self, workers: int = 1):
        raiseif(
            not isint(workers) or workers < 1,
            ContractViolation(f':[{workers!r}]: Worker count must be a positive integer.')
        )

        self.__workers = int(workers)
        self.__exc = None

    def __enter__(self):
        if self.__workers > 1 and self.__exc is None:
            self.__exc = concurrent.futures.ThreadPoolExecutor(max_workers=self.__workers)

        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.shutdown()

    def __len__(self):
        return self.__workers

    @property
    def workers(self) -> int:
        return self.__workers

    def map(self, fn: Callable[[T], R], tasks: Iterable[T]) -> List[R]:
        """`[fn(task) for task in tasks]`, possibly computed concurrently.

        The first exception raised by any task propagates after all tasks settle.
        """
        tasks = list(tasks)

        if self.__exc is None or len(tasks) < 2:
            return [fn(task) for task in tasks]

        futures = [self.__exc.submit(fn, task) for task in tasks]
        concurrent.futures.wait(futures)

        return [future.result() for future in futures]

    def shutdown(self):
        if self.__exc is not None:
            self.__exc.shutdown()
            self.__exc = None
