# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
import sys
import traceback
from concurrent.futures import Future
from concurrent.futures import ProcessPoolExecutor
from typing import Any
from typing import Callable
from typing import TypeVar

LOGGER = logging.getLogger(__name__)

T = TypeVar("T")


def _function_wrapper(fn: Callable[..., T], *args: Any, **kwargs: Any) -> T:
    """Wraps `fn` in order to preserve the traceback of any kind of error."""
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        raise sys.exc_info()[0](traceback.format_exc()) from exc


class ParallelExecutor(ProcessPoolExecutor):
    """Wraps parallel execution and provides accurate information about errors.

    Extends ProcessPoolExecutor to preserve the original traceback and line number
    of errors raised in the worker processes.
    """

    def submit(self, fn: Callable[..., T], /, *args: Any, **kwargs: Any) -> Future:
        """Submits the wrapped function instead of `fn`."""
        return super().submit(_function_wrapper, fn, *args, **kwargs)


def map_ordered(fn: Callable[..., T], tasks: list[tuple], num_workers: int = 1) -> list[T]:
    """Run ``fn(*task)`` for every task and return results in submission order.

    Parameters
    ----------
    fn : Callable
        Picklable, module-level function.
    tasks : list[tuple]
        Positional arguments of each call.
    num_workers : int, optional
        Number of worker processes, ``1`` runs everything in this process, by default 1

    Returns
    -------
    list
        One result per task, in the order the tasks were given.

    """
    if num_workers <= 1 or len(tasks) <= 1:
        return [fn(*task) for task in tasks]

    LOGGER.debug("Dispatching %d tasks to %d worker processes", len(tasks), num_workers)
    with ParallelExecutor(max_workers=num_workers) as executor:
        futures = [executor.submit(fn, *task) for task in tasks]
        return [future.result() for future in futures]
