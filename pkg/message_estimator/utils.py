# message-estimator - Median selection subset aggregation for distributed sparse regression.
# Copyright (C) 2026 The message-estimator developers

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.

# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

"""
Utility functions: method registry, optional modules, seeds and the worker pool.
"""
import importlib
import inspect
import logging
import os
import pkgutil
import sys
from importlib.util import find_spec
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple, Type, Union

import numpy as np
from joblib import Parallel, delayed, parallel_backend

from message_estimator.base import GenericMethod
from message_estimator.exceptions import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV = "MESSAGE_THREADS"  #: Environment variable with the default number of workers.


def list_methods(package: str = "message_estimator") -> Dict[str, List[str]]:
    """
    Return the classes inheriting from GenericMethod (except GenericMethod)
    found in the submodules of the package. The key corresponds to the
    module name and the list to the names of the method classes.

    Args:
        package (str, optional): name of the package to inspect. Defaults to "message_estimator".

    Returns:
        Dict[str, List[str]]: dict containing the method classes of each submodule.
    """
    res: Dict[str, List[str]] = {}
    for submodule, classes in _method_classes(package).items():
        res[submodule] = [cls.__name__ for cls in classes]
    return res


def _method_classes(package: str) -> Dict[str, List[Type[GenericMethod]]]:
    """
    Import every submodule of the package and collect its method classes.

    Args:
        package (str): name of the package to inspect.

    Returns:
        Dict[str, List[Type[GenericMethod]]]: method classes of each submodule.
    """
    res: Dict[str, List[Type[GenericMethod]]] = {}
    try:
        loaded_package = importlib.import_module(package)
    except ModuleNotFoundError:
        return res

    assert loaded_package.__file__ is not None

    submodules = [
        name
        for _, name, _ in pkgutil.iter_modules([str(Path(loaded_package.__file__).parent)])
    ]
    for submodule in submodules:
        importlib.import_module(f"{package}.{submodule}")
        res[submodule] = [
            obj
            for _, obj in inspect.getmembers(sys.modules[f"{package}.{submodule}"])
            if inspect.isclass(obj)
            and issubclass(obj, GenericMethod)
            and obj != GenericMethod
            and obj.name
            and obj.__module__ == f"{package}.{submodule}"
        ]
    return res


def list_methods_str(package: str = "message_estimator") -> str:
    """
    Return the method classes of the package as a str.

    Args:
        package (str, optional): name of the package to inspect. Defaults to "message_estimator".

    Returns:
        str: str containing the method classes of each submodule.
    """
    res = f"Methods of package {package}\n\n"
    for submodule, classes in _method_classes(package).items():
        if classes:
            res += submodule + "\n"
            res += "-" * len(submodule) + "\n"
            for cls in classes:
                res += f"* {cls.name} ({cls.__name__})\n"
            res += "\n"
    return res


def get_method(name: str, package: str = "message_estimator") -> GenericMethod:
    """
    Instantiate the method class registered under a name.

    Args:
        name (str): method name, as used in configurations.
        package (str, optional): package to look into. Defaults to "message_estimator".

    Raises:
        ConfigError: if no method has this name.

    Returns:
        GenericMethod: a new instance of the method.
    """
    for classes in _method_classes(package).values():
        for cls in classes:
            if cls.name == name:
                return cls()
    raise ConfigError(f"Unknown method {name}.")


# need_modules returns a replacement class when a module is missing, so that
# importing a module never fails because of an optional dependency. The
# replacement raises TypeError when instantiated. It only works with classes.


def need_modules(*modules: str) -> Callable:
    """
    Decorator generator.

    This will generate a decorator ensuring that the needed modules are
    loadable before instantiating the class.

    Args:
        modules (str): needed modules (``*args``)

    Here is a usage example :

    .. code-block:: python

        from message_estimator.utils import need_modules

        @need_modules("matplotlib")
        class Plotter:
            def __init__(self):
                print(matplotlib.__version__)
    """

    def decorator(initial_class: Type) -> Type:
        """
        The actual decorator.

        If all the modules are here the initial class is returned.
        Otherwise, it will return a class that will fail when trying
        to be initialized.
        """
        res = all(find_spec(module) is not None for module in modules)

        if not res:
            name = initial_class.__name__

            # pylint: disable=too-few-public-methods
            class ReplacementClass(initial_class):
                """
                This class raises an exception if it gets initialized.
                """

                def __init__(self, *_args, **_kwargs):
                    """
                    Raises:
                        TypeError: prevent using a class with a missing dependency.
                    """
                    raise TypeError(
                        f"You are trying to use the class {name} which requires the optional "
                        f"modules : {modules} and at least one is not installed."
                    )

            return ReplacementClass
        return initial_class

    return decorator


def derive_seed(seed: int, *keys: Union[int, str]) -> int:
    """
    Derive an independent 64-bit seed from a base seed and a list of keys.

    Args:
        seed (int): base seed.
        keys (Union[int, str]): keys (``*args``). Every key is tagged with its type and
            strings also carry their length, so distinct key lists never share a spawn key.

    Returns:
        int: the derived seed.
    """
    words: List[int] = []
    for key in keys:
        if isinstance(key, str):
            raw = key.encode("utf-8")
            words.extend((1, len(raw), *raw))
        else:
            words.extend((0, int(key)))
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(words))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def resolve_threads(threads: Union[int, None] = None) -> int:
    """
    Number of workers: the argument, else the environment variable, else 1.

    Args:
        threads (Union[int, None], optional): requested number, 0 for all cores. Defaults to None.

    Raises:
        ConfigError: if the value is negative or not an integer.

    Returns:
        int: number of workers (at least 1).
    """
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}.") from exc
    if threads < 0:
        raise ConfigError(f"Number of threads must be nonnegative, got {threads}.")
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def run_parallel(
    func: Callable[..., Any], tasks: Sequence[Tuple[Any, ...]], threads: int = 1
) -> List[Any]:
    """
    Run independent tasks on a worker pool and return their results in task order.

    Args:
        func (Callable[..., Any]): picklable function.
        tasks (Sequence[Tuple[Any, ...]]): positional arguments of each call.
        threads (int, optional): number of workers, 0 for all cores. Defaults to 1.

    Returns:
        List[Any]: results, in the order of the tasks.
    """
    n_jobs = min(resolve_threads(threads), max(len(tasks), 1))
    if n_jobs == 1:
        return [func(*args) for args in tasks]
    logger.debug("Running %d tasks on %d workers.", len(tasks), n_jobs)
    # Workers run single threaded BLAS.
    with parallel_backend("loky", inner_max_num_threads=1):
        return Parallel(n_jobs=n_jobs)(delayed(func)(*args) for args in tasks)
