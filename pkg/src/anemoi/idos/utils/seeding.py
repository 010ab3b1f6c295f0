# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.


from __future__ import annotations

import os

import numpy as np

from anemoi.idos.errors import ConfigurationError


def get_base_seed(seed: int | None = None, base_seed_env: str | None = None) -> int:
    """Gets the base seed from the configuration or the environment variables.

    Option to manually set a seed via export ANEMOI_BASE_SEED=xxx in job script

    Parameters
    ----------
    seed : int, optional
        Seed from the configuration, takes precedence when set, by default None
    base_seed_env : str, optional
        Environment variable to use for the base seed, by default None

    Returns
    -------
    int
        Base seed.

    Raises
    ------
    ConfigurationError
        If no seed is configured and none is found in the environment.

    """
    if seed is not None:
        return int(seed)

    env_var_list = ["ANEMOI_BASE_SEED"]
    if base_seed_env is not None:
        env_var_list = [base_seed_env, *env_var_list]

    for env_var in env_var_list:
        if env_var in os.environ:
            return int(os.environ[env_var])

    msg = f"Base seed not found in the configuration nor in environment variables {env_var_list}"
    raise ConfigurationError(msg, location="sim.seed")


def episode_seed(seed: int, *key: int) -> np.random.SeedSequence:
    """Seed sequence addressed by ``key``, e.g. ``(point, phase, episode)``."""
    return np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
