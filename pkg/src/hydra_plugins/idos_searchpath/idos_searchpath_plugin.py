# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
import os
from pathlib import Path

from hydra.core.config_search_path import ConfigSearchPath
from hydra.plugins.search_path_plugin import SearchPathPlugin

LOGGER = logging.getLogger(__name__)

CONFIG_PATH_ENV = "ANEMOI_IDOS_CONFIG_PATH"


def candidate_dirs(base: Path) -> list[Path]:
    """Existing scenario directories under ``base``: itself, or its ``config`` subdirectory."""
    return [path for path in (base, base / "config") if path.is_dir() and not (path / "config").exists()]


class IdosSearchPathPlugin(SearchPathPlugin):
    """Prepend the user scenario directories to the hydra searchpath."""

    def manipulate_search_path(self, search_path: ConfigSearchPath) -> None:
        """Prepend the user directories, which take precedence over the packaged scenarios.

        In decreasing priority:
        - Current working directory
        - ``$ANEMOI_IDOS_CONFIG_PATH``
        - ``~/.config/anemoi/idos``

        Parameters
        ----------
        search_path : ConfigSearchPath
            Hydra ConfigSearchPath object.

        """
        sources = [("idos-home-searchpath-plugin", Path.home() / ".config" / "anemoi" / "idos")]
        env_path = os.getenv(CONFIG_PATH_ENV)
        if env_path is not None:
            sources.append(("idos-env-searchpath-plugin", Path(env_path)))
        sources.append(("idos-cwd-searchpath-plugin", Path.cwd()))

        # prepending in increasing priority leaves the highest one first
        for provider, base in sources:
            for path in candidate_dirs(base):
                search_path.prepend(provider=provider, path=str(path))
                LOGGER.debug("Prepending %s to the search path.", path)
        LOGGER.debug("Search path is now: %s", search_path)
