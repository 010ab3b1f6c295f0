# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from pathlib import Path

import pytest
from hydra import initialize
from hydra._internal.config_search_path_impl import ConfigSearchPathImpl
from hydra.core.global_hydra import GlobalHydra
from hydra.core.plugins import Plugins
from hydra.plugins.search_path_plugin import SearchPathPlugin

from hydra_plugins.idos_searchpath.idos_searchpath_plugin import CONFIG_PATH_ENV
from hydra_plugins.idos_searchpath.idos_searchpath_plugin import IdosSearchPathPlugin
from hydra_plugins.idos_searchpath.idos_searchpath_plugin import candidate_dirs


def test_idos_searchpath_discovery() -> None:
    # Tests that this plugin can be discovered via the plugins subsystem when looking at all Plugins
    assert IdosSearchPathPlugin.__name__ in [x.__name__ for x in Plugins.instance().discover(SearchPathPlugin)]


def test_config_installed() -> None:
    with initialize(version_base=None):
        config_loader = GlobalHydra.instance().config_loader()
        assert "default" in config_loader.get_group_options("hydra/output")


def test_candidate_dirs(tmp_path: Path) -> None:
    assert candidate_dirs(tmp_path / "missing") == []
    assert candidate_dirs(tmp_path) == [tmp_path]
    (tmp_path / "config").mkdir()
    assert candidate_dirs(tmp_path) == [tmp_path / "config"]


def test_user_directories_come_first(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    home, env, cwd = (tmp_path / name for name in ("home", "env", "cwd"))
    (home / ".config" / "anemoi" / "idos").mkdir(parents=True)
    env.mkdir()
    (cwd / "config").mkdir(parents=True)
    monkeypatch.setattr(Path, "home", lambda: home)
    monkeypatch.setenv(CONFIG_PATH_ENV, str(env))
    monkeypatch.chdir(cwd)

    search_path = ConfigSearchPathImpl()
    search_path.append(provider="main", path="pkg://anemoi.idos.config")
    IdosSearchPathPlugin().manipulate_search_path(search_path)

    entries = search_path.get_path()
    assert [Path(e.path).resolve() for e in entries[:3]] == [
        (cwd / "config").resolve(),
        env.resolve(),
        (home / ".config" / "anemoi" / "idos").resolve(),
    ]
    assert [e.provider for e in entries[:3]] == [
        "idos-cwd-searchpath-plugin",
        "idos-env-searchpath-plugin",
        "idos-home-searchpath-plugin",
    ]
    assert entries[-1].path == "pkg://anemoi.idos.config"
