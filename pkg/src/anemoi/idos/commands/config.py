# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import importlib.resources as pkg_resources
import logging
import shutil
from pathlib import Path
from typing import TYPE_CHECKING

from anemoi.idos.commands import Command

if TYPE_CHECKING:
    import argparse

LOGGER = logging.getLogger(__name__)

CONFIG_PACKAGE = "anemoi.idos.config"
USER_CONFIG_DIR = Path.home() / ".config" / "anemoi" / "idos"


def copy_configs(destination_dir: Path | str, overwrite: bool = False) -> list[Path]:
    """Copy the packaged scenario YAML files below ``destination_dir``, keeping the group layout."""
    destination_dir = Path(destination_dir)
    destination_dir.mkdir(parents=True, exist_ok=True)
    copied = []
    with pkg_resources.as_file(pkg_resources.files(CONFIG_PACKAGE)) as config_path:
        for item in sorted(Path(config_path).rglob("*.yaml")):
            file_path = destination_dir / item.relative_to(config_path)
            if file_path.exists() and not overwrite:
                LOGGER.info("File %s already exists, skipping", file_path)
                continue
            file_path.parent.mkdir(parents=True, exist_ok=True)
            shutil.copy2(item, file_path)
            copied.append(file_path)
    LOGGER.info("Copied %d config files to %s", len(copied), destination_dir)
    return copied


class ConfigGenerator(Command):
    """Copy the packaged scenario configs for editing."""

    @staticmethod
    def add_arguments(command_parser: argparse.ArgumentParser) -> None:
        subparsers = command_parser.add_subparsers(dest="subcommand", required=True)

        help_msg = "Copy the scenario configs to a directory."
        generate = subparsers.add_parser("generate", help=help_msg, description=help_msg)
        generate.add_argument("--output", "-o", default=Path.cwd(), help="Output directory")
        generate.add_argument("--overwrite", "-f", action="store_true")

        help_msg = f"Copy the scenario configs to {USER_CONFIG_DIR}, which is searched before the packaged ones."
        home = subparsers.add_parser("idos-home", help=help_msg, description=help_msg)
        home.add_argument("--overwrite", "-f", action="store_true")

    def run(self, args: argparse.Namespace) -> None:
        destination = args.output if args.subcommand == "generate" else USER_CONFIG_DIR
        copy_configs(destination, overwrite=args.overwrite)


command = ConfigGenerator
