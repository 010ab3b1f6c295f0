# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.
#

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from anemoi.utils.cli import Command
from anemoi.utils.cli import Failed
from anemoi.utils.cli import register_commands
from hydra import compose
from hydra import initialize_config_dir
from hydra import initialize_config_module
from hydra.errors import HydraException
from omegaconf import OmegaConf

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.errors import ConsistencyError
from anemoi.idos.errors import InsufficientDataError
from anemoi.idos.errors import UndefinedLabelError
from anemoi.idos.errors import ValidationFailure

if TYPE_CHECKING:
    import argparse

    from omegaconf import DictConfig

LOGGER = logging.getLogger(__name__)

__all__ = ["Command", "ScenarioCommand"]

EXIT_CONFIGURATION = 1
EXIT_VALIDATION = 2
EXIT_ANALYSIS = 3


class ScenarioCommand(Command):
    """Base of the commands that compose a scenario configuration.

    Unknown arguments are hydra overrides (``am.gamma=0.9``); the shared flags are
    translated into overrides too.
    """

    accept_unknown_args = True
    episodes_keys: tuple[str, ...] = ("am.evaluation_episodes",)
    default_config = "config"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        parser.add_argument("--config-name", "-c", default=cls.default_config, help="Primary config name")
        parser.add_argument("--config-dir", help="Directory holding the primary config, packaged configs otherwise")
        parser.add_argument("--seed", type=int, help="Base seed")
        parser.add_argument("--output", "-o", help="Output directory")
        parser.add_argument("--episodes", type=int, help="Number of episodes")
        parser.add_argument("--gamma", type=float, help="Discount factor")
        parser.add_argument("--epsilon", type=float, help="Exploration rate")
        parser.add_argument("--kc", type=float, help="Learning-rate constant")
        return parser

    def overrides(self, args: argparse.Namespace, unknown_args: list[str] | None) -> list[str]:
        """Hydra overrides from the flags, followed by the free-form ones."""
        flags = {
            "sim.seed": args.seed,
            "hardware.paths.output": args.output,
            "am.gamma": args.gamma,
            "am.epsilon": args.epsilon,
            "am.kc": args.kc,
        }
        for key in self.episodes_keys:
            flags[key] = args.episodes
        overrides = [f"{key}={value}" for key, value in flags.items() if value is not None]
        return overrides + list(unknown_args or [])

    def compose(self, args: argparse.Namespace, unknown_args: list[str] | None = None) -> DictConfig:
        overrides = self.overrides(args, unknown_args)
        LOGGER.info("Composing '%s' with overrides: %s", args.config_name, overrides)
        if args.config_dir:
            context = initialize_config_dir(config_dir=str(Path(args.config_dir).resolve()), version_base=None)
        else:
            context = initialize_config_module(config_module="anemoi.idos.config", version_base=None)
        with context:
            return compose(config_name=args.config_name, overrides=overrides)

    def run(self, args: argparse.Namespace, unknown_args: list[str] | None = None) -> None:
        try:
            config = self.compose(args, unknown_args)
            self.execute(config, args)
        except ValidationFailure as err:
            LOGGER.error("Validation failed: %s", err)
            for failure in err.failures:
                LOGGER.error("  %s", failure)
            sys.exit(EXIT_VALIDATION)
        except (ConfigurationError, HydraException) as err:
            LOGGER.error("Configuration error: %s", err)
            sys.exit(EXIT_CONFIGURATION)
        except (InsufficientDataError, UndefinedLabelError, ConsistencyError) as err:
            LOGGER.error("Analysis failed: %s: %s", type(err).__name__, err)
            sys.exit(EXIT_ANALYSIS)

    @staticmethod
    def output_dir(config: DictConfig) -> Path:
        path = Path(config.hardware.paths.output)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def num_workers(config: DictConfig) -> int:
        return int(OmegaConf.select(config, "hardware.num_workers", default=1))

    @staticmethod
    def progress(config: DictConfig) -> bool:
        return bool(OmegaConf.select(config, "diagnostics.enable_progress_bar", default=False))

    def execute(self, config: DictConfig, args: argparse.Namespace) -> None:
        raise NotImplementedError


COMMANDS = register_commands(
    Path(__file__).parent,
    __name__,
    lambda x: x.command(),
    Failed,
)
