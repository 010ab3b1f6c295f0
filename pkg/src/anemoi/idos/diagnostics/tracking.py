# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
import re
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from omegaconf import DictConfig
from omegaconf import OmegaConf

from anemoi.idos.utils.jsonify import map_config_to_primitives

LOGGER = logging.getLogger(__name__)


def _flatten_dict(params: Mapping[str, Any], prefix: str = "", delimiter: str = ".") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in params.items():
        name = f"{prefix}{delimiter}{key}" if prefix else str(key)
        if isinstance(value, Mapping):
            flat.update(_flatten_dict(value, name, delimiter))
        else:
            flat[name] = value
    return flat


def _clean_params(params: dict[str, Any]) -> dict[str, Any]:
    """Drop entries MLflow cannot store and sanitise key names."""
    return {re.sub(r"[^\w\-. /]", "_", k): v for k, v in params.items() if v is not None}


class MlflowTracker:
    """Thin wrapper around an MLflow run for experiment parameters, metrics and artifacts."""

    def __init__(self, experiment_name: str, tracking_uri: str | None, run_name: str | None = None) -> None:
        import mlflow

        self._mlflow = mlflow
        if tracking_uri:
            mlflow.set_tracking_uri(tracking_uri)
        mlflow.set_experiment(experiment_name)
        self.run = mlflow.start_run(run_name=run_name)
        LOGGER.info("MLflow run %s started in experiment '%s'", self.run.info.run_id, experiment_name)

    def log_hyperparams(self, config: DictConfig | Mapping[str, Any]) -> None:
        """Log the configuration flattened with '.' so it stays queryable."""
        from mlflow.entities import Param

        params = _clean_params(_flatten_dict(map_config_to_primitives(config)))
        # MLflow parameter values are limited in length
        params_list = [Param(key=k, value=str(v)[:250]) for k, v in params.items()]
        client = self._mlflow.tracking.MlflowClient()
        for idx in range(0, len(params_list), 100):
            client.log_batch(run_id=self.run.info.run_id, params=params_list[idx : idx + 100])

    def log_metrics(self, metrics: Mapping[str, float], step: int | None = None) -> None:
        self._mlflow.log_metrics({k: float(v) for k, v in metrics.items()}, step=step)

    def log_artifact(self, path: Path | str) -> None:
        self._mlflow.log_artifact(str(path))

    def finalize(self, status: str = "FINISHED") -> None:
        self._mlflow.end_run(status=status)
        LOGGER.info("MLflow run %s closed with status %s", self.run.info.run_id, status)


def get_tracker(config: DictConfig) -> MlflowTracker | None:
    """Start an MLflow run when ``diagnostics.log.mlflow.enabled`` is set."""
    mlflow_config = OmegaConf.select(config, "diagnostics.log.mlflow")
    if mlflow_config is None or not mlflow_config.enabled:
        LOGGER.debug("MLFlow logging is disabled.")
        return None

    tracking_uri = mlflow_config.get("tracking_uri")
    if mlflow_config.get("offline", True):
        tracking_uri = str(Path(config.hardware.paths.output) / "mlruns")
        Path(tracking_uri).mkdir(parents=True, exist_ok=True)
    tracker = MlflowTracker(
        experiment_name=mlflow_config.get("experiment_name", "anemoi-idos"),
        tracking_uri=tracking_uri,
        run_name=mlflow_config.get("run_name"),
    )
    tracker.log_hyperparams(config)
    return tracker
