# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from pathlib import Path

import pandas as pd
from omegaconf import DictConfig
from omegaconf import OmegaConf

from anemoi.idos import __version__
from anemoi.idos.experiments.reporting import artifact_metadata
from anemoi.idos.experiments.reporting import read_csv
from anemoi.idos.experiments.reporting import write_csv
from anemoi.idos.experiments.reporting import write_effective_config


def test_csv_with_metadata(tmp_path: Path) -> None:
    table = pd.DataFrame({"label": ["physical/low", "cyber/high"], "risk": [1.0 / 3.0, -12.5]})
    metadata = artifact_metadata("abc123", 7, experiment="convergence", values=[0.5, 1.0], warm_start=False)
    path = write_csv(table, tmp_path / "out" / "convergence.csv", metadata)

    lines = path.read_text().splitlines()
    assert lines[0] == "# format: anemoi-idos-csv v1"
    assert f"# version: {__version__}" in lines
    assert "# values: [0.5, 1.0]" in lines
    assert "# warm_start: false" in lines

    written, read_metadata = read_csv(path)
    assert read_metadata["digest"] == "abc123"
    assert read_metadata["seed"] == "7"
    pd.testing.assert_frame_equal(written, table, check_exact=False, rtol=1e-9)


def test_effective_config(config: DictConfig, tmp_path: Path) -> None:
    path = write_effective_config(config, tmp_path)
    assert path.name == "effective-config.yaml"
    assert OmegaConf.load(path).sim.seed == 42
