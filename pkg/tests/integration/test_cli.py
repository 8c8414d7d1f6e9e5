"""Integration tests for the command-line surface.

Runs real subcommands end to end on tiny configurations and inspects the
files they leave behind. Stand-ins only where a failure cannot be
provoked through a config: the broken coupling tensor of the negative
control and the error-mapping cases.
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import pytest_check as check

import src.cli.commands as commands
import src.network.geometry as geometry
from src.harmonics import HarmonicsError
from src.irreps import IrrepsError
from src.main import main
from src.models import CheckReportFile, Manifest, ResultsFile, RunStatus
from src.network import CheckpointError
from src.symmetry import SymmetryError

TINY_MODEL = {
    "output_lmax": 5,
    "hidden_lmax": 2,
    "hidden_mul": 2,
    "filter_lmax": 2,
    "n_layers": 2,
    "n_basis": 6,
    "radial_hidden": 8,
    "r_cut": 2.5,
}

TINY_TRAINING = {
    "steps": 4,
    "log_every": 2,
    "plateau_window": 2,
    "max_plateau_steps": 4,
    "model_steps_per_block": 2,
    "input_steps_per_block": 2,
    "max_blocks": 2,
    "target_loss": 0.0,
}


def write_config(directory: Path, **overrides: object) -> Path:
    """Write a square-to-rectangle experiment file with the given top-level overrides.

    Returns:
        Path of the JSON config.
    """
    config = {
        "schema_version": 1,
        "scenario": {"id": "square_to_rect", "slot": "restricted"},
        "model": TINY_MODEL,
        "training": TINY_TRAINING,
        "mode": "discover",
        "seed": 5,
        "output_dir": str(directory / "out"),
        "grid_res": 16,
        "n_elements": 4,
    }
    config.update(overrides)
    path = directory / "config.json"
    path.write_text(json.dumps(config))
    return path


@pytest.fixture
def config_path(tmp_path: Path) -> Path:
    return write_config(tmp_path)


class TestRun:
    """Tests for the run subcommand."""

    def test_discovery_writes_every_file(self, config_path: Path, tmp_path: Path) -> None:
        """Signals, magnitudes, checkpoint, results and a manifest hashing them."""
        out = tmp_path / "out"

        assert main(["run", "--config", str(config_path)]) == 0

        results = ResultsFile.model_validate_json((out / "results.json").read_text())
        manifest = Manifest.model_validate_json((out / "manifest.json").read_text())
        magnitudes = pd.read_csv(out / "magnitudes.csv")

        check.equal(results.status, RunStatus.COMPLETE)
        check.equal(len(results.recovered), 4)
        check.equal(len(results.lost_elements), 8)
        check.equal(len(results.stabilizer_before.indices), 16)
        check.equal(list(magnitudes.columns), ["site", "L", "parity", "m", "value"])
        check.equal(len(magnitudes), 4 * 16)
        signals = sorted(p.name for p in (out / "signals").iterdir())
        check.equal(signals, [f"site_0{i}.csv" for i in range(4)])
        check.is_true((out / "model.ckpt").exists())
        listed = {entry.path for entry in manifest.files}
        check.equal(
            listed,
            {"results.json", "magnitudes.csv", "model.ckpt"}
            | {f"signals/site_0{i}.csv" for i in range(4)},
        )

    def test_train_mode(self, tmp_path: Path) -> None:
        path = write_config(tmp_path, mode="train")

        assert main(["run", "--config", str(path)]) == 0

        results = json.loads((tmp_path / "out" / "results.json").read_text())
        check.equal(results["mode"], "train")
        check.equal(len(results["history"]["model_phase"]), 4)
        check.equal(len(pd.read_csv(tmp_path / "out" / "magnitudes.csv")), 0)

    def test_runs_are_reproducible(self, tmp_path: Path) -> None:
        """Same seed, same bytes."""
        first, second = tmp_path / "a", tmp_path / "b"
        first.mkdir()
        second.mkdir()
        for directory in (first, second):
            assert main(["run", "--config", str(write_config(directory))]) == 0

        check.equal(
            (first / "out" / "results.json").read_text(),
            (second / "out" / "results.json").read_text(),
        )
        check.equal(
            (first / "out" / "model.ckpt").read_bytes(),
            (second / "out" / "model.ckpt").read_bytes(),
        )

    def test_unknown_key_rejected(self, tmp_path: Path) -> None:
        """An unknown nested key exits 2 before any output is written."""
        path = write_config(tmp_path, training={**TINY_TRAINING, "momentum": 0.9})

        check.equal(main(["run", "--config", str(path)]), 2)
        check.is_false((tmp_path / "out").exists())

    def test_wrong_schema_version(self, tmp_path: Path) -> None:
        path = write_config(tmp_path, schema_version=2)

        assert main(["run", "--config", str(path)]) == 2

    def test_missing_config(self, tmp_path: Path) -> None:
        assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2

    def test_minimum_image_violation(self, tmp_path: Path) -> None:
        """The perovskite cell is 2 wide, so r_cut 2.5 cannot work."""
        path = write_config(tmp_path, scenario={"id": "perovskite"})

        assert main(["run", "--config", str(path)]) == 2

    def test_divergence(self, tmp_path: Path) -> None:
        path = write_config(
            tmp_path,
            mode="train",
            training={**TINY_TRAINING, "learning_rate": 10.0, "divergence_threshold": 1e-12},
        )

        assert main(["run", "--config", str(path)]) == 3

        out = tmp_path / "out"
        history = json.loads((out / "history.json").read_text())
        manifest = Manifest.model_validate_json((out / "manifest.json").read_text())
        check.is_in("history", history)
        check.equal(manifest.status, RunStatus.DIVERGED)
        check.is_false((out / "results.json").exists())

    @pytest.mark.parametrize(
        "error", [IrrepsError, HarmonicsError, SymmetryError, CheckpointError]
    )
    def test_domain_errors_exit_invalid(
        self,
        config_path: Path,
        monkeypatch: pytest.MonkeyPatch,
        capsys: pytest.CaptureFixture[str],
        error: type[Exception],
    ) -> None:
        """Any subpackage error during a run exits 2 with a message on stderr."""

        def failing(config: object) -> None:
            raise error("broken input")

        monkeypatch.setattr(commands, "run_experiment", failing)

        check.equal(main(["run", "--config", str(config_path)]), 2)
        check.is_in("broken input", capsys.readouterr().err)

    def test_output_override(self, config_path: Path, tmp_path: Path) -> None:
        target = tmp_path / "elsewhere"

        assert main(["run", "--config", str(config_path), "--out", str(target), "--seed", "9"]) == 0

        results = ResultsFile.model_validate_json((target / "results.json").read_text())
        check.is_false((tmp_path / "out").exists())
        check.equal(len(results.seeds), 3)


class TestCheck:
    """Tests for the check subcommand."""

    def test_fresh_model_passes(self, config_path: Path, tmp_path: Path) -> None:
        assert main(["check", "--config", str(config_path)]) == 0

        report = CheckReportFile.model_validate_json(
            (tmp_path / "out" / "check_report.json").read_text()
        )
        check.equal(report.status, RunStatus.COMPLETE)
        check.equal(
            [c.name for c in report.checks], ["equivariance", "curie", "combination", "gradient"]
        )

    def test_checkpoint_passes(self, config_path: Path, tmp_path: Path) -> None:
        assert main(["run", "--config", str(config_path)]) == 0
        path = write_config(
            tmp_path,
            checkpoint=str(tmp_path / "out" / "model.ckpt"),
            output_dir=str(tmp_path / "c"),
        )

        assert main(["check", "--config", str(path)]) == 0

    def test_unreadable_checkpoint(self, tmp_path: Path) -> None:
        path = write_config(tmp_path, checkpoint=str(tmp_path / "absent.ckpt"))

        assert main(["check", "--config", str(path)]) == 2

    def test_broken_coupling_fails(
        self, config_path: Path, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """A non-invariant coupling tensor breaks equivariance and the exit code says so."""
        rng = np.random.default_rng(0)

        def broken(l1: int, l2: int, l3: int) -> np.ndarray:
            return rng.normal(size=(2 * l1 + 1, 2 * l2 + 1, 2 * l3 + 1))

        monkeypatch.setattr(geometry, "wigner_3j", broken)

        assert main(["check", "--config", str(config_path)]) == 1

        report = CheckReportFile.model_validate_json(
            (tmp_path / "out" / "check_report.json").read_text()
        )
        failed = {c.name for c in report.checks if not c.passed}
        check.is_in("equivariance", failed)
        check.equal(report.status, RunStatus.CHECKS_FAILED)


class TestTables:
    """Tests for the tables subcommand."""

    def test_trivial_3j(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["tables", "--l", "0", "0", "0"]) == 0

        tables = json.loads(capsys.readouterr().out)
        assert tables["wigner_3j"]["values"] == [[[1.0]]]

    def test_matches_fixture(self, test_data_dir: Path, tmp_path: Path) -> None:
        out = tmp_path / "w112.json"

        assert main(["tables", "--l", "1", "1", "2", "--out", str(out)]) == 0

        dumped = json.loads(out.read_text())["wigner_3j"]
        fixture = json.loads((test_data_dir / "wigner_3j_112.json").read_text())["wigner_3j"]
        check.equal(dumped["degrees"], [1, 1, 2])
        check.is_true(np.allclose(dumped["values"], fixture["values"], atol=1e-12))

    def test_output_is_deterministic(self, capsys: pytest.CaptureFixture[str]) -> None:
        main(["tables", "--l", "2", "3", "4"])
        first = capsys.readouterr().out
        main(["tables", "--l", "2", "3", "4"])

        assert capsys.readouterr().out == first

    def test_inversion_flips_odd_degree(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["tables", "--d", "1", "--inversion"]) == 0

        values = json.loads(capsys.readouterr().out)["wigner_D"]["values"]
        assert np.allclose(values, -np.eye(3))

    def test_triangle_violation(self) -> None:
        assert main(["tables", "--l", "1", "1", "3"]) == 2

    def test_nothing_requested(self) -> None:
        assert main(["tables"]) == 2
