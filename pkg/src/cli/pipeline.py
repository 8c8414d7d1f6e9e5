"""Experiment pipelines behind the ``run``, ``check`` and ``tables`` commands.

Every run writes into its output directory and finishes with
``manifest.json``, which lists every other emitted file with its SHA-256.
"""

import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from src.cli.config import CheckName, ExperimentConfig, Mode, PerovskiteScenario, derive_seeds
from src.harmonics import default_grid, peak_vectors, sample_signal
from src.irreps import (
    GeometricTensor,
    GroupElement,
    random_group_element,
    wigner_3j,
    wigner_D,
)
from src.models import (
    CheckReportFile,
    CheckResult,
    Manifest,
    ManifestEntry,
    ResultsFile,
    RunStatus,
    StabilizerSummary,
)
from src.network import Model, load_checkpoint, save_checkpoint
from src.scenarios import (
    candidate_group,
    compare_tilt_pattern,
    make_perovskite_task,
    make_square_rect_task,
)
from src.symmetry import (
    StabilizerReport,
    check_combination,
    check_curie,
    check_equivariance,
    check_gradient_equivariance,
    cubic_group,
    diagnose_compatibility,
)
from src.training import (
    DivergenceError,
    Task,
    TrainingHistory,
    discover_order_parameters,
    magnitude_table,
    mse_loss,
    train,
    write_magnitudes,
)

logger = logging.getLogger(__name__)

EQUIVARIANCE_TOLERANCE = 1e-8
GRADIENT_TOLERANCE = 1e-8


def build_task(config: ExperimentConfig) -> Task:
    scenario = config.scenario
    if isinstance(scenario, PerovskiteScenario):
        return make_perovskite_task(
            scenario.tilt,
            constrained=scenario.constrained,
            slot_lmax=scenario.slot_lmax,
            lambda_sparsity=scenario.lambda_sparsity,
            lambda_degree=scenario.lambda_degree,
        )
    return make_square_rect_task(
        scenario.id,
        slot=scenario.slot,
        lambda_sparsity=scenario.lambda_sparsity,
        lambda_degree=scenario.lambda_degree,
    )


def build_model(config: ExperimentConfig, task: Task, seeds: dict[str, int]) -> Model:
    model = Model(task.input_signature, config.model)
    model.initialize(np.random.default_rng(seeds["weights"]))
    logger.info("Model with %d parameters for %s", model.n_parameters, task.name)
    return model


def _summary(report: StabilizerReport | None) -> StabilizerSummary | None:
    if report is None:
        return None
    return StabilizerSummary(
        group=report.group,
        group_size=report.group_size,
        tolerance=report.tolerance,
        indices=sorted(report.indices),
    )


def _write_json(path: Path, payload: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(payload + "\n")
    return path


def write_manifest(output_dir: Path, files: list[Path], status: RunStatus) -> Path:
    """Hash every emitted file into ``manifest.json``."""
    entries = []
    for path in sorted(files):
        content = path.read_bytes()
        entries.append(
            ManifestEntry(
                path=path.relative_to(output_dir).as_posix(),
                sha256=hashlib.sha256(content).hexdigest(),
                size=len(content),
            )
        )
    manifest = Manifest(status=status, files=entries)
    return _write_json(output_dir / "manifest.json", manifest.model_dump_json(indent=2))


def write_signals(output_dir: Path, outputs: list[GeometricTensor], grid_res: int) -> list[Path]:
    grid = default_grid(grid_res)
    paths = []
    for site, signal in enumerate(outputs):
        path = output_dir / "signals" / f"site_{site:02d}.csv"
        sample_signal(signal, grid).to_csv(path)
        paths.append(path)
    return paths


def write_divergence(
    config: ExperimentConfig, history: TrainingHistory, seeds: dict[str, int]
) -> Path:
    """Partial history of an aborted run, plus the manifest."""
    output_dir = Path(config.output_dir)
    payload = {"seeds": seeds, "history": history.model_dump()}
    path = _write_json(output_dir / "history.json", json.dumps(payload, indent=2))
    write_manifest(output_dir, [path], RunStatus.DIVERGED)
    return path


def run_experiment(config: ExperimentConfig) -> ResultsFile:
    """Train or discover, then write every result file.

    Raises:
        DivergenceError: After ``history.json`` has been written.
    """
    output_dir = Path(config.output_dir)
    seeds = derive_seeds(config.seed)
    task = build_task(config)
    model = build_model(config, task, seeds)
    group = candidate_group(task.structure)

    try:
        if config.mode is Mode.DISCOVER:
            result = discover_order_parameters(model, task, config.training, group=group)
            history, order_parameters = result.history, result.order_parameters
        else:
            _, history = train(model, task, config.training)
            result, order_parameters = None, task.initial_order_parameters()
    except DivergenceError as e:
        write_divergence(config, e.history, seeds)
        raise

    features = task.input_features(order_parameters)
    outputs = [
        GeometricTensor(signature=model.output_signature, coefficients=row)
        for row in model.forward(task.structure, features)
    ]
    grid = default_grid(config.grid_res)
    peaks = [
        [vector.tolist() for vector in peak_vectors(signal, grid, config.peak_threshold)]
        for signal in outputs
    ]
    compatibility = diagnose_compatibility(
        task.structure,
        task.input_features(),
        task.input_signature,
        task.targets,
        task.target_signature,
        group,
    )

    files = write_signals(output_dir, outputs, config.grid_res)
    magnitudes = result.magnitudes if result is not None else magnitude_table([], [])
    files.append(write_magnitudes(magnitudes, output_dir / "magnitudes.csv"))
    files.append(save_checkpoint(model, output_dir / "model.ckpt", seeds))

    discovered: dict = {}
    if result is not None:
        discovered = {
            "order_parameters": np.asarray(order_parameters).tolist(),
            "recovered": [t.coefficients.tolist() for t in result.recovered],
            "recovered_sites": result.recovered_sites,
            "stabilizer_before": _summary(result.stabilizer_before),
            "stabilizer_after": _summary(result.stabilizer_after),
            "snapshots": [s.model_dump() for s in result.snapshots],
        }
        if isinstance(config.scenario, PerovskiteScenario):
            match = compare_tilt_pattern(result.recovered, config.scenario.tilt, group)
            discovered["tilt_match"] = match.model_dump()

    results = ResultsFile(
        scenario=config.scenario.id,
        mode=config.mode.value,
        status=RunStatus.COMPLETE,
        seeds=seeds,
        final_mse=history.final_mse,
        history=history.model_dump(),
        peaks=peaks,
        lost_elements=compatibility.lost,
        **discovered,
    )
    files.append(_write_json(output_dir / "results.json", results.model_dump_json(indent=2)))
    write_manifest(output_dir, files, RunStatus.COMPLETE)
    logger.info("Wrote %d files to %s", len(files) + 1, output_dir)
    return results


def _check_elements(rng: np.random.Generator, count: int) -> list[GroupElement]:
    """Random elements with inversion, half of them composed pairs."""
    elements = []
    for i in range(count):
        g = random_group_element(rng, include_inversion=True)
        if i % 2:
            g = g.compose(random_group_element(rng, include_inversion=True))
        elements.append(g)
    return elements


def run_checks(config: ExperimentConfig) -> CheckReportFile:
    """Run the configured symmetry checks on a fresh or checkpointed model."""
    seeds = derive_seeds(config.seed)
    task = build_task(config)
    if config.checkpoint is not None:
        model, stored = load_checkpoint(config.checkpoint)
        seeds = {**seeds, **{f"checkpoint_{k}": v for k, v in stored.items()}}
    else:
        model = build_model(config, task, seeds)
    rotations = np.random.default_rng(seeds["rotations"])
    rng = np.random.default_rng(seeds["checks"])
    structure = task.structure
    group = candidate_group(structure)

    slot_values = rng.normal(size=task.order_parameter_shape)
    results: list[CheckResult] = []

    if CheckName.EQUIVARIANCE in config.checks:
        report = check_equivariance(
            model.forward,
            structure,
            task.input_features(slot_values),
            task.input_signature,
            model.output_signature,
            _check_elements(rotations, config.n_elements),
        )
        results.append(
            CheckResult(
                name=CheckName.EQUIVARIANCE.value,
                passed=report.max_error < EQUIVARIANCE_TOLERANCE,
                value=report.max_error,
                tolerance=EQUIVARIANCE_TOLERANCE,
                detail=f"{len(report.errors)} elements",
            )
        )

    if CheckName.CURIE in config.checks:
        report = check_curie(
            model.forward,
            structure,
            task.input_features(),
            task.input_signature,
            model.output_signature,
            group,
        )
        results.append(
            CheckResult(
                name=CheckName.CURIE.value,
                passed=report.holds,
                value=float(len(report.violations)),
                tolerance=0.0,
                detail=f"|Sym(in)|={report.input.size}, |Sym(out)|={report.output.size}",
            )
        )

    if CheckName.COMBINATION in config.checks:
        outputs = model.forward(structure, task.input_features())
        alpha, beta = rng.normal(size=2)
        holds = check_combination(
            task.targets[0],
            outputs[0],
            float(alpha),
            float(beta),
            model.output_signature,
            cubic_group(),
        )
        results.append(
            CheckResult(
                name=CheckName.COMBINATION.value,
                passed=holds,
                value=0.0 if holds else 1.0,
                tolerance=0.0,
                detail=f"alpha={alpha:.6g}, beta={beta:.6g}",
            )
        )

    if CheckName.GRADIENT in config.checks:
        prediction = model.forward(structure, task.input_features(slot_values))
        errors = [
            check_gradient_equivariance(
                mse_loss, prediction, task.targets, model.output_signature, g
            ).error
            for g in _check_elements(rotations, config.n_elements)
        ]
        worst = max(errors)
        results.append(
            CheckResult(
                name=CheckName.GRADIENT.value,
                passed=worst < GRADIENT_TOLERANCE,
                value=worst,
                tolerance=GRADIENT_TOLERANCE,
                detail=f"{len(errors)} elements",
            )
        )

    for result in results:
        level = logging.INFO if result.passed else logging.WARNING
        verdict = "ok" if result.passed else "FAILED"
        logger.log(level, "Check %s: %s (%.3e)", result.name, verdict, result.value)
    status = RunStatus.COMPLETE if all(r.passed for r in results) else RunStatus.CHECKS_FAILED
    report_file = CheckReportFile(
        scenario=config.scenario.id, seeds=seeds, status=status, checks=results
    )
    output_dir = Path(config.output_dir)
    path = _write_json(output_dir / "check_report.json", report_file.model_dump_json(indent=2))
    write_manifest(output_dir, [path], status)
    return report_file


def wigner_tables(
    degrees: tuple[int, int, int] | None = None,
    d_degree: int | None = None,
    rotation: tuple[float, float, float] = (0.0, 0.0, 0.0),
    inversion: bool = False,
) -> dict:
    """3j and/or D tables as nested lists.

    The D matrix is the natural-parity one: with ``inversion`` odd degrees flip sign.
    """
    tables: dict = {}
    if degrees is not None:
        tables["wigner_3j"] = {"degrees": list(degrees), "values": wigner_3j(*degrees).tolist()}
    if d_degree is not None:
        g = GroupElement(rotation=rotation, inversion=inversion)
        matrix = wigner_D(d_degree, g)
        if inversion and d_degree % 2:
            matrix = -matrix
        tables["wigner_D"] = {
            "degree": d_degree,
            "rotation": list(rotation),
            "inversion": inversion,
            "values": matrix.tolist(),
        }
    return tables


