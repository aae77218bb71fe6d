"""Sweep engine: config parsing, grid planning and (parallel) evaluation.

Every grid point is evaluated independently; results are assembled in grid
order (first axis slowest, then feedback on before off, then observables in
config order) whatever the completion order of the workers.
"""
import asyncio
import copy
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, Union

from pydantic import BaseModel, ValidationError

from app import __version__
from app.adiabatic import b1b2_no_feedback, b1b2_with_feedback, model2_a2b_no_feedback, model2_a2b_with_feedback
from app.builders import MODEL_BUILDERS, build, mode_labels, with_feedback
from app.config import settings
from app.entanglement import log_negativity_between, mode_correlator
from app.exceptions import (
    ConfigError,
    InvalidParameter,
    NumericalFailure,
    OMNetError,
    SingularLimit,
    UnstableDynamics,
)
from app.liouvillian import mode_occupation, steady_state
from app.models.params import AdiabaticParams, Model1Params, Model2Params
from app.models.run import (
    Observable,
    ObservableKind,
    RunConfig,
    SweepMetadata,
    SweepResult,
    SweepRow,
)
from app.models.state import QUADRATURE_CONVENTION

logger = logging.getLogger(__name__)

CONVENTIONS = {
    "quadratures": QUADRATURE_CONVENTION,
    "vacuum_variance": "1/2",
    "log_negativity": "natural logarithm, max(0, -ln(2 nu_minus))",
    "rates": "units of the cavity linewidth Gamma",
    "frame": "rotating frame, blue sideband on cavity 1, red sideband on cavity 2",
}

ADIABATIC_MODES = {
    "model1": {"b1", "b2"},
    "model2": {"a2", "b"},
}


def _loc(loc: Tuple[Any, ...]) -> str:
    return ".".join(str(part) for part in loc)


def _first_error(e: ValidationError) -> Tuple[str, str]:
    err = e.errors()[0]
    return err["msg"], _loc(err["loc"])


def _params_type(config: RunConfig) -> Type[BaseModel]:
    return MODEL_BUILDERS[config.model.value][0]


def _validate_params(params_type: Type[BaseModel], data: Dict[str, Any], path: str) -> BaseModel:
    try:
        return params_type.model_validate(data)
    except ValidationError as e:
        msg, loc = _first_error(e)
        raise ConfigError(msg, f"{path}.{loc}" if loc else path) from e
    except InvalidParameter as e:
        raise ConfigError(e.detail, path) from e


def _set_path(data: Dict[str, Any], dotted: str, value: float) -> None:
    """Write a swept value; ``port.*`` also reaches every entry of an explicit ``ports`` list"""
    head, _, rest = dotted.partition(".")
    if not rest:
        data[head] = value
        return
    _set_path(data[head], rest, value)
    if head == "port" and data.get("ports") is not None:
        for entry in data["ports"]:
            _set_path(entry, rest, value)


def _check_sweepable(params: BaseModel, dotted: str, path: str) -> None:
    node: Any = params
    for part in dotted.split("."):
        if not isinstance(node, BaseModel) or part not in type(node).model_fields:
            raise ConfigError(f"unknown parameter '{dotted}'", path)
        node = getattr(node, part)
    if isinstance(node, (bool, BaseModel, list)):
        raise ConfigError(f"parameter '{dotted}' is not numeric", path)


def parse_config(data: Any) -> RunConfig:
    """Validate a raw JSON document into a RunConfig; errors carry the offending field path"""
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        msg, loc = _first_error(e)
        raise ConfigError(msg, loc) from e

    params = _validate_params(_params_type(config), config.parameters, "parameters")

    seen = set()
    for i, axis in enumerate(config.sweep):
        if axis.name in seen:
            raise ConfigError(f"parameter '{axis.name}' is swept twice", f"sweep.{i}.name")
        seen.add(axis.name)
        _check_sweepable(params, axis.name, f"sweep.{i}.name")

    labels = set(mode_labels(config.model.value, params))
    for i, obs in enumerate(config.observables):
        unknown = [m for m in obs.modes if m not in labels]
        if unknown:
            raise ConfigError(f"unknown mode(s) {', '.join(unknown)}", f"observables.{i}.modes")
        if obs.kind is ObservableKind.adiabatic_abs_correlator:
            allowed = ADIABATIC_MODES.get(config.model.value)
            if allowed is None or set(obs.modes) != allowed:
                raise ConfigError(
                    f"closed forms exist only for {{b1,b2}} of model1 and {{a2,b}} of model2",
                    f"observables.{i}",
                )
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno}: {e.msg}") from e
    return parse_config(data)


def plan_sweep(config: RunConfig) -> Tuple[List[Dict[str, float]], List[Dict[str, Any]]]:
    """Grid points (swept values in axis order) and one evaluation task per point and feedback variant"""
    params_type = _params_type(config)
    base = _validate_params(params_type, config.parameters, "parameters").model_dump()
    names = [axis.name for axis in config.sweep]
    observables = [obs.model_dump(mode="json") for obs in config.observables]

    points: List[Dict[str, float]] = []
    tasks: List[Dict[str, Any]] = []
    for values in itertools.product(*[axis.values for axis in config.sweep]):
        point = dict(zip(names, values))
        data = copy.deepcopy(base)
        for name, value in point.items():
            _set_path(data, name, value)
        params = _validate_params(params_type, data, f"sweep point {point}")
        points.append(point)
        for feedback in config.feedback.variants:
            tasks.append({
                "model": config.model.value,
                "params": with_feedback(params, feedback).model_dump(),
                "observables": observables,
            })
    return points, tasks


def _closed_form(model: str, params: BaseModel) -> complex:
    if model == "model1":
        p: Model1Params = params
        gamma_1, gamma_2 = p.mechanical_damping
        if p.Gamma1 != p.Gamma2 or gamma_1 != gamma_2 or any(p.mechanical_occupation):
            raise InvalidParameter("closed forms need equal linewidths and zero temperature")
        adiabatic = AdiabaticParams(g1=p.g1, g2=p.g2, kappa=p.kappa, Gamma=p.Gamma1, gamma=gamma_1)
        return b1b2_with_feedback(adiabatic) if p.feedback else b1b2_no_feedback(adiabatic)
    p2: Model2Params = params
    if not p2.feedback:
        return model2_a2b_no_feedback()
    if p2.Gamma1 != p2.Gamma2 or p2.nbar != 0:
        raise InvalidParameter("closed forms need equal linewidths and zero temperature")
    return model2_a2b_with_feedback(AdiabaticParams(g1=p2.g1, g2=p2.g2, Gamma=p2.Gamma1, gamma=p2.gamma1))


def _error_marker(e: OMNetError) -> str:
    if isinstance(e, UnstableDynamics):
        return "unstable"
    if isinstance(e, SingularLimit):
        return "singular"
    if isinstance(e, InvalidParameter):
        return "unsupported"
    return "numerical"


def evaluate_point(task: Dict[str, Any]) -> List[Tuple[Optional[float], str]]:
    """Evaluate every observable at one parameter point; runs inside worker processes"""
    model = task["model"]
    params = MODEL_BUILDERS[model][0].model_validate(task["params"])
    observables = [Observable.model_validate(o) for o in task["observables"]]

    state = None
    state_error = ""
    if any(o.kind is not ObservableKind.adiabatic_abs_correlator for o in observables):
        try:
            state = steady_state(build(model, params))
        except (UnstableDynamics, NumericalFailure, InvalidParameter) as e:
            state_error = _error_marker(e)
            logger.warning(f"{model} point {task['params']} skipped: {e.detail}")

    outcomes: List[Tuple[Optional[float], str]] = []
    for obs in observables:
        try:
            if obs.kind is ObservableKind.adiabatic_abs_correlator:
                outcomes.append((abs(_closed_form(model, params)), ""))
            elif state is None:
                outcomes.append((None, state_error))
            elif obs.kind is ObservableKind.log_negativity:
                outcomes.append((log_negativity_between(state, *obs.modes), ""))
            elif obs.kind is ObservableKind.abs_correlator:
                outcomes.append((abs(mode_correlator(state, *obs.modes)), ""))
            else:
                outcomes.append((mode_occupation(state, obs.modes[0]), ""))
        except OMNetError as e:
            outcomes.append((None, _error_marker(e)))
    return outcomes


async def run_async(config: RunConfig, workers: Optional[int] = None) -> SweepResult:
    points, tasks = plan_sweep(config)
    workers = settings.effective_workers if workers is None else max(1, workers)
    logger.info(f"Running '{config.name}': {len(points)} grid points, {len(tasks)} solves, {workers} worker(s)")

    if workers == 1 or len(tasks) == 1:
        outcomes = [evaluate_point(task) for task in tasks]
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            outcomes = await asyncio.gather(*[loop.run_in_executor(pool, evaluate_point, task) for task in tasks])

    variants = config.feedback.variants
    rows: List[SweepRow] = []
    for p_index, point in enumerate(points):
        for v_index, feedback in enumerate(variants):
            results = outcomes[p_index * len(variants) + v_index]
            for obs, (value, error) in zip(config.observables, results):
                rows.append(SweepRow(point=point, observable=obs.name, feedback=feedback, value=value, error=error))

    failures = sum(1 for row in rows if row.error)
    if failures:
        logger.warning(f"'{config.name}': {failures} of {len(rows)} rows carry an error marker")

    params = _validate_params(_params_type(config), config.parameters, "parameters")
    metadata = SweepMetadata(
        name=config.name,
        version=__version__,
        model=config.model,
        feedback=config.feedback,
        swept=[axis.name for axis in config.sweep],
        observables=[obs.name for obs in config.observables],
        mode_ordering=list(mode_labels(config.model.value, params)),
        conventions=CONVENTIONS,
        grid_size=len(points),
        generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    logger.info(f"Finished '{config.name}' with {len(rows)} rows")
    return SweepResult(rows=rows, metadata=metadata)


def run(config: RunConfig, workers: Optional[int] = None) -> SweepResult:
    return asyncio.run(run_async(config, workers))
