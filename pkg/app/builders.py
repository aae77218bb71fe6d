"""Builders for the two-cavity, shared-mechanics and chain topologies.

Sideband assignment is fixed: cavity 1 of every port is blue-detuned
(two-mode squeezing with its mechanics), cavity 2 red-detuned (beamsplitter).
Mode order per port is (a1, b1, a2, b2).
"""
import logging
from typing import Callable, Dict, Tuple, Type

from pydantic import BaseModel

from app.exceptions import InvalidParameter
from app.liouvillian import add_cascade, direct_sum
from app.models.network import LiouvillianSpec, ModeKind, ModeRegistry, create, destroy
from app.models.params import ChainParams, Model1Params, Model2Params
from app.slh import SLHTriple, series_product, to_liouvillian

logger = logging.getLogger(__name__)

MODEL1_LABELS = ("a1", "b1", "a2", "b2")
MODEL2_LABELS = ("a1", "b", "a2")


def chain_labels(port: int) -> Tuple[str, str, str, str]:
    return f"a{port}_1", f"b{port}_1", f"a{port}_2", f"b{port}_2"


def _port_registry(labels: Tuple[str, str, str, str]) -> ModeRegistry:
    a1, b1, a2, b2 = labels
    return ModeRegistry.of(
        (a1, ModeKind.optical), (b1, ModeKind.mechanical), (a2, ModeKind.optical), (b2, ModeKind.mechanical)
    )


def _model1_spec(p: Model1Params, labels: Tuple[str, str, str, str]) -> LiouvillianSpec:
    a1, b1, a2, b2 = labels
    gamma_1, gamma_2 = p.mechanical_damping
    nbar_1, nbar_2 = p.mechanical_occupation

    spec = (
        LiouvillianSpec.empty(_port_registry(labels))
        .with_product(destroy(a1), destroy(b1), p.g1)
        .with_product(create(a2), destroy(b2), p.g2)
        .with_product(create(a2), destroy(a1), p.kappa)
        .with_decay(a1, p.Gamma1)
        .with_decay(b1, gamma_1, nbar_1)
        .with_decay(a2, p.Gamma2)
        .with_decay(b2, gamma_2, nbar_2)
    )
    if p.feedback:
        spec = add_cascade(spec, a1, a2, p.Gamma1, p.Gamma2)
    return spec


def build_model1(p: Model1Params) -> LiouvillianSpec:
    return _model1_spec(p, MODEL1_LABELS)


def build_model1_slh(p: Model1Params) -> LiouvillianSpec:
    """Model 1 assembled from SLH elements instead of an explicit cascade"""
    registry = _port_registry(MODEL1_LABELS)
    gamma_1, gamma_2 = p.mechanical_damping
    nbar_1, nbar_2 = p.mechanical_occupation
    base = LiouvillianSpec.empty(registry)

    h1 = base.with_product(destroy("a1"), destroy("b1"), p.g1).with_product(create("a2"), destroy("a1"), p.kappa)
    h2 = base.with_product(create("a2"), destroy("b2"), p.g2)
    om1 = SLHTriple.cavity(registry, "a1", p.Gamma1, h1.hamiltonian)
    om2 = SLHTriple.cavity(registry, "a2", p.Gamma2, h2.hamiltonian)
    baths = base.with_decay("b1", gamma_1, nbar_1).with_decay("b2", gamma_2, nbar_2).dissipators

    if p.feedback:
        return to_liouvillian(series_product(om2, om1), baths)
    return to_liouvillian(om1, baths) + to_liouvillian(om2)


def build_model2(p: Model2Params) -> LiouvillianSpec:
    a1, b, a2 = MODEL2_LABELS
    registry = ModeRegistry.of((a1, ModeKind.optical), (b, ModeKind.mechanical), (a2, ModeKind.optical))
    spec = (
        LiouvillianSpec.empty(registry)
        .with_product(destroy(a1), destroy(b), p.g1)
        .with_product(create(a2), destroy(b), p.g2)
        .with_decay(a1, p.Gamma1)
        .with_decay(b, p.gamma1, p.nbar)
        .with_decay(a2, p.Gamma2)
    )
    if p.feedback:
        spec = add_cascade(spec, a1, a2, p.Gamma1, p.Gamma2)
    return spec


def build_chain(p: ChainParams) -> LiouvillianSpec:
    spec = direct_sum(_model1_spec(p.port_params(i), chain_labels(i)) for i in range(1, p.n_ports + 1))
    for i in range(1, p.n_ports):
        spec = spec.with_product(create(chain_labels(i)[2]), destroy(chain_labels(i + 1)[0]), p.coupling(i))
    logger.debug(f"Built chain with {p.n_ports} ports ({spec.registry.size} modes)")
    return spec


def with_feedback(params: BaseModel, feedback: bool) -> BaseModel:
    """Copy of a parameter block with the feedback switch forced on or off"""
    if isinstance(params, ChainParams):
        update = {"port": params.port.model_copy(update={"feedback": feedback})}
        if params.ports is not None:
            update["ports"] = [port.model_copy(update={"feedback": feedback}) for port in params.ports]
        return params.model_copy(update=update)
    return params.model_copy(update={"feedback": feedback})


def feedback_of(params: BaseModel) -> bool:
    if isinstance(params, ChainParams):
        return params.port_params(1).feedback
    return params.feedback


MODEL_BUILDERS: Dict[str, Tuple[Type[BaseModel], Callable[[BaseModel], LiouvillianSpec]]] = {
    "model1": (Model1Params, build_model1),
    "model2": (Model2Params, build_model2),
    "chain": (ChainParams, build_chain),
}


def build(model: str, params: BaseModel) -> LiouvillianSpec:
    if model not in MODEL_BUILDERS:
        raise InvalidParameter(f"Unknown model '{model}'")
    params_type, builder = MODEL_BUILDERS[model]
    if not isinstance(params, params_type):
        raise InvalidParameter(f"{model} expects {params_type.__name__}, got {type(params).__name__}")
    return builder(params)


def mode_labels(model: str, params: BaseModel) -> Tuple[str, ...]:
    """Registry ordering of a model without building its generator"""
    if model == "model1":
        return MODEL1_LABELS
    if model == "model2":
        return MODEL2_LABELS
    if model == "chain":
        return tuple(label for i in range(1, params.n_ports + 1) for label in chain_labels(i))
    raise InvalidParameter(f"Unknown model '{model}'")
