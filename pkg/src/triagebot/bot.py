"""Assembles the receptionist bot: trained models bound as dialog handlers.

The two ML handlers (context gate, reason predictor) and the routing policy
handler are closures over their artifacts; the rest of the flow is generic.
Flow, templates and the department map ship as config files under assets/.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .context_gate import ContextModel, evaluate_context
from .dialog import (
    DialogEngine,
    FlowDefinition,
    HandlerRegistry,
    HandlerResult,
    TemplateStore,
    VariantSelector,
    load_flow,
)
from .dialog.handlers import field_capture, form_filler, greeter
from .reasons import ReasonModel, predict_reasons
from .routing import DepartmentMap, RoutingPolicy, RuleSet, department_scores, route


def asset_path(name: str) -> Path:
    return Path(str(resources.files("triagebot").joinpath("assets", name)))


def load_default_templates() -> TemplateStore:
    return TemplateStore.from_file(asset_path("templates_pt.yaml"))


def load_default_department_map() -> DepartmentMap:
    return DepartmentMap.from_file(asset_path("department_map.yaml"))


def make_context_gate_handler(model: ContextModel):
    def context_gate(memory, event, params) -> HandlerResult:
        text = event.payload.get("text", "")
        has_context, p = evaluate_context(model, text)
        return HandlerResult(
            decision_key="has_context" if has_context else "no_context",
            slot_writes={"description": text, "context_p": round(p, 9)},
        )

    return context_gate


def make_more_details_handler(model: ContextModel):
    def more_details(memory, event, params) -> HandlerResult:
        text = event.payload.get("text", "")
        merged = f"{memory.slots.get('description', '')} {text}".strip()
        has_context, p = evaluate_context(model, merged)
        attempts = int(memory.slots.get("context_attempts", 0)) + 1
        writes = {
            "description": merged,
            "context_p": round(p, 9),
            "context_attempts": attempts,
        }
        if has_context:
            decision = "has_context"
        elif attempts >= int(params.get("max_attempts", 2)):
            decision = "give_up"  # route with what we have instead of looping
        else:
            decision = "no_context"
        return HandlerResult(decision_key=decision, slot_writes=writes)

    return more_details


def make_reason_handler(model: ReasonModel):
    def reason_predictor(memory, event, params) -> HandlerResult:
        description = memory.slots.get("description", "")
        profile = memory.slots.get("profile") or {}
        prediction = predict_reasons(model, description, profile, k=3)
        return HandlerResult(
            decision_key="predicted",
            slot_writes={
                "prediction_top": [[code, round(p, 9)] for code, p in prediction.top],
                "prediction_full": {c: round(p, 12) for c, p in prediction.probabilities.items()},
            },
        )

    return reason_predictor


def make_router_handler(policy: RoutingPolicy, rules: RuleSet, dept_map: DepartmentMap):
    def router(memory, event, params) -> HandlerResult:
        probabilities = memory.slots.get("prediction_full") or {}
        scores = department_scores(probabilities, dept_map)
        top = [(code, p) for code, p in memory.slots.get("prediction_top", [])]
        decision = route(scores, policy, rules, slots=memory.slots, top_reasons=top)
        full_name = str(memory.slots.get("full_name") or "").strip()
        substitutions = {
            "department": dept_map.display(decision.department),
            "name": full_name.split()[0] if full_name else "cliente",
        }
        template = "handoff_auto" if decision.auto_routed else "handoff_human"
        return HandlerResult(
            decision_key="routed",
            slot_writes={"routing": decision.as_dict()},
            outbound=((template, substitutions),),
        )

    return router


def build_registry(
    context_model: ContextModel,
    reason_model: ReasonModel,
    policy: RoutingPolicy,
    rules: RuleSet,
    dept_map: DepartmentMap,
) -> HandlerRegistry:
    registry = HandlerRegistry()
    registry.register("greeter", greeter)
    registry.register("form_filler", form_filler)
    registry.register("field_capture", field_capture)
    registry.register("context_gate", make_context_gate_handler(context_model))
    registry.register("more_details", make_more_details_handler(context_model))
    registry.register("reason_predictor", make_reason_handler(reason_model))
    registry.register("router", make_router_handler(policy, rules, dept_map))
    return registry


def build_engine(
    context_model: ContextModel,
    reason_model: ReasonModel,
    policy: RoutingPolicy,
    rules: RuleSet | None = None,
    dept_map: DepartmentMap | None = None,
    flow: FlowDefinition | None = None,
    templates: TemplateStore | None = None,
    seed: int = 0,
) -> DialogEngine:
    dept_map = dept_map or load_default_department_map()
    rules = rules if rules is not None else RuleSet()
    registry = build_registry(context_model, reason_model, policy, rules, dept_map)
    if flow is None:
        flow = load_flow(asset_path("flow_receptionist.yaml"), registry.names())
    templates = templates or load_default_templates()
    return DialogEngine(
        flow=flow, registry=registry, templates=templates, selector=VariantSelector(seed)
    )
