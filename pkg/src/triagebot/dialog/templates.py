"""Template-based message generation with seeded variant selection."""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import yaml

from ..errors import ConfigError, TemplateError

_formatter = string.Formatter()


def _placeholders(variant: str) -> set[str]:
    return {name for _, name, _, _ in _formatter.parse(variant) if name}


@dataclass(frozen=True)
class Template:
    variants: tuple[str, ...]
    defaults: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.variants:
            raise ConfigError("template needs at least one variant")


@dataclass(frozen=True)
class VariantSelector:
    """Memoryless deterministic pick: same seed and template, same variant."""

    seed: int = 0

    def pick(self, template_id: str, n_variants: int) -> int:
        digest = hashlib.sha256(f"{self.seed}|{template_id}".encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") % n_variants


@dataclass(frozen=True)
class TemplateStore:
    templates: Mapping[str, Template]

    def __contains__(self, template_id: str) -> bool:
        return template_id in self.templates

    @classmethod
    def from_file(cls, path: str | Path) -> "TemplateStore":
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "TemplateStore":
        """Accepts {id: [variants]} or {id: {variants: [...], defaults: {...}}}."""
        if not isinstance(doc, dict) or "templates" not in doc:
            raise ConfigError("template document needs a top-level 'templates' map")
        templates: dict[str, Template] = {}
        for template_id, body in doc["templates"].items():
            if isinstance(body, list):
                templates[template_id] = Template(variants=tuple(str(v) for v in body))
            elif isinstance(body, dict):
                templates[template_id] = Template(
                    variants=tuple(str(v) for v in body.get("variants", ())),
                    defaults={k: str(v) for k, v in body.get("defaults", {}).items()},
                )
            else:
                raise ConfigError(f"template {template_id!r}: expected list or map")
        return cls(templates=templates)


def render_template(
    store: TemplateStore,
    template_id: str,
    substitutions: Mapping[str, str] | None = None,
    selector: VariantSelector = VariantSelector(),
) -> str:
    """Fill one template variant; every placeholder must resolve."""
    template = store.templates.get(template_id)
    if template is None:
        raise TemplateError(f"unknown template {template_id!r}")
    variant = template.variants[selector.pick(template_id, len(template.variants))]
    values = dict(template.defaults)
    if substitutions:
        values.update({k: str(v) for k, v in substitutions.items()})
    missing = _placeholders(variant) - values.keys()
    if missing:
        raise TemplateError(
            f"template {template_id!r}: unresolved placeholders {sorted(missing)}")
    return variant.format(**values)
