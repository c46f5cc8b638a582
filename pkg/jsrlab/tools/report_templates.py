"""
Report templates: versioned Markdown summaries rendered from YAML files.

Each file holds a ``metadata`` block and a Jinja2 ``template``. A template id
``category.name.version`` resolves to ``<templates_dir>/<category>/<name>.yaml``.
"""

import logging
from pathlib import Path
from typing import Any, Optional

import yaml
from jinja2 import Environment, StrictUndefined
from pydantic import BaseModel, Field

from jsrlab.errors import ConfigError
from jsrlab.tools.settings import get_runtime_config

logger = logging.getLogger(__name__)

PACKAGED_TEMPLATES_DIR = Path(__file__).resolve().parent.parent / "templates"


class TemplateMetadata(BaseModel):
    """Metadata for a report template."""

    template_id: str = Field(..., description="Unique template identifier (e.g., 'report.summary.v1')")
    version: str = Field(..., description="Semantic version (e.g., '1.0.0')")
    description: str = Field(default="", description="Human-readable description")
    tags: list[str] = Field(default_factory=list, description="Categorization tags")


class ReportTemplate(BaseModel):
    """Template metadata plus its Jinja2 body."""

    metadata: TemplateMetadata
    template: str = Field(..., description="Jinja2 template content")


def _fmt(value: Any, digits: int = 6) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


class ReportTemplateManager:
    """
    Loads and renders report templates.

    Directory priority: explicit ``templates_dir`` argument, then the
    ``JSRLAB_TEMPLATES_DIR`` environment variable, then the templates shipped
    with the package.
    """

    def __init__(self, templates_dir: Optional[Path] = None):
        if templates_dir is None:
            override = get_runtime_config()["templates_dir"]
            templates_dir = Path(override) if override else PACKAGED_TEMPLATES_DIR
        self.templates_dir = Path(templates_dir)
        if not self.templates_dir.is_dir():
            raise ConfigError(
                f"Templates directory not found: {self.templates_dir}\n"
                f"Unset JSRLAB_TEMPLATES_DIR to use the packaged templates."
            )
        self.jinja_env = Environment(
            autoescape=False,
            trim_blocks=True,
            lstrip_blocks=True,
            undefined=StrictUndefined,
        )
        self.jinja_env.filters["fmt"] = _fmt
        self._cache: dict[str, ReportTemplate] = {}

    def _path_for(self, template_id: str) -> Path:
        parts = template_id.split(".")
        if len(parts) < 3:
            raise ConfigError(f"Invalid template_id '{template_id}'. Expected 'category.name.version'")
        return self.templates_dir / parts[0] / f"{'.'.join(parts[1:-1])}.yaml"

    def load_template(self, template_id: str, use_cache: bool = True) -> ReportTemplate:
        """
        Load a template by id.

        Raises:
            ConfigError: missing file, malformed YAML or id mismatch
        """
        if use_cache and template_id in self._cache:
            return self._cache[template_id]

        path = self._path_for(template_id)
        if not path.exists():
            raise ConfigError(f"Template file not found for '{template_id}': {path}")
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
        if not isinstance(data, dict) or "metadata" not in data or "template" not in data:
            raise ConfigError(f"Template {path} must contain 'metadata' and 'template' sections")

        loaded = ReportTemplate(metadata=TemplateMetadata(**data["metadata"]), template=data["template"])
        if loaded.metadata.template_id != template_id:
            raise ConfigError(
                f"Template ID mismatch: requested '{template_id}', "
                f"but {path} contains '{loaded.metadata.template_id}'"
            )
        self._cache[template_id] = loaded
        logger.debug(f"Loaded template {template_id} v{loaded.metadata.version} from {path}")
        return loaded

    def render(self, template_id: str, context: dict[str, Any], use_cache: bool = True) -> str:
        loaded = self.load_template(template_id, use_cache=use_cache)
        return self.jinja_env.from_string(loaded.template).render(**context).strip() + "\n"

    def list_templates(self) -> list[str]:
        ids = []
        for path in self.templates_dir.rglob("*.yaml"):
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = yaml.safe_load(f)
            except yaml.YAMLError:
                logger.warning(f"Skipping unreadable template file {path}")
                continue
            if isinstance(data, dict) and "metadata" in data:
                template_id = data["metadata"].get("template_id")
                if template_id:
                    ids.append(template_id)
        return sorted(ids)

    def clear_cache(self) -> None:
        self._cache.clear()


_default_manager: Optional[ReportTemplateManager] = None


def get_template_manager(templates_dir: Optional[Path] = None) -> ReportTemplateManager:
    """Shared manager; passing ``templates_dir`` replaces it."""
    global _default_manager
    if _default_manager is None or templates_dir is not None:
        _default_manager = ReportTemplateManager(templates_dir)
    return _default_manager


__all__ = [
    "TemplateMetadata",
    "ReportTemplate",
    "ReportTemplateManager",
    "get_template_manager",
]
