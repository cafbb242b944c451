"""Stage prompt templates: UTF-8 files with ``{{placeholder}}`` substitution.

Templates are the editable surface of the pipeline; recorded fixtures pin
their behavior. A directory override lets a run swap in its own set without
reinstalling the package.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from .errors import TemplateError

_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")


class TemplateSet:
    """Loads ``<stage>.txt`` templates, defaulting to the packaged set."""

    def __init__(self, directory: str | Path | None = None):
        self._dir = Path(directory) if directory else None

    def raw(self, name: str) -> str:
        if self._dir is not None:
            path = self._dir / f"{name}.txt"
            if not path.is_file():
                raise TemplateError(f"no template {name!r} under {self._dir}")
            return path.read_text(encoding="utf-8")
        ref = resources.files("instructforge").joinpath("prompts", f"{name}.txt")
        try:
            return ref.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise TemplateError(f"no packaged template named {name!r}") from None

    def render(self, name: str, **values) -> str:
        text = self.raw(name)

        def substitute(match: re.Match) -> str:
            key = match.group(1)
            if key not in values:
                raise TemplateError(f"template {name!r} has no value for {{{{{key}}}}}")
            return str(values[key])

        return _PLACEHOLDER.sub(substitute, text)
