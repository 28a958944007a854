"""Exception types shared across crowdkit modules."""

from __future__ import annotations


class CrowdkitError(Exception):
    """Base class for all crowdkit errors."""


class GraphError(CrowdkitError):
    """Invalid graph construction or mutation."""


class EdgeListError(GraphError):
    """Malformed edge-list input. Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GexfError(CrowdkitError):
    """Malformed or unsupported GEXF document."""


class MetricError(CrowdkitError):
    """Centrality computation failed (unknown metric, divergence, bad k)."""


class ConfigError(CrowdkitError):
    """Invalid configuration document. Carries the document path to the bad node."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class HookError(CrowdkitError):
    """A lifecycle hook raised or returned an uncollectible value."""

    def __init__(self, message: str, hook: str = "", iteration: int | None = None):
        self.hook = hook
        self.iteration = iteration
        where = hook
        if iteration is not None:
            where = f"{hook} (iteration {iteration})" if hook else f"iteration {iteration}"
        if where:
            message = f"hook {where}: {message}"
        super().__init__(message)


class CollectError(CrowdkitError):
    """Data collection or merge failure."""
