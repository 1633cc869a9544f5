"""Exception hierarchy shared across the engine."""


class TriagebotError(Exception):
    """Base class for all engine errors."""


class ConfigError(TriagebotError):
    """A config document failed to parse or validate."""


class FlowError(ConfigError):
    """A flow definition violates its invariants (dangling target, unknown handler, ...)."""


class DeadTransitionError(TriagebotError):
    """A handler returned a decision key with no transition bound to it."""

    def __init__(self, state: str, decision_key: str):
        self.state = state
        self.decision_key = decision_key
        super().__init__(f"state {state!r} has no transition for decision {decision_key!r}")


class HandlerError(TriagebotError):
    """A handler raised; dialog memory is left unchanged."""


class TemplateError(TriagebotError):
    """Unknown template or unresolved placeholder."""


class DataFormatError(TriagebotError):
    """A data file is malformed; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ModelFormatError(TriagebotError):
    """A model container failed to load."""


class ModelVersionError(ModelFormatError):
    """The model container was written by an incompatible format version."""


class CorruptModelError(ModelFormatError):
    """The model container is truncated or fails its checksum."""


class EmbeddingError(TriagebotError):
    """An embedding provider could not produce a vector."""


class MissingEmbeddingError(EmbeddingError):
    """A file-backed provider has no vector for the requested id."""


class RemoteEmbeddingError(EmbeddingError):
    """A remote provider timed out or answered with garbage."""
