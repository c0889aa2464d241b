"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PanostepError(Exception):
    """Base class for all panostep errors."""


class InvalidDisplacementError(PanostepError, ValueError):
    """Observer displacement outside [0, 1) of the sphere radius."""


class DomainError(PanostepError, ValueError):
    """Closed-form angle input outside its mathematical domain."""


class RestorerError(PanostepError):
    """Base class for restoration-step failures."""

    def __init__(self, message: str, scene_id: str | None = None):
        super().__init__(message)
        self.scene_id = scene_id


class NetworkUnreachableError(RestorerError):
    """Restoration endpoint could not be reached after all retries."""


class RestoreTimeoutError(RestorerError):
    """Restoration request timed out after all retries."""


class MalformedResponseError(RestorerError):
    """Restoration service returned a non-2xx status or an undecodable body."""


class DimsMismatchError(RestorerError):
    """Restored image dimensions differ from the request image."""


class WorldConfigError(PanostepError, ValueError):
    """World build configuration rejected before any work started."""


class PartialBuildError(PanostepError):
    """World build aborted mid-chain; the completed prefix is on disk."""

    def __init__(self, message: str, scene_id: str, manifest_path, cause: Exception):
        super().__init__(message)
        self.scene_id = scene_id
        self.manifest_path = manifest_path
        self.cause = cause


class ExportError(PanostepError):
    """One or more files of a viewer bundle could not be written."""

    def __init__(self, failures: list[tuple[str, str]]):
        lines = "; ".join(f"{path}: {reason}" for path, reason in failures)
        super().__init__(f"export failed for {len(failures)} file(s): {lines}")
        self.failures = failures
