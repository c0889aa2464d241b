"""Pluggable restoration step: identity for deterministic builds, HTTP for real models.

The HTTP protocol is a lowest-common-denominator wrapper any diffusion server
can implement: POST <endpoint>/restore with JSON
``{"image": <base64 PNG>, "prompt": str, "strength": float, "seed": int|null}``
answered by JSON ``{"image": <base64 PNG>}``.
"""

from __future__ import annotations

import base64
import io
import json
import logging
import os
import threading
import time
from dataclasses import dataclass

import numpy as np
import requests
from PIL import Image

from .errors import (
    DimsMismatchError,
    MalformedResponseError,
    NetworkUnreachableError,
    RestoreTimeoutError,
)
from .geometry import ImageDims
from .image import EquirectImage

log = logging.getLogger(__name__)

ENDPOINT_ENV_VAR = "PANO_RESTORER_ENDPOINT"
DEFAULT_STRENGTH = 0.55
DEFAULT_TIMEOUT = 120.0
DEFAULT_RETRIES = 2
DEFAULT_MAX_IN_FLIGHT = 2
_BACKOFF_SECONDS = (1.0, 4.0)  # then 16.0, 64.0, ... for higher retry counts


@dataclass(frozen=True)
class RestoreRequest:
    image: EquirectImage
    prompt: str
    strength: float = DEFAULT_STRENGTH
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"strength must lie in [0, 1], got {self.strength!r}")


@dataclass(frozen=True)
class RestorerConfig:
    kind: str = "identity"  # "identity" | "http"
    endpoint: str | None = None
    timeout: float = DEFAULT_TIMEOUT
    retries: int = DEFAULT_RETRIES
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT

    def __post_init__(self):
        if self.kind not in ("identity", "http"):
            raise ValueError(f"unknown restorer kind {self.kind!r}")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


def resolve_endpoint(cfg: RestorerConfig) -> str:
    """Service URL for an http restorer; the environment variable wins."""
    endpoint = os.environ.get(ENDPOINT_ENV_VAR) or cfg.endpoint
    if not endpoint:
        raise ValueError(
            f"http restorer needs an endpoint (config or ${ENDPOINT_ENV_VAR})"
        )
    if not endpoint.startswith(("http://", "https://")):
        raise ValueError(f"endpoint must be an http(s) URL, got {endpoint!r}")
    return endpoint.rstrip("/")


def encode_png(image: EquirectImage) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image.pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


class IdentityRestorer:
    """Returns the request image unchanged; makes whole builds deterministic."""

    def restore(self, req: RestoreRequest) -> EquirectImage:
        return req.image


class HttpRestorer:
    """Client for the /restore protocol; shareable across threads.

    Transport failures (connection refused, timeout) are retried with
    exponential backoff; protocol failures are not, so retried calls always
    carry byte-identical payloads and a broken service fails fast.
    """

    def __init__(self, cfg: RestorerConfig):
        self._cfg = cfg
        self._url = resolve_endpoint(cfg) + "/restore"
        self._session = requests.Session()
        self._gate = threading.BoundedSemaphore(cfg.max_in_flight)

    def restore(self, req: RestoreRequest) -> EquirectImage:
        payload = {
            "image": base64.b64encode(encode_png(req.image)).decode("ascii"),
            "prompt": req.prompt,
            "strength": req.strength,
            "seed": req.seed,
        }
        log.debug(
            "POST %s payload=%s", self._url,
            {**payload, "image": f"<{len(payload['image'])} base64 bytes elided>"},
        )
        response = self._post_with_retries(payload)
        if not 200 <= response.status_code < 300:
            raise MalformedResponseError(
                f"restore service returned HTTP {response.status_code}"
            )
        return self._decode_response(response, req.image.dims)

    def _post_with_retries(self, payload: dict) -> requests.Response:
        last_error: Exception | None = None
        for attempt in range(self._cfg.retries + 1):
            if attempt:
                delay = _BACKOFF_SECONDS[0] * 4 ** (attempt - 1)
                log.debug("retry %d after %.0f s: %s", attempt, delay, last_error)
                time.sleep(delay)
            try:
                with self._gate:
                    return self._session.post(
                        self._url, json=payload, timeout=self._cfg.timeout
                    )
            except requests.Timeout as exc:
                last_error = RestoreTimeoutError(
                    f"restore request timed out after {self._cfg.timeout} s"
                )
                last_error.__cause__ = exc
            except requests.ConnectionError as exc:
                last_error = NetworkUnreachableError(
                    f"restore endpoint unreachable: {self._url}"
                )
                last_error.__cause__ = exc
        assert last_error is not None
        raise last_error

    @staticmethod
    def _decode_response(response: requests.Response, want: ImageDims) -> EquirectImage:
        try:
            body = response.json()
        except (json.JSONDecodeError, ValueError) as exc:
            raise MalformedResponseError("restore response is not JSON") from exc
        data = body.get("image") if isinstance(body, dict) else None
        if not isinstance(data, str):
            raise MalformedResponseError('restore response lacks an "image" field')
        try:
            raw = base64.b64decode(data, validate=True)
            with Image.open(io.BytesIO(raw)) as im:
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
        except Exception as exc:
            raise MalformedResponseError("restore response image is undecodable") from exc
        got_h, got_w = arr.shape[:2]
        if (got_w, got_h) != (want.width, want.height):
            raise DimsMismatchError(
                f"restored image is {got_w}x{got_h}, expected {want.width}x{want.height}"
            )
        return EquirectImage(want, np.ascontiguousarray(arr))


def make_restorer(cfg: RestorerConfig) -> IdentityRestorer | HttpRestorer:
    if cfg.kind == "identity":
        return IdentityRestorer()
    return HttpRestorer(cfg)


def restore(req: RestoreRequest, cfg: RestorerConfig) -> EquirectImage:
    """One-shot restore; long-lived callers should hold a restorer instead."""
    return make_restorer(cfg).restore(req)
