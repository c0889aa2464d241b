"""Shared fixtures: test images and local restoration-service stubs."""

from __future__ import annotations

import base64
import io
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest
from PIL import Image

from panostep.geometry import ImageDims
from panostep.image import EquirectImage


def pytest_terminal_summary(terminalreporter):
    """Echo one line per acceptance criterion after the run."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")


def make_test_image(width: int = 256, seed: int = 0) -> EquirectImage:
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, (width // 2, width, 3), dtype=np.uint8)
    return EquirectImage(ImageDims(width, width // 2), arr)


@pytest.fixture
def small_image() -> EquirectImage:
    return make_test_image(256, seed=0)


def _decode_b64_png(data: str) -> Image.Image:
    return Image.open(io.BytesIO(base64.b64decode(data)))


def _encode_png_b64(im: Image.Image) -> str:
    buf = io.BytesIO()
    im.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class _StubHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):  # keep test output quiet
        pass

    def do_POST(self):
        server = self.server
        server.requests.append(self.path)
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        mode = server.mode

        if mode == "slow":
            time.sleep(server.delay)
            mode = "echo"
        if mode == "garbage":
            self.send_response(200)
            self.send_header("Content-Type", "text/plain")
            self.end_headers()
            self.wfile.write(b"definitely not json")
            return
        if mode == "http-500":
            self.send_response(500)
            self.end_headers()
            self.wfile.write(b"{}")
            return

        body = json.loads(raw)
        server.payloads.append(body)
        if mode == "echo":
            reply = {"image": body["image"]}
        elif mode == "wrong-dims":
            im = _decode_b64_png(body["image"])
            half = Image.new("RGB", (im.width // 2, im.height // 2))
            reply = {"image": _encode_png_b64(half)}
        elif mode == "seeded-noise":
            im = _decode_b64_png(body["image"])
            rng = np.random.default_rng(body.get("seed") or 0)
            arr = rng.integers(0, 256, (im.height, im.width, 3), dtype=np.uint8)
            reply = {"image": _encode_png_b64(Image.fromarray(arr, "RGB"))}
        elif mode == "missing-field":
            reply = {"status": "ok"}
        elif mode == "bad-base64":
            reply = {"image": "@@not base64@@"}
        else:
            raise AssertionError(f"unknown stub mode {mode}")
        payload = json.dumps(reply).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture
def stub_service():
    """Factory for a local restore-service stub; yields base URLs."""
    servers = []

    def start(mode: str, delay: float = 0.0) -> str:
        server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        server.mode = mode
        server.delay = delay
        server.requests = []
        server.payloads = []
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        servers.append((server, thread))
        return f"http://127.0.0.1:{server.server_address[1]}"

    start.servers = servers
    yield start
    for server, thread in servers:
        server.shutdown()
        server.server_close()
        thread.join(timeout=2)
