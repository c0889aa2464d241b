"""Equirectangular image container and PNG/JPEG file IO."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import ImageDims


@dataclass(frozen=True)
class EquirectImage:
    """A 2:1 equirectangular RGB raster, 8 bits per channel.

    The pixel buffer is frozen on construction; treat instances as immutable
    values that can be shared freely across threads.
    """

    dims: ImageDims
    pixels: np.ndarray  # (height, width, 3) uint8, C-contiguous, read-only

    def __post_init__(self):
        px = self.pixels
        if px.dtype != np.uint8 or px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) uint8 pixels, got {px.dtype} {px.shape}")
        if px.shape[:2] != (self.dims.height, self.dims.width):
            raise ValueError(
                f"pixel buffer {px.shape[1]}x{px.shape[0]} does not match dims "
                f"{self.dims.width}x{self.dims.height}"
            )
        if not px.flags.c_contiguous:
            raise ValueError("pixel buffer must be C-contiguous")
        px.setflags(write=False)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "EquirectImage":
        """Copy an (h, w, 3) array into a new image; dims derived from shape."""
        arr = np.ascontiguousarray(arr, dtype=np.uint8).copy()
        h, w = arr.shape[:2]
        return cls(ImageDims(w, h), arr)

    @classmethod
    def solid(cls, dims: ImageDims, color: tuple[int, int, int]) -> "EquirectImage":
        arr = np.empty((dims.height, dims.width, 3), dtype=np.uint8)
        arr[:] = color
        return cls(dims, arr)


def load_image(path: str | Path) -> EquirectImage:
    """Load a PNG or JPEG panorama and validate the 2:1 invariant."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    h, w = arr.shape[:2]
    try:
        dims = ImageDims(w, h)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    return EquirectImage(dims, np.ascontiguousarray(arr))


def save_image(image: EquirectImage, path: str | Path) -> None:
    """Write the image to disk; format chosen by extension (PNG default)."""
    path = Path(path)
    pil = Image.fromarray(image.pixels, mode="RGB")
    suffix = path.suffix.lower()
    if suffix in (".jpg", ".jpeg"):
        pil.save(path, format="JPEG", quality=95)
    else:
        pil.save(path, format="PNG")
