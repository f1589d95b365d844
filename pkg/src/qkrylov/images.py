"""Square color images as quaternion data, plus raw binary I/O.

Channel mapping: R, G, B ride on the i, j, k components; the w component is
zero for 3-channel (pure quaternion) images and carries transparency for
4-channel ones.  Pixel values are reals in [0, 255].  vec() stacks the
columns of each plane, matching the Kronecker blur operators.

Formats (no codecs, raw binary only):

* PPM (P6, maxval <= 255) and PGM (P5) with the usual whitespace/comment
  headers;
* QIMG4: ASCII header line ``QIMG4 n``, then 4 * n^2 little-endian float64
  values, planar in component order (w, R, G, B), each plane row-major.
"""

from __future__ import annotations

import importlib.resources
from pathlib import Path

import numpy as np

from .quat import QVector

__all__ = [
    "ColorImage",
    "read_ppm",
    "write_ppm",
    "read_pgm",
    "write_pgm",
    "read_qimg4",
    "write_qimg4",
    "bundled_image_path",
    "synthetic_image",
]


class ColorImage:
    """n x n image stored as an (n, n, 4) quaternion component array."""

    def __init__(self, comps: np.ndarray, channels: int):
        comps = np.asarray(comps, dtype=np.float64)
        if comps.ndim != 3 or comps.shape[2] != 4 or comps.shape[0] != comps.shape[1]:
            raise ValueError(f"expected square (n, n, 4) components, got {comps.shape}")
        if channels not in (3, 4):
            raise ValueError(f"channels must be 3 or 4, got {channels}")
        self.comps = comps
        self.channels = channels

    @classmethod
    def from_rgb(cls, rgb: np.ndarray) -> "ColorImage":
        rgb = np.asarray(rgb, dtype=np.float64)
        if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[0] != rgb.shape[1]:
            raise ValueError(f"expected square (n, n, 3) array, got {rgb.shape}")
        comps = np.zeros(rgb.shape[:2] + (4,))
        comps[..., 1:] = rgb
        return cls(comps, 3)

    @classmethod
    def from_gray(cls, gray: np.ndarray) -> "ColorImage":
        """Replicates a grayscale plane onto the R, G, B channels."""
        gray = np.asarray(gray, dtype=np.float64)
        if gray.ndim != 2 or gray.shape[0] != gray.shape[1]:
            raise ValueError(f"expected square 2-d array, got {gray.shape}")
        comps = np.zeros(gray.shape + (4,))
        for c in (1, 2, 3):
            comps[..., c] = gray
        return cls(comps, 3)

    @property
    def size(self) -> int:
        return self.comps.shape[0]

    def rgb(self) -> np.ndarray:
        return self.comps[..., 1:]

    def to_qvector(self) -> QVector:
        n = self.size
        data = np.empty((n * n, 4))
        for c in range(4):
            data[:, c] = self.comps[..., c].reshape(-1, order="F")
        return QVector(data)

    @classmethod
    def from_qvector(cls, v: QVector, channels: int = 3) -> "ColorImage":
        n = int(round(v.n ** 0.5))
        if n * n != v.n:
            raise ValueError(f"vector length {v.n} is not a perfect square")
        comps = np.empty((n, n, 4))
        for c in range(4):
            comps[..., c] = v.data[:, c].reshape((n, n), order="F")
        return cls(comps, channels)

    def clipped(self) -> "ColorImage":
        return ColorImage(np.clip(self.comps, 0.0, 255.0), self.channels)

    def __repr__(self):
        return f"ColorImage(n={self.size}, channels={self.channels})"


def _read_header_tokens(data: bytes, count: int):
    """Pull `count` whitespace-separated tokens, honoring # comments.
    Returns (tokens, offset of the byte right after the final separator)."""
    tokens = []
    i = 0
    while len(tokens) < count:
        if i >= len(data):
            raise ValueError("truncated header")
        ch = data[i:i + 1]
        if ch == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif ch.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace():
                j += 1
            tokens.append(data[i:j])
            i = j
    # exactly one whitespace byte separates the header from the raster
    return tokens, i + 1


def read_ppm(path) -> ColorImage:
    """Read a binary P6 PPM with maxval <= 255 into a 3-channel image."""
    data = Path(path).read_bytes()
    tokens, off = _read_header_tokens(data, 4)
    if tokens[0] != b"P6":
        raise ValueError(f"not a binary PPM (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval <= 0 or maxval > 255:
        raise ValueError(f"unsupported maxval {maxval}")
    if width != height:
        raise ValueError(f"only square images are supported, got {width}x{height}")
    raster = np.frombuffer(data, dtype=np.uint8, count=3 * width * height,
                           offset=off)
    if raster.size != 3 * width * height:
        raise ValueError("truncated pixel data")
    rgb = raster.reshape(height, width, 3).astype(np.float64) * (255.0 / maxval)
    return ColorImage.from_rgb(rgb)


def write_ppm(path, img: ColorImage):
    rgb = np.clip(np.rint(img.rgb()), 0, 255).astype(np.uint8)
    n = img.size
    with open(path, "wb") as fh:
        fh.write(f"P6\n{n} {n}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 PGM with maxval <= 255 into a 2-d float array."""
    data = Path(path).read_bytes()
    tokens, off = _read_header_tokens(data, 4)
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval <= 0 or maxval > 255:
        raise ValueError(f"unsupported maxval {maxval}")
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=off)
    if raster.size != width * height:
        raise ValueError("truncated pixel data")
    return raster.reshape(height, width).astype(np.float64) * (255.0 / maxval)


def write_pgm(path, gray: np.ndarray):
    gray = np.asarray(gray)
    arr = np.clip(np.rint(gray), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def read_qimg4(path) -> ColorImage:
    """Read the planar raw 4-channel format (see module docstring)."""
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    if nl < 0:
        raise ValueError("missing QIMG4 header line")
    header = data[:nl].split()
    if len(header) != 2 or header[0] != b"QIMG4":
        raise ValueError(f"bad QIMG4 header {data[:nl]!r}")
    n = int(header[1])
    vals = np.frombuffer(data, dtype="<f8", count=4 * n * n, offset=nl + 1)
    if vals.size != 4 * n * n:
        raise ValueError("truncated QIMG4 payload")
    comps = vals.reshape(4, n, n).transpose(1, 2, 0)
    return ColorImage(comps, 4)


def write_qimg4(path, img: ColorImage):
    n = img.size
    planes = img.comps.transpose(2, 0, 1).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(f"QIMG4 {n}\n".encode("ascii"))
        fh.write(planes.tobytes())


def synthetic_image(n: int = 32, kind: str = "rings", channels: int = 3) -> ColorImage:
    """Deterministic test images with structure at several scales."""
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    cx = cy = (n - 1) / 2.0
    rr = np.sqrt((ii - cx) ** 2 + (jj - cy) ** 2)
    if kind == "rings":
        r = 127.5 + 127.5 * np.cos(rr * 2.0 * np.pi / max(4, n // 4))
        g = 255.0 * jj / (n - 1)
        b = 127.5 + 127.5 * np.sin((ii + 2 * jj) * np.pi / max(4, n // 5))
    elif kind == "blocks":
        block = max(2, n // 8)
        r = 255.0 * (((ii // block) + (jj // block)) % 2)
        g = 255.0 * ((ii // block) % 3) / 2.0
        b = 255.0 * ((jj // block) % 4) / 3.0
    else:
        raise ValueError(f"unknown kind '{kind}'")
    img = np.stack([r, g, b], axis=-1)
    if channels == 3:
        return ColorImage.from_rgb(img)
    comps = np.zeros((n, n, 4))
    comps[..., 1:] = img
    comps[..., 0] = 255.0 * (0.3 + 0.7 * (rr / rr.max()))
    return ColorImage(comps, 4)


def bundled_image_path(name: str) -> Path:
    """Path of a test image shipped with the package (e.g. 'rings32.ppm')."""
    ref = importlib.resources.files("qkrylov").joinpath("data", name)
    with importlib.resources.as_file(ref) as p:
        if not p.exists():
            raise FileNotFoundError(f"no bundled image named '{name}'")
        return Path(p)
