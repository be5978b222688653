"""Grayscale images: file I/O and synthetic test images.

An image is a 2D ``float64`` numpy array of shape ``(height, width)`` in
row-major order, nominal range [0, 1].
"""

import re
from pathlib import Path

import numpy as np


class ImageError(Exception):
    """Base class for image I/O failures."""


class UnreadableImageError(ImageError):
    pass


class UnsupportedFormatError(ImageError):
    pass


class ImageFormatError(ImageError):
    """The file claims a supported format but its contents are malformed."""


class EmptyImageError(ImageError):
    pass


def as_image(data):
    """Validate and convert ``data`` to a finite 2D float64 array."""
    img = np.array(data, dtype=np.float64, copy=True)
    if img.ndim != 2:
        raise ValueError(f"expected a 2D grayscale image, got shape {img.shape}")
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise EmptyImageError("image has a zero dimension")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    return img


def quantize(img):
    """Clamp to [0, 1], scale by 255 and round half away from zero."""
    scaled = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header_tokens(buf, count):
    pos = 0
    tokens = []
    while len(tokens) < count:
        m = _TOKEN.match(buf, pos)
        if m is None:
            raise ImageFormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens, pos


def _parse_pgm(buf):
    magic = buf[:2]
    (_, w, h, maxval), pos = _header_tokens(buf, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise ImageFormatError(f"bad PGM header field: {exc}") from None
    if width <= 0 or height <= 0:
        raise EmptyImageError(f"PGM has zero dimension {width}x{height}")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"PGM maxval {maxval} out of range")
    if maxval > 255:
        raise UnsupportedFormatError("16-bit PGM is not supported")
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates header and raster
        raster = buf[pos + 1:pos + 1 + n]
        if len(raster) != n:
            raise ImageFormatError(f"P5 raster truncated: {len(raster)} of {n} bytes")
        values = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    else:
        fields = re.sub(rb"#[^\n]*", b"", buf[pos:]).split()
        if len(fields) < n:
            raise ImageFormatError(f"P2 raster truncated: {len(fields)} of {n} samples")
        try:
            values = np.array([int(v) for v in fields[:n]], dtype=np.float64)
        except ValueError:
            raise ImageFormatError("non-integer sample in P2 raster") from None
    if values.max(initial=0) > maxval:
        raise ImageFormatError("sample exceeds maxval")
    return values.reshape(height, width) / maxval


def read_image(path):
    """Read a PGM (P2/P5) or 8-bit grayscale PNG file into [0, 1]."""
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise UnreadableImageError(f"cannot read {path}: {exc}") from exc
    if buf[:2] in (b"P2", b"P5"):
        return _parse_pgm(buf)
    if buf[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    raise UnsupportedFormatError(f"{path}: not a P2/P5 PGM or PNG file")


def _read_png(path):
    from PIL import Image as PILImage

    try:
        with PILImage.open(path) as im:
            if im.mode not in ("L", "1", "P"):
                raise UnsupportedFormatError(f"{path}: PNG mode {im.mode} is not 8-bit grayscale")
            if im.mode == "P":
                im = im.convert("RGB")
                arr = np.asarray(im)
                if not (np.array_equal(arr[..., 0], arr[..., 1])
                        and np.array_equal(arr[..., 0], arr[..., 2])):
                    raise UnsupportedFormatError(f"{path}: color palette image")
                arr = arr[..., 0]
            else:
                arr = np.asarray(im.convert("L"))
    except ImageError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"{path}: malformed PNG ({exc})") from exc
    if arr.size == 0:
        raise EmptyImageError(f"{path}: empty image")
    return arr.astype(np.float64) / 255.0


def write_image(img, path, format="pgm-binary"):
    """Write an image as 8-bit PGM (``pgm-ascii``/``pgm-binary``) or ``png``."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("only 2D grayscale images can be written")
    q = quantize(img)
    h, w = q.shape
    path = Path(path)
    if format == "pgm-binary":
        payload = b"P5\n%d %d\n255\n" % (w, h) + q.tobytes()
    elif format == "pgm-ascii":
        rows = "\n".join(" ".join(str(v) for v in row) for row in q)
        payload = f"P2\n{w} {h}\n255\n{rows}\n".encode("ascii")
    elif format == "png":
        from PIL import Image as PILImage

        PILImage.fromarray(q, mode="L").save(path, format="PNG")
        return
    else:
        raise ValueError(f"unknown image format {format!r}")
    path.write_bytes(payload)


def format_from_suffix(path):
    return "png" if Path(path).suffix.lower() == ".png" else "pgm-binary"


def make_synthetic(kind, size, seed=0):
    """Deterministic piecewise test images.

    ``square-circle`` is piecewise constant: background 0.1, a rectangle at
    0.9, a disk at 0.6 and a one-pixel horizontal line at 1.0. ``ramp-disk``
    replaces the rectangle by a linear ramp along the columns. The seed
    jitters the object positions by a few pixels.
    """
    if size < 32:
        raise ValueError(f"synthetic images need size >= 32, got {size}")
    if kind not in ("square-circle", "ramp-disk"):
        raise ValueError(f"unknown synthetic image kind {kind!r}")
    rng = np.random.default_rng(seed)
    jitter = rng.integers(-(size // 64), size // 64 + 1, size=4)
    s = size
    img = np.full((s, s), 0.1)
    rr, cc = np.mgrid[0:s, 0:s]

    r0, c0 = s // 8 + jitter[0], s // 8 + jitter[1]
    r1, c1 = r0 + (5 * s) // 16, c0 + (5 * s) // 16
    if kind == "square-circle":
        img[r0:r1, c0:c1] = 0.9
    else:
        # ramp: 0.2 -> 0.8 over the region columns, first difference constant
        ramp = 0.2 + 0.6 * (np.arange(c1 - c0) / (c1 - c0 - 1))
        img[r0:r1, c0:c1] = ramp[None, :]

    cy, cx = (5 * s) // 8 + jitter[2], (5 * s) // 8 + jitter[3]
    radius = (3 * s) // 16
    img[(rr - cy) ** 2 + (cc - cx) ** 2 <= radius ** 2] = 0.6

    line_row = (7 * s) // 8 + 1
    img[line_row, s // 16: (15 * s) // 16] = 1.0
    return img
