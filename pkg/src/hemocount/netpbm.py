"""Bit-exact binary netpbm I/O (PGM "P5" and PPM "P6").

The reader accepts the full netpbm header grammar: whitespace-separated
tokens with '#' comments, maxval up to 255, pixel payload starting right
after the single whitespace byte that terminates the maxval token. Parse
errors carry the byte offset at which the input stopped making sense.

PNG import/export is an optional convenience behind the same array types,
delegated to Pillow.
"""

from __future__ import annotations

import io

import numpy as np

from .validation import as_gray_image, as_rgb_image

_WHITESPACE = b" \t\n\r\x0b\x0c"


class NetpbmParseError(ValueError):
    """Malformed netpbm input; ``offset`` is the failing byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in b"\r\n":
                pos += 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise NetpbmParseError("unexpected end of header", pos)
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def _parse_header(data: bytes, magic: bytes) -> tuple[int, int, int, int]:
    token, pos = _next_token(data, 0)
    if token != magic:
        raise NetpbmParseError(f"expected magic {magic.decode()}, got {token[:8]!r}", 0)
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _next_token(data, pos)
        try:
            value = int(token)
        except ValueError:
            raise NetpbmParseError(f"non-numeric {name} token {token[:16]!r}", pos - len(token)) from None
        fields.append(value)
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise NetpbmParseError(f"invalid dimensions {width}x{height}", pos)
    if not 1 <= maxval <= 255:
        raise NetpbmParseError(f"unsupported maxval {maxval}", pos)
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise NetpbmParseError("missing whitespace after maxval", pos)
    return width, height, maxval, pos + 1


def load_pgm(data: bytes) -> np.ndarray:
    """Parse binary PGM bytes into a float64 gray image in [0, 1]."""
    width, height, maxval, pos = _parse_header(data, b"P5")
    expected = width * height
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise NetpbmParseError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}", pos + len(payload)
        )
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    if raw.max(initial=0) > maxval:
        offset = pos + int(np.argmax(raw.ravel() > maxval))
        raise NetpbmParseError(f"sample exceeds maxval {maxval}", offset)
    return raw.astype(np.float64) / float(maxval)


def save_pgm(img) -> bytes:
    """Serialize a gray image as binary PGM, quantized to 8 bits (maxval 255)."""
    arr = as_gray_image(img)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("save_pgm expects intensities in [0, 1]")
    raw = np.rint(arr * 255.0).astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    return header + raw.tobytes()


def load_ppm(data: bytes) -> np.ndarray:
    """Parse binary PPM bytes into an (H, W, 3) uint8 array."""
    width, height, maxval, pos = _parse_header(data, b"P6")
    expected = 3 * width * height
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise NetpbmParseError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}", pos + len(payload)
        )
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    if maxval != 255:
        raw = np.rint(raw.astype(np.float64) * (255.0 / maxval)).astype(np.uint8)
    return raw.copy()


def save_ppm(img) -> bytes:
    """Serialize an RGB image as binary PPM ("P6", maxval 255), channels R,G,B."""
    arr = as_rgb_image(img)
    header = f"P6\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    return header + arr.tobytes()


def load_image(path: str) -> np.ndarray:
    """Load a gray image from a .pgm or 8-bit grayscale .png file."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P5":
        return load_pgm(data)
    from PIL import Image

    with Image.open(io.BytesIO(data)) as im:
        gray = im.convert("L")
        return np.asarray(gray, dtype=np.float64) / 255.0


def save_image(path: str, img) -> None:
    """Save a gray (pgm/png) or RGB (ppm/png) image, chosen by extension."""
    lower = path.lower()
    arr = np.asarray(img)
    if lower.endswith(".pgm"):
        data = save_pgm(arr)
    elif lower.endswith(".ppm"):
        data = save_ppm(arr)
    elif lower.endswith(".png"):
        from PIL import Image

        if arr.ndim == 2:
            pil = Image.fromarray(np.rint(as_gray_image(arr) * 255.0).astype(np.uint8), mode="L")
        else:
            pil = Image.fromarray(as_rgb_image(arr), mode="RGB")
        buf = io.BytesIO()
        pil.save(buf, format="PNG")
        data = buf.getvalue()
    else:
        raise ValueError(f"unsupported image extension: {path}")
    with open(path, "wb") as fh:
        fh.write(data)
