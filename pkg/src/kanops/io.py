"""Bit-exact PGM image I/O and CSV table emission.

PGM (portable graymap) support covers both the ASCII ``P2`` and binary
``P5`` encodings: header comments are skipped, 8-bit and 16-bit
(big-endian) rasters are read, and parse failures report the byte offset
at which the stream became invalid.  Writing always emits 8-bit data
(``maxval 255``) with pixels encoded as ``round(p * 255)``.

Tables are written as RFC-style CSV with LF line endings, a header row,
floats printed to 6 significant digits, and ``inf`` / ``-inf`` / ``nan``
tokens for non-finite values.
"""

from __future__ import annotations

import csv
import math
import numbers
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError, PgmError
from .imaging import Image

__all__ = [
    "PgmHeader",
    "load_pgm",
    "save_pgm",
    "write_table",
    "sample_image_path",
]

_WHITESPACE = b" \t\r\n\x0b\x0c"


@dataclass(frozen=True)
class PgmHeader:
    """Parsed PGM header fields.

    Attributes
    ----------
    format : str
        ``"P2"`` (ASCII) or ``"P5"`` (binary).
    width, height : int
        Raster dimensions, positive.
    maxval : int
        Maximum sample value in ``[1, 65535]``; values above 255 imply
        two big-endian bytes per pixel in ``P5``.
    """

    format: str
    width: int
    height: int
    maxval: int


class _Scanner:
    """Whitespace/comment-aware tokenizer that tracks byte offsets."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_separators(self) -> None:
        data = self.data
        while self.pos < len(data):
            byte = data[self.pos : self.pos + 1]
            if byte in (b"#",):
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif byte in _WHITESPACE and byte:
                self.pos += 1
            else:
                return

    def token(self) -> tuple[bytes, int]:
        """Next whitespace-delimited token and its starting byte offset."""
        self.skip_separators()
        start = self.pos
        if start >= len(self.data):
            raise PgmError("unexpected end of file", start)
        while self.pos < len(self.data):
            byte = self.data[self.pos : self.pos + 1]
            if byte in _WHITESPACE or byte == b"#":
                break
            self.pos += 1
        return self.data[start : self.pos], start

    def int_token(self, what: str) -> tuple[int, int]:
        tok, start = self.token()
        if not tok.isdigit():
            raise PgmError(f"invalid {what} token {tok!r}", start)
        return int(tok), start


def _parse_header(scanner: _Scanner) -> PgmHeader:
    magic, offset = scanner.token()
    if magic not in (b"P2", b"P5"):
        raise PgmError(
            f"unsupported magic {magic!r}; expected P2 or P5", offset
        )
    width, w_off = scanner.int_token("width")
    height, h_off = scanner.int_token("height")
    maxval, m_off = scanner.int_token("maxval")
    if width < 1:
        raise PgmError(f"width must be positive, got {width}", w_off)
    if height < 1:
        raise PgmError(f"height must be positive, got {height}", h_off)
    if not 1 <= maxval <= 65535:
        raise PgmError(
            f"maxval must lie in [1, 65535], got {maxval}", m_off
        )
    return PgmHeader(magic.decode(), width, height, maxval)


def load_pgm(path) -> Image:
    """Read a ``P2`` or ``P5`` PGM file into a normalized image.

    Parameters
    ----------
    path : path-like
        File to read.

    Returns
    -------
    Image
        Pixels divided by ``maxval``, so values lie in ``[0, 1]``.

    Raises
    ------
    PgmError
        On malformed headers, out-of-range samples, or truncated rasters;
        the message names the byte offset of the problem.
    OSError
        If the file cannot be read.
    """
    data = Path(path).read_bytes()
    scanner = _Scanner(data)
    header = _parse_header(scanner)
    count = header.width * header.height
    if header.format == "P5":
        if scanner.pos >= len(data) or data[scanner.pos : scanner.pos + 1] not in _WHITESPACE:
            raise PgmError(
                "expected a single whitespace byte after maxval", scanner.pos
            )
        start = scanner.pos + 1
        itemsize = 2 if header.maxval > 255 else 1
        need = count * itemsize
        if len(data) - start < need:
            raise PgmError(
                f"truncated raster: expected {need} bytes, "
                f"found {len(data) - start}",
                len(data),
            )
        dtype = ">u2" if itemsize == 2 else np.uint8
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=start)
        samples = raw.astype(np.float64)
    else:
        samples = np.empty(count, dtype=np.float64)
        for i in range(count):
            value, offset = scanner.int_token("sample")
            if value > header.maxval:
                raise PgmError(
                    f"sample {value} exceeds maxval {header.maxval}", offset
                )
            samples[i] = value
    pixels = samples.reshape(header.height, header.width) / header.maxval
    return Image(pixels)


def save_pgm(img: Image, path, format: str = "P5") -> None:
    """Write an image as an 8-bit PGM file.

    Pixels are encoded as ``round(p * 255)`` clamped to ``[0, 255]``, so a
    load/save roundtrip moves each pixel by at most half a quantization
    step (``1/510``) and is exact for already-quantized data.

    Parameters
    ----------
    img : Image
        Unmasked image.
    path : path-like
        Destination file.
    format : str
        ``"P5"`` (binary, default) or ``"P2"`` (ASCII, lines kept within
        70 characters).

    Raises
    ------
    ArgumentError
        For a masked image or an unknown format.
    OSError
        If the destination cannot be written.
    """
    if format not in ("P2", "P5"):
        raise ArgumentError(
            f"format must be 'P2' or 'P5', got {format!r}"
        )
    if img.mask is not None:
        raise ArgumentError("save_pgm requires an unmasked image")
    quantized = np.round(np.clip(img.pixels, 0.0, 1.0) * 255.0).astype(
        np.uint8
    )
    header = f"{format}\n{img.width} {img.height}\n255\n".encode("ascii")
    if format == "P5":
        payload = header + quantized.tobytes()
    else:
        lines = []
        for row in quantized:
            tokens = [str(int(v)) for v in row]
            # Keep ASCII lines within the conventional 70-character limit.
            for i in range(0, len(tokens), 17):
                lines.append(" ".join(tokens[i : i + 17]))
        payload = header + ("\n".join(lines) + "\n").encode("ascii")
    Path(path).write_bytes(payload)


def _format_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, numbers.Real):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return f"{v:.6g}"
    raise ArgumentError(
        f"table cells must be numbers or strings, got {type(value).__name__}"
    )


def write_table(rows, path, fieldnames=None) -> None:
    """Write labeled numeric records as a CSV table.

    Parameters
    ----------
    rows : sequence of mapping
        Records with a consistent key schema; insertion order of the first
        record fixes the column order.
    path : path-like
        Destination file (LF line endings).
    fieldnames : sequence of str, optional
        Explicit column order; required when ``rows`` is empty (a
        header-only file is then written).

    Raises
    ------
    ArgumentError
        If the schema is inconsistent, or empty rows come without
        ``fieldnames``.
    OSError
        If the destination cannot be written.
    """
    rows = list(rows)
    if fieldnames is None:
        if not rows:
            raise ArgumentError(
                "fieldnames are required to write an empty table"
            )
        fieldnames = list(rows[0].keys())
    else:
        fieldnames = list(fieldnames)
    with open(path, "w", newline="", encoding="ascii") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            if list(row.keys()) != fieldnames:
                raise ArgumentError(
                    f"inconsistent record schema: expected {fieldnames}, "
                    f"got {list(row.keys())}"
                )
            writer.writerow([_format_value(row[name]) for name in fieldnames])


def sample_image_path() -> Path:
    """Path of the bundled 128x128 grayscale test image."""
    return Path(__file__).resolve().parent / "data" / "sample128.pgm"
