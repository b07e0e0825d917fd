"""Amplitude/phase image pairs and their file representation.

A complex color plane is stored as two ordinary images: an amplitude image
and a phase image where a pixel value ``v`` in [0, 1] stands for the phase
``2*pi*v``.  PNG (8 or 16 bit) and PFM (float32) are supported; PFM keeps
amplitudes lossless.  Files follow the naming convention
``<stem>.amp.{png,pfm}``, ``<stem>.phase.{png,pfm}`` and ``<stem>.w.pfm``.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass

import numpy as np
import png

from .errors import DimensionMismatch, ImageIOError

TWO_PI = 2.0 * math.pi
DISPLAY_MODES = ("clamp", "normalize", "magnitude")


@dataclass(frozen=True, eq=False)
class PhasedImage:
    """``amplitude * exp(i * phase)`` per pixel and channel.

    Planes are ``(height, width, channels)`` float64 arrays; phases are
    radians and need not be reduced.
    """

    amplitude: np.ndarray
    phase: np.ndarray | None = None

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=float)
        if amp.ndim == 2:
            amp = amp[:, :, None]
        if amp.ndim != 3:
            raise DimensionMismatch(f"expected an HxWxK amplitude plane, got shape {amp.shape}")
        if np.any(amp < 0) or np.any(np.isnan(amp)):
            raise ValueError("amplitudes must be nonnegative")
        if self.phase is None:
            phase = np.zeros_like(amp)
        else:
            phase = np.asarray(self.phase, dtype=float)
            if phase.ndim == 2:
                phase = phase[:, :, None]
            if phase.shape != amp.shape:
                raise DimensionMismatch(
                    f"phase plane {phase.shape} does not match amplitude plane {amp.shape}"
                )
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "phase", phase)

    @classmethod
    def from_complex(cls, values) -> "PhasedImage":
        values = np.asarray(values, dtype=complex)
        return cls(np.abs(values), np.angle(values))

    @property
    def height(self) -> int:
        return self.amplitude.shape[0]

    @property
    def width(self) -> int:
        return self.amplitude.shape[1]

    @property
    def channels(self) -> int:
        return self.amplitude.shape[2]

    @property
    def shape(self) -> tuple:
        return self.amplitude.shape

    def has_phase(self) -> bool:
        return bool(np.any(self.phase))

    def to_complex(self) -> np.ndarray:
        return self.amplitude * np.exp(1j * self.phase)


# -- PFM ---------------------------------------------------------------------


def read_pfm(path) -> np.ndarray:
    """Read a PFM file into a top-to-bottom ``(H, W, K)`` float32 array."""
    try:
        with open(path, "rb") as f:
            tag = f.readline().strip()
            if tag == b"PF":
                channels = 3
            elif tag == b"Pf":
                channels = 1
            else:
                raise ImageIOError(f"{path}: not a PFM file")
            dims = f.readline()
            while dims.startswith(b"#"):
                dims = f.readline()
            match = re.match(rb"^\s*(\d+)\s+(\d+)\s*$", dims)
            if not match:
                raise ImageIOError(f"{path}: malformed PFM header")
            width, height = int(match.group(1)), int(match.group(2))
            scale = float(f.readline().strip())
            dtype = "<f4" if scale < 0 else ">f4"
            data = np.fromfile(f, dtype=dtype, count=width * height * channels)
    except (OSError, ValueError) as exc:
        if isinstance(exc, ImageIOError):
            raise
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    if data.size != width * height * channels:
        raise ImageIOError(f"{path}: truncated PFM data")
    # PFM scanlines run bottom to top
    return np.flipud(data.reshape(height, width, channels)).astype(np.float32)


def write_pfm(path, array) -> None:
    """Write an ``(H, W)``, ``(H, W, 1)`` or ``(H, W, 3)`` array as little-endian PFM."""
    array = np.asarray(array, dtype=np.float32)
    if array.ndim == 2:
        array = array[:, :, None]
    height, width, channels = array.shape
    if channels not in (1, 3):
        raise ImageIOError(f"PFM stores 1 or 3 channels, got {channels}")
    header = f"{'PF' if channels == 3 else 'Pf'}\n{width} {height}\n-1.0\n".encode("ascii")
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(np.ascontiguousarray(np.flipud(array)).astype("<f4").tobytes())
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


# -- PNG ---------------------------------------------------------------------


def read_png(path) -> tuple[np.ndarray, int]:
    """Read a PNG into ``(H, W, K)`` integers and return them with the max level."""
    try:
        width, height, rows, info = png.Reader(filename=os.fspath(path)).asDirect()
        data = np.vstack([np.asarray(row, dtype=np.uint32) for row in rows])
    except (OSError, png.Error) as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    planes = info["planes"]
    data = data.reshape(height, width, planes)
    if info.get("alpha"):
        data = data[:, :, : planes - 1]
    return data, (1 << info["bitdepth"]) - 1


def write_png(path, array, bit_depth: int = 8) -> None:
    """Write integer ``(H, W, K)`` data (K = 1 or 3) as PNG."""
    array = np.asarray(array)
    if array.ndim == 2:
        array = array[:, :, None]
    height, width, channels = array.shape
    if channels not in (1, 3):
        raise ImageIOError(f"PNG planes must have 1 or 3 channels, got {channels}")
    if bit_depth not in (8, 16):
        raise ImageIOError(f"bit depth must be 8 or 16, got {bit_depth}")
    writer = png.Writer(width, height, greyscale=channels == 1, bitdepth=bit_depth)
    rows = array.reshape(height, width * channels).astype(np.uint16 if bit_depth == 16 else np.uint8)
    try:
        with open(path, "wb") as f:
            writer.write(f, rows.tolist())
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


# -- planes ------------------------------------------------------------------


def _is_pfm(path) -> bool:
    return os.fspath(path).lower().endswith(".pfm")


def read_unit_plane(path) -> np.ndarray:
    """Read a plane as floats: PNG levels scaled to [0, 1], PFM values as stored."""
    if _is_pfm(path):
        return read_pfm(path).astype(float)
    data, levels = read_png(path)
    return data.astype(float) / levels


def quantize(values, bit_depth: int = 8) -> np.ndarray:
    """Map [0, 1] floats to integer levels with round-half-to-even."""
    levels = (1 << bit_depth) - 1
    return np.rint(np.clip(values, 0.0, 1.0) * levels).astype(np.int64)


def wrap_phase(phase) -> np.ndarray:
    """Phase reduced to [0, 2*pi)."""
    wrapped = np.mod(phase, TWO_PI)
    # np.mod can return exactly 2*pi for tiny negative inputs
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def load_phased(amp_path, phase_path=None) -> PhasedImage:
    """Load an amplitude image and optional phase image (``v`` -> ``2*pi*v``)."""
    amplitude = read_unit_plane(amp_path)
    if phase_path is None:
        return PhasedImage(amplitude)
    turns = read_unit_plane(phase_path)
    if turns.shape != amplitude.shape:
        raise DimensionMismatch(
            f"phase image {phase_path} has shape {turns.shape}, "
            f"amplitude image {amp_path} has {amplitude.shape}"
        )
    return PhasedImage(amplitude, TWO_PI * turns)


def save_phased(img: PhasedImage, amp_path, phase_path=None, bit_depth: int = 8, mode: str = "clamp") -> None:
    """Write the amplitude (tone-mapped for PNG, raw for PFM) and the wrapped phase."""
    if _is_pfm(amp_path):
        write_pfm(amp_path, img.amplitude)
    else:
        write_png(amp_path, quantize(_tone_map(img.amplitude, mode), bit_depth), bit_depth)
    if phase_path is None:
        return
    turns = wrap_phase(img.phase) / TWO_PI
    if _is_pfm(phase_path):
        write_pfm(phase_path, turns)
    else:
        write_png(phase_path, quantize(turns, bit_depth), bit_depth)


def _tone_map(amplitude: np.ndarray, mode: str) -> np.ndarray:
    if mode in ("clamp", "magnitude"):
        return np.clip(amplitude, 0.0, 1.0)
    if mode == "normalize":
        peak = amplitude.max() if amplitude.size else 0.0
        if peak <= 0:
            return np.zeros_like(amplitude)
        return amplitude / peak
    raise ValueError(f"unknown display mode {mode!r}; expected one of {DISPLAY_MODES}")


def to_display(img: PhasedImage, mode: str = "clamp") -> np.ndarray:
    """8-bit ``(H, W, K)`` rendering of the amplitude plane."""
    return quantize(_tone_map(img.amplitude, mode), 8).astype(np.uint8)


def load_weight(path) -> np.ndarray:
    """Projective weight plane ``(H, W, K)`` from a PFM (or PNG scaled to [0, 1])."""
    return read_unit_plane(path)


def save_weight(path, weights) -> None:
    write_pfm(path, weights)


# -- stem naming -------------------------------------------------------------


def stem_path(stem, kind: str, ext: str) -> str:
    return f"{os.fspath(stem)}.{kind}.{ext}"


def find_plane(stem, kind: str):
    """Existing ``<stem>.<kind>.png`` or ``.pfm`` path, or None."""
    for ext in ("pfm", "png") if kind == "w" else ("png", "pfm"):
        path = stem_path(stem, kind, ext)
        if os.path.exists(path):
            return path
    return None


def load_stem(stem) -> tuple[PhasedImage, np.ndarray | None]:
    """Load ``<stem>.amp.*`` with its optional phase and weight planes."""
    amp = find_plane(stem, "amp")
    if amp is None:
        raise ImageIOError(f"no amplitude image {stem}.amp.png or {stem}.amp.pfm")
    img = load_phased(amp, find_plane(stem, "phase"))
    weight_path = find_plane(stem, "w")
    weights = load_weight(weight_path) if weight_path else None
    return img, weights


def save_stem(img: PhasedImage, stem, fmt: str = "png", bit_depth: int = 8, mode: str = "clamp",
              with_phase: bool | None = None) -> list[str]:
    """Write ``<stem>.amp.<fmt>`` (and the phase plane when present); returns the paths."""
    amp = stem_path(stem, "amp", fmt)
    if with_phase is None:
        with_phase = img.has_phase()
    phase = stem_path(stem, "phase", fmt) if with_phase else None
    save_phased(img, amp, phase, bit_depth=bit_depth, mode=mode)
    return [p for p in (amp, phase) if p]
