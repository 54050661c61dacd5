"""Image files, seeded noise and run configuration.

File formats
------------
PGM
    Binary ``P5`` and ASCII ``P2``, maxval <= 255. Writing clamps to [0, 255]
    and rounds half away from zero; the round trip is exact on clamp-rounded
    images.
float sidecar (``.f64``)
    Two little-endian uint32 (height, width) followed by height*width
    little-endian float64 values in row-major order. Lossless.
config
    One ``key = value`` per line, ``#`` starts a comment. See
    :data:`CONFIG_KEYS` for the accepted keys (version 1).

Noise
-----
:func:`add_gaussian_noise` draws raw 64-bit words from numpy's PCG64 bit
generator seeded with the given seed, maps each word ``w`` to a uniform
``(w >> 11) * 2**-53`` in [0, 1), and turns consecutive pairs ``(a, b)`` into
two normals with Box-Muller::

    r = sqrt(-2 ln(1 - a)),   z0 = r cos(2 pi b),   z1 = r sin(2 pi b)

filling the image in row-major order. Nothing else touches the stream, so the
output depends only on (image, sigma, seed).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .core import GridSpec, ScalarImage, SolverConfig, as_array, grid_values
from .errors import FormatError, ParameterError, ParseError, PGVError, UnknownKeyError

CONFIG_VERSION = 1


# ---------------------------------------------------------------------------
# PGM


def _pgm_tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def parse_pgm(data: bytes) -> ScalarImage:
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise FormatError(f"unsupported magic {magic!r}; expected P5 or P2")
    tokens, pos = _pgm_tokens(data, 3, 2)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError("non-integer PGM header field") from None
    if not (0 < maxval <= 255):
        raise FormatError(f"maxval {maxval} unsupported (8-bit only)")
    if width < 1 or height < 1:
        raise FormatError("PGM dimensions must be positive")
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        pos += 1
        raster = data[pos:pos + width * height]
        if len(raster) != width * height:
            raise FormatError("truncated P5 raster")
        values = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    else:
        try:
            values = np.array([int(t) for t in data[pos:].split()], dtype=np.float64)
        except ValueError:
            raise FormatError("non-integer sample in P2 raster") from None
        if values.size != width * height:
            raise FormatError(f"P2 raster has {values.size} samples, expected {width * height}")
    if np.any(values > maxval):
        raise FormatError("sample exceeds maxval")
    if maxval != 255:
        values = values * (255.0 / maxval)
    return ScalarImage(values.reshape(height, width))


def load_pgm(path) -> ScalarImage:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def quantize(img) -> np.ndarray:
    """Clamp to [0, 255] and round half away from zero (the on-disk values)."""
    a = np.clip(as_array(img), 0.0, 255.0)
    return np.floor(a + 0.5).astype(np.uint8)


def encode_pgm(img) -> bytes:
    q = quantize(img)
    h, w = q.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + q.tobytes()


def save_pgm(img, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img))


# ---------------------------------------------------------------------------
# float sidecar

_SIDECAR_HEADER = struct.Struct("<II")


def save_sidecar(img, path) -> None:
    a = as_array(img)
    with open(path, "wb") as fh:
        fh.write(_SIDECAR_HEADER.pack(*a.shape))
        fh.write(a.astype("<f8").tobytes(order="C"))


def load_sidecar(path) -> ScalarImage:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _SIDECAR_HEADER.size:
        raise FormatError("sidecar too short")
    h, w = _SIDECAR_HEADER.unpack_from(data)
    body = data[_SIDECAR_HEADER.size:]
    if len(body) != 8 * h * w:
        raise FormatError(f"sidecar body has {len(body)} bytes, expected {8 * h * w}")
    return ScalarImage(np.frombuffer(body, dtype="<f8").reshape(h, w).astype(np.float64))


def load_image(path) -> ScalarImage:
    """Load a PGM or a ``.f64`` float sidecar, chosen by extension."""
    if str(path).lower().endswith(".f64"):
        return load_sidecar(path)
    return load_pgm(path)


def save_image(img, path) -> None:
    if str(path).lower().endswith(".f64"):
        save_sidecar(img, path)
    else:
        save_pgm(img, path)


# ---------------------------------------------------------------------------
# noise


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")
        if not (0 <= int(self.seed) < 2**64):
            raise ParameterError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))


def standard_normals(n: int, seed: int) -> np.ndarray:
    """``n`` standard normals from PCG64 raw words + Box-Muller (see module doc)."""
    bitgen = np.random.PCG64(seed)
    pairs = (n + 1) // 2
    raw = bitgen.random_raw(2 * pairs)
    unif = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
    a, b = unif[0::2], unif[1::2]
    r = np.sqrt(-2.0 * np.log1p(-a))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(2.0 * np.pi * b)
    z[1::2] = r * np.sin(2.0 * np.pi * b)
    return z[:n]


def add_gaussian_noise(img, spec: NoiseSpec) -> ScalarImage:
    a = as_array(img)
    if spec.sigma == 0:
        return ScalarImage(a)
    return ScalarImage(a + spec.sigma * standard_normals(a.size, spec.seed).reshape(a.shape))


# ---------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class RunConfig:
    solver: SolverConfig = field(default_factory=SolverConfig)
    grid: GridSpec = field(default_factory=GridSpec)
    noise: NoiseSpec | None = None
    input: str = ""
    output: str = ""
    clean: str = ""
    noisy: str = ""

    def require(self, *names: str) -> None:
        missing = [n for n in names if not getattr(self, n)]
        if missing:
            raise ParameterError(f"config is missing required path(s): {', '.join(missing)}")


def _parse_int(text):
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _parse_values(text):
    """Comma list ``0.1, 0.2`` or inclusive range ``start:stop:step``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(x) for x in parts)
        return grid_values(start, stop, step)
    return tuple(float(x) for x in text.split(",") if x.strip())


def _format_values(vals):
    return ", ".join(repr(float(v)) for v in vals)


# key -> (section, field, parser, formatter)
CONFIG_KEYS = {
    "config_version": (None, None, _parse_int, str),
    "solver.max_iters": ("solver", "max_iters", _parse_int, str),
    "solver.tolerance": ("solver", "tolerance", float, repr),
    "solver.step_safety": ("solver", "step_safety", float, repr),
    "solver.check_interval": ("solver", "check_interval", _parse_int, str),
    "grid.alpha0_values": ("grid", "alpha0_values", _parse_values, _format_values),
    "grid.alpha1_values": ("grid", "alpha1_values", _parse_values, _format_values),
    "grid.s_values": ("grid", "s_values", _parse_values, _format_values),
    "grid.t_values": ("grid", "t_values", _parse_values, _format_values),
    "noise.sigma": ("noise", "sigma", float, repr),
    "noise.seed": ("noise", "seed", _parse_int, str),
    "paths.input": (None, "input", str, str),
    "paths.output": (None, "output", str, str),
    "paths.clean": (None, "clean", str, str),
    "paths.noisy": (None, "noisy", str, str),
}


def parse_config(text: str) -> RunConfig:
    sections = {"solver": {}, "grid": {}, "noise": {}}
    top = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UnknownKeyError(f"unknown key {key!r}", lineno)
        section, name, parse, _ = CONFIG_KEYS[key]
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise ParseError(f"{key}: {exc}", lineno) from None
        if key == "config_version":
            if parsed != CONFIG_VERSION:
                raise ParseError(f"unsupported config_version {parsed}", lineno)
            continue
        lines[key] = lineno
        if section is None:
            top[name] = parsed
        else:
            sections[section][name] = parsed

    def build(cls, kwargs, prefix, base=None):
        try:
            return replace(base, **kwargs) if base is not None else cls(**kwargs)
        except PGVError as exc:
            line = min((lines[k] for k in lines if k.startswith(prefix)), default=None)
            raise ParseError(str(exc), line) from None

    solver = build(SolverConfig, sections["solver"], "solver.")
    grid = build(GridSpec, sections["grid"], "grid.")
    noise = build(NoiseSpec, sections["noise"], "noise.") if sections["noise"] else None
    return RunConfig(solver=solver, grid=grid, noise=noise, **top)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def format_config(cfg: RunConfig) -> str:
    out = [f"config_version = {CONFIG_VERSION}"]
    for key, (section, name, _, fmt) in CONFIG_KEYS.items():
        if key == "config_version":
            continue
        obj = cfg if section is None else getattr(cfg, section)
        if obj is None:
            continue
        value = getattr(obj, name)
        if section is None and not value:
            continue
        out.append(f"{key} = {fmt(value)}")
    return "\n".join(out) + "\n"


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_config(cfg))


__all__ = [
    "CONFIG_KEYS", "NoiseSpec", "RunConfig", "add_gaussian_noise", "encode_pgm",
    "format_config", "load_config", "load_image", "load_pgm", "load_sidecar",
    "parse_config", "parse_pgm", "quantize", "save_config", "save_image", "save_pgm",
    "save_sidecar", "standard_normals",
]
