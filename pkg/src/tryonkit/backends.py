"""Adapters for the four external model roles: human parser, pose
estimator, diffusion inpainter and try-on synthesizer.

Real models run out of process (command template) or behind an HTTP
endpoint; deterministic stubs make the whole pipeline testable without
any checkpoint. Every backend is dispatched through a `run_*` wrapper
that enforces the role's output contract.
"""

from __future__ import annotations

import base64
import io as _io
import json
import os
import shlex
import subprocess
import tempfile
import urllib.error
import urllib.request
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import io as tio
from .types import (
    COCO18_KEYPOINT_NAMES,
    DEFAULT_LABEL_SCHEMA,
    BinaryMask,
    GarmentCategory,
    ParseMap,
    PoseSkeleton,
    RasterImage,
)


class BackendError(Exception):
    """Base class for backend failures."""


class BackendUnavailable(BackendError):
    """The backend process/endpoint could not be reached or run."""


class ContractViolation(BackendError):
    """The backend answered, but its output breaks the role contract."""


# ---------------------------------------------------------------------------
# Role interfaces


class ParserBackend(ABC):
    label_schema: dict = DEFAULT_LABEL_SCHEMA

    @abstractmethod
    def parse(self, img: RasterImage) -> ParseMap: ...


class PoseBackend(ABC):
    @abstractmethod
    def estimate(self, img: RasterImage) -> PoseSkeleton: ...


class InpaintBackend(ABC):
    @abstractmethod
    def inpaint(
        self,
        img: RasterImage,
        mask: BinaryMask,
        pose: PoseSkeleton,
        prompt: str,
        steps: int,
        seed: int,
    ) -> RasterImage: ...


class TryOnBackend(ABC):
    @abstractmethod
    def render(
        self,
        person: RasterImage,
        garment: RasterImage,
        mask: BinaryMask,
        pose: PoseSkeleton,
        category: GarmentCategory,
        seed: int,
    ) -> RasterImage: ...


# ---------------------------------------------------------------------------
# Deterministic stubs

# Representative color per parse label; fixtures are painted with these
# colors, so the stub parser recovers the painted labels exactly, and
# stub-inpainted skin lands nearest to the arm entries.
STUB_PALETTE = {
    0: (235, 235, 235),
    1: (90, 20, 120),
    2: (45, 30, 18),
    3: (10, 10, 10),
    4: (60, 90, 160),
    5: (130, 40, 90),
    6: (50, 60, 70),
    7: (160, 60, 50),
    8: (90, 90, 90),
    9: (25, 25, 60),
    10: (60, 25, 25),
    11: (205, 170, 150),
    12: (172, 132, 106),
    13: (168, 128, 102),
    14: (198, 158, 132),
    15: (194, 154, 128),
    16: (100, 110, 40),
    17: (200, 30, 30),
    18: (185, 142, 112),
}


class StubParser(ParserBackend):
    """Labels each pixel by the nearest palette color (squared-L2)."""

    def __init__(self, palette=None, label_schema=None):
        if palette:
            self.palette = {int(k): tuple(v) for k, v in dict(palette).items()}
        else:
            self.palette = dict(STUB_PALETTE)
        if label_schema:
            self.label_schema = {int(k): v for k, v in dict(label_schema).items()}
        else:
            self.label_schema = dict(DEFAULT_LABEL_SCHEMA)
        missing = set(self.palette) - set(self.label_schema)
        if missing:
            raise ValueError(f"palette labels {sorted(missing)} missing from schema")

    def parse(self, img: RasterImage) -> ParseMap:
        ids = np.array(sorted(self.palette), dtype=np.int32)
        colors = np.array([self.palette[i] for i in ids], dtype=np.int64)
        px = img.pixels.astype(np.int64)
        dist = ((px[:, :, None, :] - colors[None, None, :, :]) ** 2).sum(axis=-1)
        labels = ids[np.argmin(dist, axis=-1)]
        return ParseMap(labels, self.label_schema)


# Frontal standing pose in unit coordinates (x, y fractions), COCO-18 order.
_POSE_TEMPLATE = np.array(
    [
        (0.50, 0.11),  # nose
        (0.50, 0.22),  # neck
        (0.36, 0.24),  # right_shoulder
        (0.34, 0.40),  # right_elbow
        (0.33, 0.56),  # right_wrist
        (0.64, 0.24),  # left_shoulder
        (0.66, 0.40),  # left_elbow
        (0.67, 0.56),  # left_wrist
        (0.42, 0.54),  # right_hip
        (0.41, 0.72),  # right_knee
        (0.41, 0.90),  # right_ankle
        (0.58, 0.54),  # left_hip
        (0.59, 0.72),  # left_knee
        (0.59, 0.90),  # left_ankle
        (0.47, 0.09),  # right_eye
        (0.53, 0.09),  # left_eye
        (0.44, 0.10),  # right_ear
        (0.56, 0.10),  # left_ear
    ]
)


def template_skeleton(width: int, height: int) -> PoseSkeleton:
    pts = np.empty((18, 3), dtype=np.float64)
    pts[:, 0] = _POSE_TEMPLATE[:, 0] * (width - 1)
    pts[:, 1] = _POSE_TEMPLATE[:, 1] * (height - 1)
    pts[:, 2] = 1.0
    return PoseSkeleton(pts)


class StubPose(PoseBackend):
    """Returns a fixed skeleton, or the frontal template scaled to the image.

    `keypoints` accepts the flat 54-number form for use from config files.
    """

    def __init__(self, skeleton: PoseSkeleton | None = None, keypoints=None):
        if skeleton is None and keypoints is not None:
            skeleton = PoseSkeleton(np.asarray(keypoints, dtype=np.float64).reshape(18, 3))
        self.skeleton = skeleton

    def estimate(self, img: RasterImage) -> PoseSkeleton:
        if self.skeleton is not None:
            return self.skeleton
        return template_skeleton(img.width, img.height)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps mod 2^64 by design; silence numpy's warning.
    with np.errstate(over="ignore"):
        z = x + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


class StubSkinInpainter(InpaintBackend):
    """Fills the masked region with a base tone plus seeded per-pixel jitter.

    The jitter is an integer hash of (seed, pixel index, channel), so
    outputs are bit-stable across library versions, not just across runs.
    """

    def __init__(self, tone=(190, 150, 124), jitter: int = 4):
        if jitter < 0:
            raise ValueError("jitter amplitude must be >= 0")
        self.tone = tuple(int(c) for c in tone)
        self.jitter = int(jitter)

    def inpaint(self, img, mask, pose, prompt, steps, seed) -> RasterImage:
        if not mask.matches(img):
            raise ValueError("mask dimensions must match the image")
        out = img.pixels.copy()
        if mask.is_empty():
            return RasterImage(out)
        flat_idx = np.flatnonzero(mask.bits).astype(np.uint64)
        fill = np.empty((flat_idx.size, 3), dtype=np.int64)
        fill[:] = self.tone
        if self.jitter > 0:
            span = np.uint64(2 * self.jitter + 1)
            seed_h = _splitmix64(np.uint64(np.int64(seed).view(np.uint64)))
            for ch in range(3):
                h = _splitmix64(seed_h + flat_idx * np.uint64(3) + np.uint64(ch))
                fill[:, ch] += (h % span).astype(np.int64) - self.jitter
        out[mask.bits] = np.clip(fill, 0, 255).astype(np.uint8)
        return RasterImage(out)


class StubTryOn(TryOnBackend):
    """Pastes the garment, resized to the mask bounding box, into the mask.

    Nearest-neighbor sampling and no randomness: the seed argument is
    accepted for contract parity and ignored. An empty mask is identity.
    """

    def render(self, person, garment, mask, pose, category, seed) -> RasterImage:
        if not mask.matches(person):
            raise ValueError("mask dimensions must match the person image")
        out = person.pixels.copy()
        if mask.is_empty():
            return RasterImage(out)
        rows = np.flatnonzero(mask.bits.any(axis=1))
        cols = np.flatnonzero(mask.bits.any(axis=0))
        r0, r1 = rows[0], rows[-1] + 1
        c0, c1 = cols[0], cols[-1] + 1
        bh, bw = r1 - r0, c1 - c0
        gh, gw = garment.height, garment.width
        map_r = (np.arange(bh) * gh) // bh
        map_c = (np.arange(bw) * gw) // bw
        patch = garment.pixels[map_r][:, map_c]
        local = mask.bits[r0:r1, c0:c1]
        region = out[r0:r1, c0:c1]
        region[local] = patch[local]
        out[r0:r1, c0:c1] = region
        return RasterImage(out)


# ---------------------------------------------------------------------------
# Dispatch wrappers (contract enforcement)


def run_parser(backend: ParserBackend, img: RasterImage) -> ParseMap:
    parse = backend.parse(img)
    if (parse.width, parse.height) != (img.width, img.height):
        raise ContractViolation(
            f"parser returned {parse.width}x{parse.height} map for "
            f"{img.width}x{img.height} input"
        )
    return parse


def run_pose(backend: PoseBackend, img: RasterImage) -> PoseSkeleton:
    pose = backend.estimate(img)
    if pose.points.shape != (18, 3):
        raise ContractViolation("pose backend must return exactly 18 keypoints")
    return pose


def run_inpaint(backend, img, mask, pose, prompt, steps, seed) -> RasterImage:
    if not mask.matches(img):
        raise ValueError("mask dimensions must match the image")
    out = backend.inpaint(img, mask, pose, prompt, steps, seed)
    if (out.width, out.height) != (img.width, img.height):
        raise ContractViolation(
            f"inpaint backend returned {out.width}x{out.height} for "
            f"{img.width}x{img.height} input"
        )
    return out


def run_tryon(backend, person, garment, mask, pose, category, seed) -> RasterImage:
    if not mask.matches(person):
        raise ValueError("mask dimensions must match the person image")
    out = backend.render(person, garment, mask, pose, category, seed)
    if (out.width, out.height) != (person.width, person.height):
        raise ContractViolation(
            f"try-on backend returned {out.width}x{out.height} for "
            f"{person.width}x{person.height} person"
        )
    return out


# ---------------------------------------------------------------------------
# External-process adapters
#
# Protocol: inputs are written to a fresh temp directory, the command
# template is invoked once per item with {placeholders} substituted
# per-token, outputs are read back in the core file formats.


def _run_command(template: str, fields: dict, timeout: float) -> None:
    argv = [tok.format(**fields) for tok in shlex.split(template)]
    try:
        proc = subprocess.run(argv, capture_output=True, timeout=timeout)
    except FileNotFoundError as exc:
        raise BackendUnavailable(f"backend command not found: {argv[0]}") from exc
    except subprocess.TimeoutExpired as exc:
        raise BackendUnavailable(f"backend command timed out after {timeout}s") from exc
    if proc.returncode != 0:
        tail = proc.stderr.decode(errors="replace")[-500:]
        raise BackendUnavailable(f"backend command failed ({proc.returncode}): {tail}")


class ExternalProcessParser(ParserBackend):
    def __init__(self, command: str, timeout: float = 60.0, label_schema=None):
        self.command = command
        self.timeout = timeout
        self.label_schema = dict(label_schema) if label_schema else dict(DEFAULT_LABEL_SCHEMA)

    def parse(self, img: RasterImage) -> ParseMap:
        with tempfile.TemporaryDirectory(prefix="tryonkit-parse-") as tmp:
            image_path = Path(tmp) / "input.png"
            parse_path = Path(tmp) / "parse.png"
            tio.save_image(img, image_path)
            _run_command(
                self.command, {"image": image_path, "parse": parse_path}, self.timeout
            )
            try:
                return tio.load_parse(parse_path)
            except (OSError, ValueError) as exc:
                raise ContractViolation(f"unreadable parser output: {exc}") from exc


class ExternalProcessPose(PoseBackend):
    def __init__(self, command: str, timeout: float = 60.0):
        self.command = command
        self.timeout = timeout

    def estimate(self, img: RasterImage) -> PoseSkeleton:
        with tempfile.TemporaryDirectory(prefix="tryonkit-pose-") as tmp:
            image_path = Path(tmp) / "input.png"
            pose_path = Path(tmp) / "pose.json"
            tio.save_image(img, image_path)
            _run_command(self.command, {"image": image_path, "pose": pose_path}, self.timeout)
            try:
                return tio.load_pose(pose_path)
            except (OSError, ValueError, KeyError) as exc:
                raise ContractViolation(f"unreadable pose output: {exc}") from exc


class ExternalProcessInpaint(InpaintBackend):
    def __init__(self, command: str, timeout: float = 600.0):
        self.command = command
        self.timeout = timeout

    def inpaint(self, img, mask, pose, prompt, steps, seed) -> RasterImage:
        with tempfile.TemporaryDirectory(prefix="tryonkit-inpaint-") as tmp:
            tmp = Path(tmp)
            tio.save_image(img, tmp / "input.png")
            tio.save_mask(mask, tmp / "mask.png")
            tio.save_pose(pose, tmp / "pose.json")
            out_path = tmp / "output.png"
            fields = {
                "image": tmp / "input.png",
                "mask": tmp / "mask.png",
                "pose": tmp / "pose.json",
                "output": out_path,
                "prompt": prompt,
                "steps": steps,
                "seed": seed,
            }
            _run_command(self.command, fields, self.timeout)
            try:
                return tio.load_image(out_path)
            except OSError as exc:
                raise ContractViolation(f"unreadable inpaint output: {exc}") from exc


class ExternalProcessTryOn(TryOnBackend):
    def __init__(self, command: str, timeout: float = 600.0):
        self.command = command
        self.timeout = timeout

    def render(self, person, garment, mask, pose, category, seed) -> RasterImage:
        with tempfile.TemporaryDirectory(prefix="tryonkit-tryon-") as tmp:
            tmp = Path(tmp)
            tio.save_image(person, tmp / "person.png")
            tio.save_image(garment, tmp / "garment.png")
            tio.save_mask(mask, tmp / "mask.png")
            tio.save_pose(pose, tmp / "pose.json")
            out_path = tmp / "output.png"
            fields = {
                "person": tmp / "person.png",
                "garment": tmp / "garment.png",
                "mask": tmp / "mask.png",
                "pose": tmp / "pose.json",
                "output": out_path,
                "category": GarmentCategory(category).value,
                "seed": seed,
            }
            _run_command(self.command, fields, self.timeout)
            try:
                return tio.load_image(out_path)
            except OSError as exc:
                raise ContractViolation(f"unreadable try-on output: {exc}") from exc


# ---------------------------------------------------------------------------
# HTTP adapters (base64-PNG JSON envelope)


def _png_b64(img: RasterImage) -> str:
    buf = _io.BytesIO()
    Image.fromarray(img.pixels).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _mask_b64(mask: BinaryMask) -> str:
    buf = _io.BytesIO()
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _b64_image(data: str) -> RasterImage:
    raw = base64.b64decode(data)
    with Image.open(_io.BytesIO(raw)) as im:
        return RasterImage(np.asarray(im.convert("RGB")))


def _post_json(url: str, payload: dict, timeout: float) -> dict:
    req = urllib.request.Request(
        url,
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
    )
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            body = resp.read()
    except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
        raise BackendUnavailable(f"backend endpoint {url} unreachable: {exc}") from exc
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise ContractViolation(f"non-JSON response from {url}") from exc


class HttpParser(ParserBackend):
    def __init__(self, url: str, timeout: float = 60.0, label_schema=None):
        self.url = url
        self.timeout = timeout
        self.label_schema = dict(label_schema) if label_schema else dict(DEFAULT_LABEL_SCHEMA)

    def parse(self, img: RasterImage) -> ParseMap:
        resp = self._call(img)
        try:
            labels = np.asarray(resp["labels"], dtype=np.int32)
            schema = {int(k): v for k, v in resp["label_schema"].items()}
            return ParseMap(labels, schema)
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractViolation(f"malformed parser response: {exc}") from exc

    def _call(self, img):
        return _post_json(self.url, {"image": _png_b64(img)}, self.timeout)


class HttpPose(PoseBackend):
    def __init__(self, url: str, timeout: float = 60.0):
        self.url = url
        self.timeout = timeout

    def estimate(self, img: RasterImage) -> PoseSkeleton:
        resp = _post_json(self.url, {"image": _png_b64(img)}, self.timeout)
        try:
            flat = resp["keypoints"]
            return PoseSkeleton(np.asarray(flat, dtype=np.float64).reshape(18, 3))
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractViolation(f"malformed pose response: {exc}") from exc


class HttpInpaint(InpaintBackend):
    def __init__(self, url: str, timeout: float = 600.0):
        self.url = url
        self.timeout = timeout

    def inpaint(self, img, mask, pose, prompt, steps, seed) -> RasterImage:
        payload = {
            "image": _png_b64(img),
            "mask": _mask_b64(mask),
            "keypoints": pose.flat(),
            "prompt": prompt,
            "steps": int(steps),
            "seed": int(seed),
        }
        resp = _post_json(self.url, payload, self.timeout)
        try:
            return _b64_image(resp["image"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractViolation(f"malformed inpaint response: {exc}") from exc


class HttpTryOn(TryOnBackend):
    def __init__(self, url: str, timeout: float = 600.0):
        self.url = url
        self.timeout = timeout

    def render(self, person, garment, mask, pose, category, seed) -> RasterImage:
        payload = {
            "person": _png_b64(person),
            "garment": _png_b64(garment),
            "mask": _mask_b64(mask),
            "keypoints": pose.flat(),
            "category": GarmentCategory(category).value,
            "seed": int(seed),
        }
        resp = _post_json(self.url, payload, self.timeout)
        try:
            return _b64_image(resp["image"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractViolation(f"malformed try-on response: {exc}") from exc


# ---------------------------------------------------------------------------
# Configuration


@dataclass
class BackendConfig:
    """One `kind` plus kind-specific options from the pipeline config file."""

    kind: str = "stub"
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict | None) -> "BackendConfig":
        d = dict(d or {})
        kind = d.pop("kind", "stub")
        if kind not in ("stub", "external-process", "http"):
            raise ValueError(f"unknown backend kind {kind!r}")
        return cls(kind=kind, options=d)


@dataclass
class BackendSet:
    """One backend instance per role; `tryon` maps synth-source names."""

    parser: ParserBackend
    pose: PoseBackend
    inpaint: InpaintBackend
    tryon: dict = field(default_factory=dict)


def _env_endpoint(role: str) -> str | None:
    return os.environ.get(f"TRYONKIT_{role.upper()}_URL")


_STUB_FACTORIES = {
    "parser": lambda opts: StubParser(**opts),
    "pose": lambda opts: StubPose(**opts),
    "inpaint": lambda opts: StubSkinInpainter(**opts),
    "tryon": lambda opts: StubTryOn(**opts),
}

_PROCESS_FACTORIES = {
    "parser": ExternalProcessParser,
    "pose": ExternalProcessPose,
    "inpaint": ExternalProcessInpaint,
    "tryon": ExternalProcessTryOn,
}

_HTTP_FACTORIES = {
    "parser": HttpParser,
    "pose": HttpPose,
    "inpaint": HttpInpaint,
    "tryon": HttpTryOn,
}


def make_backend(role: str, cfg: BackendConfig, env_role: str | None = None):
    """Instantiate one backend. `env_role` names the CI endpoint override
    variable (TRYONKIT_<ROLE>_URL); when set it wins over the config."""
    kind, options = cfg.kind, dict(cfg.options)
    override = _env_endpoint(env_role or role)
    if override:
        kind = "http"
        options = {k: v for k, v in options.items() if k in ("timeout", "label_schema")}
        options["url"] = override
    if kind == "stub":
        return _STUB_FACTORIES[role](options)
    if kind == "external-process":
        return _PROCESS_FACTORIES[role](**options)
    return _HTTP_FACTORIES[role](**options)


def build_backends(config: dict | None) -> BackendSet:
    """Build a fresh BackendSet from the `backends:` config mapping.

    Call once per worker: instances are not assumed shareable, the config
    mapping is.
    """
    config = config or {}
    tryon_cfgs = config.get("tryon") or {"vitonhd": {}, "dresscode": {}}
    tryon = {
        name: make_backend("tryon", BackendConfig.from_dict(c), env_role=f"tryon_{name}")
        for name, c in tryon_cfgs.items()
    }
    return BackendSet(
        parser=make_backend("parser", BackendConfig.from_dict(config.get("parser"))),
        pose=make_backend("pose", BackendConfig.from_dict(config.get("pose"))),
        inpaint=make_backend("inpaint", BackendConfig.from_dict(config.get("inpaint"))),
        tryon=tryon,
    )
