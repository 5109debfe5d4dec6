import base64
import io as _io
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest
from PIL import Image

from tryonkit.backends import (
    BackendConfig,
    BackendUnavailable,
    ContractViolation,
    ExternalProcessParser,
    ExternalProcessPose,
    HttpParser,
    HttpPose,
    ParserBackend,
    StubParser,
    StubPose,
    StubSkinInpainter,
    StubTryOn,
    build_backends,
    make_backend,
    run_inpaint,
    run_parser,
    run_tryon,
    template_skeleton,
)
from tryonkit.synthetic import make_garment
from tryonkit.types import BinaryMask, GarmentCategory, ParseMap, RasterImage


def _mask_full(img):
    return BinaryMask(np.ones((img.height, img.width), dtype=bool))


def _mask_empty(img):
    return BinaryMask.empty(img.width, img.height)


def test_stub_parser_echoes_painted_labels(person_long):
    parse = run_parser(StubParser(), person_long.image)
    assert np.array_equal(parse.labels, person_long.parse.labels)


def test_run_parser_rejects_wrong_dimensions(person_long):
    class HalfSizeParser(ParserBackend):
        def parse(self, img):
            return ParseMap(np.zeros((img.height // 2, img.width), dtype=np.int32))

    with pytest.raises(ContractViolation):
        run_parser(HalfSizeParser(), person_long.image)


def test_stub_pose_template_dimensions(person_long):
    pose = StubPose().estimate(person_long.image)
    assert pose.points.shape == (18, 3)
    assert (pose.points[:, 2] == 1.0).all()
    xs, ys = pose.points[:, 0], pose.points[:, 1]
    assert xs.min() >= 0 and xs.max() < person_long.image.width
    assert ys.min() >= 0 and ys.max() < person_long.image.height


def test_stub_inpaint_empty_mask_identity(person_long):
    pose = template_skeleton(64, 64)
    out = run_inpaint(
        StubSkinInpainter(), person_long.image, _mask_empty(person_long.image), pose, "", 30, 0
    )
    assert np.array_equal(out.pixels, person_long.image.pixels)


def test_stub_inpaint_full_mask_zero_jitter_constant(person_long):
    pose = template_skeleton(64, 64)
    backend = StubSkinInpainter(tone=(180, 140, 120), jitter=0)
    out = run_inpaint(backend, person_long.image, _mask_full(person_long.image), pose, "", 30, 0)
    assert (out.pixels == np.array([180, 140, 120], dtype=np.uint8)).all()


def test_stub_inpaint_deterministic_and_seed_sensitive(person_long):
    pose = template_skeleton(64, 64)
    backend = StubSkinInpainter(jitter=4)
    mask = _mask_full(person_long.image)
    a = backend.inpaint(person_long.image, mask, pose, "", 30, 7)
    b = backend.inpaint(person_long.image, mask, pose, "", 30, 7)
    c = backend.inpaint(person_long.image, mask, pose, "", 30, 8)
    assert np.array_equal(a.pixels, b.pixels)
    assert not np.array_equal(a.pixels, c.pixels)


def test_stub_inpaint_outside_mask_bit_exact(person_long):
    pose = template_skeleton(64, 64)
    backend = StubSkinInpainter(jitter=3)
    rng = np.random.default_rng(13)
    for seed in range(5):
        mask = BinaryMask(rng.random((64, 64)) > 0.6)
        out = backend.inpaint(person_long.image, mask, pose, "", 30, seed)
        outside = ~mask.bits
        assert np.array_equal(out.pixels[outside], person_long.image.pixels[outside])
        assert out.pixels.shape == person_long.image.pixels.shape


def test_stub_tryon_empty_mask_identity(person_long, garment_red):
    pose = template_skeleton(64, 64)
    out = run_tryon(
        StubTryOn(),
        person_long.image,
        garment_red,
        _mask_empty(person_long.image),
        pose,
        GarmentCategory.UPPER,
        0,
    )
    assert np.array_equal(out.pixels, person_long.image.pixels)


def test_stub_tryon_paints_garment_inside_mask_only(person_long, garment_red):
    pose = template_skeleton(64, 64)
    bits = np.zeros((64, 64), dtype=bool)
    bits[20:40, 10:50] = True
    mask = BinaryMask(bits)
    out = StubTryOn().render(person_long.image, garment_red, mask, pose, "upper", 0)
    outside = ~bits
    assert np.array_equal(out.pixels[outside], person_long.image.pixels[outside])
    assert not np.array_equal(out.pixels[bits], person_long.image.pixels[bits])
    again = StubTryOn().render(person_long.image, garment_red, mask, pose, "upper", 1)
    assert np.array_equal(out.pixels, again.pixels)


# ---------------------------------------------------------------------------
# External-process protocol

_PARSER_SCRIPT = """
import sys
from tryonkit import io as tio
from tryonkit.backends import StubParser
img = tio.load_image(sys.argv[1])
tio.save_parse(StubParser().parse(img), sys.argv[2])
"""

_POSE_SCRIPT = """
import sys
from tryonkit import io as tio
from tryonkit.backends import template_skeleton
img = tio.load_image(sys.argv[1])
tio.save_pose(template_skeleton(img.width, img.height), sys.argv[2])
"""


def test_external_process_parser(tmp_path, person_long):
    script = tmp_path / "parse_tool.py"
    script.write_text(_PARSER_SCRIPT)
    backend = ExternalProcessParser(f"python3 {script} {{image}} {{parse}}")
    parse = run_parser(backend, person_long.image)
    assert np.array_equal(parse.labels, person_long.parse.labels)


def test_external_process_pose(tmp_path, person_long):
    script = tmp_path / "pose_tool.py"
    script.write_text(_POSE_SCRIPT)
    backend = ExternalProcessPose(f"python3 {script} {{image}} {{pose}}")
    pose = backend.estimate(person_long.image)
    assert np.array_equal(pose.points, template_skeleton(64, 64).points)


def test_external_process_missing_command(person_long):
    backend = ExternalProcessParser("tryonkit-no-such-binary {image} {parse}")
    with pytest.raises(BackendUnavailable):
        backend.parse(person_long.image)


def test_external_process_nonzero_exit(person_long):
    backend = ExternalProcessParser("python3 -c exit(3)")
    with pytest.raises(BackendUnavailable):
        backend.parse(person_long.image)


def test_external_process_bad_output(tmp_path, person_long):
    script = tmp_path / "noop.py"
    script.write_text("pass\n")
    backend = ExternalProcessParser(f"python3 {script}")
    with pytest.raises(ContractViolation):
        backend.parse(person_long.image)


# ---------------------------------------------------------------------------
# HTTP protocol


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def _reply(self, payload, raw=None):
        body = raw if raw is not None else json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        req = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if self.path == "/parse":
            png = base64.b64decode(req["image"])
            with Image.open(_io.BytesIO(png)) as im:
                img = RasterImage(np.asarray(im.convert("RGB")))
            parse = StubParser().parse(img)
            self._reply(
                {
                    "labels": parse.labels.tolist(),
                    "label_schema": {str(k): v for k, v in parse.label_schema.items()},
                }
            )
        elif self.path == "/pose":
            self._reply({"keypoints": template_skeleton(64, 64).flat()})
        else:
            self._reply(None, raw=b"this is not json")


@pytest.fixture(scope="module")
def http_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def test_http_parser(http_server, person_long):
    backend = HttpParser(f"{http_server}/parse", timeout=10)
    parse = run_parser(backend, person_long.image)
    assert np.array_equal(parse.labels, person_long.parse.labels)


def test_http_pose(http_server, person_long):
    backend = HttpPose(f"{http_server}/pose", timeout=10)
    pose = backend.estimate(person_long.image)
    assert pose.points.shape == (18, 3)


def test_http_malformed_response(http_server, person_long):
    backend = HttpParser(f"{http_server}/garbage", timeout=10)
    with pytest.raises(ContractViolation):
        backend.parse(person_long.image)


def test_http_unreachable(person_long):
    backend = HttpParser("http://127.0.0.1:9/parse", timeout=0.5)
    with pytest.raises(BackendUnavailable):
        backend.parse(person_long.image)


# ---------------------------------------------------------------------------
# Configuration


def test_backend_config_rejects_unknown_kind():
    with pytest.raises(ValueError):
        BackendConfig.from_dict({"kind": "quantum"})


def test_build_backends_defaults_to_stubs():
    backends = build_backends({})
    assert isinstance(backends.parser, StubParser)
    assert isinstance(backends.pose, StubPose)
    assert isinstance(backends.inpaint, StubSkinInpainter)
    assert set(backends.tryon) == {"vitonhd", "dresscode"}
    assert all(isinstance(b, StubTryOn) for b in backends.tryon.values())


def test_build_backends_stub_options():
    backends = build_backends({"inpaint": {"kind": "stub", "tone": [1, 2, 3], "jitter": 0}})
    assert backends.inpaint.tone == (1, 2, 3)
    assert backends.inpaint.jitter == 0


def test_env_endpoint_override(monkeypatch, http_server, person_long):
    monkeypatch.setenv("TRYONKIT_PARSER_URL", f"{http_server}/parse")
    backend = make_backend("parser", BackendConfig(kind="stub"))
    assert isinstance(backend, HttpParser)
    parse = backend.parse(person_long.image)
    assert np.array_equal(parse.labels, person_long.parse.labels)
