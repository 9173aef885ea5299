"""Interactive render service: newline-delimited JSON requests in, raw
tensor frames out. Keeps the cloud and grid resident so per-frame cost is
one cull+project(+filter), which is what interactive viewers need.

Request line: {"camera_to_world": [16 row-major], "mode": "raw"|"filtered",
               "filter_strength"?, "levels"?, "edge_threshold"?, "zbuf_eps"?}
Reply: an RGDA raw tensor frame. On a bad request an error frame is sent
instead: magic "ERR0", uint32 length, utf-8 message; the connection stays
open unless the stream itself is unreadable.
"""

from __future__ import annotations

import json
import socketserver
import struct
import sys

import numpy as np

from .errors import LidarSplatError
from .filtering import FilterParams, depth_filter
from .frame import RenderParams
from .geometry import CameraModel, RigidTransform
from .grid import build_grid
from .io.tensor import frame_to_tensor
from .render import project_points

ERR_MAGIC = b"ERR0"


def write_error(stream, message: str) -> None:
    data = message.encode("utf-8")
    stream.write(ERR_MAGIC + struct.pack("<I", len(data)) + data)
    stream.flush()


def read_error(stream) -> str:
    (length,) = struct.unpack("<I", stream.read(4))
    return stream.read(length).decode("utf-8")


class RenderService:
    """Owns the scene; stateless per request, safe to share across handlers."""

    def __init__(self, cloud, base_camera: CameraModel, rparams: RenderParams,
                 fparams: FilterParams, backend=None):
        self.cloud = cloud
        self.base_camera = base_camera
        self.rparams = rparams
        self.fparams = fparams
        self.backend = backend
        self.grid = build_grid(cloud, rparams.cell_size, backend)

    def render(self, request: dict):
        mode = request.get("mode", "filtered")
        if mode not in ("raw", "filtered"):
            raise LidarSplatError(f"unknown mode {mode!r}")
        mat = np.asarray(request["camera_to_world"], dtype=np.float64).reshape(4, 4)
        camera = self.base_camera.with_pose(RigidTransform.from_matrix(mat).inverse())
        rparams = RenderParams(
            zbuffer_epsilon_rel=float(
                request.get("zbuf_eps", self.rparams.zbuffer_epsilon_rel)
            ),
            cell_size=self.rparams.cell_size,
        )
        frame = project_points(self.cloud, self.grid, camera, rparams, backend=self.backend)
        if mode == "filtered":
            fparams = FilterParams(
                levels_n=int(request.get("levels", self.fparams.levels_n)),
                filter_strength=float(
                    request.get("filter_strength", self.fparams.filter_strength)
                ),
                edge_threshold=float(
                    request.get("edge_threshold", self.fparams.edge_threshold)
                ),
            )
            frame = depth_filter(frame, fparams, backend=self.backend)
        return frame


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        while True:
            line = self.rfile.readline()
            if not line:
                return
            try:
                request = json.loads(line)
                frame = self.server.service.render(request)
            except (LidarSplatError, ValueError, KeyError, TypeError) as e:
                write_error(self.wfile, f"render request failed: {e}")
                continue
            frame_to_tensor(frame).write(self.wfile)


class RenderServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, service: RenderService):
        super().__init__(address, _Handler)
        self.service = service


def serve_forever(service: RenderService, host: str, port: int, ready_stream=None):
    with RenderServer((host, port), service) as server:
        bound = server.server_address
        msg = f"render service listening on {bound[0]}:{bound[1]}"
        print(msg, file=ready_stream or sys.stderr, flush=True)
        server.serve_forever()
