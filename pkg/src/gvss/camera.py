"""Frame production: fixed-cadence capture loops over pluggable sources.

Real capture hardware is out of scope; sources are a deterministic synthetic
pattern and a cycled directory of stills, which is enough to stand in for
recorded footage.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image

DEFAULT_CADENCE_MS = 1000

# Advertised resolution modes: "normal" is a fixed server-side size,
# "high" is whatever the source natively produces.
NORMAL_WIDTH = 320
NORMAL_HEIGHT = 240


class CameraError(Exception):
    pass


class UnknownCamera(CameraError):
    def __init__(self, camera_id: str):
        super().__init__(f"unknown camera: {camera_id!r}")
        self.camera_id = camera_id


class NoFrameYet(CameraError):
    def __init__(self, camera_id: str):
        super().__init__(f"no frame captured yet for camera {camera_id!r}")
        self.camera_id = camera_id


class SourceKind(str, Enum):
    SYNTHETIC = "synthetic"
    FILE_SEQUENCE = "file_sequence"


@dataclass(frozen=True)
class Frame:
    """One uncompressed RGB raster plus capture metadata."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8, row-major
    captured_at: float  # wall-clock epoch seconds
    sequence: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("frame dimensions must be >= 1")
        if self.pixels.dtype != np.uint8 or self.pixels.shape != (self.height, self.width, 3):
            raise ValueError(
                f"pixel buffer must be uint8 of shape ({self.height}, {self.width}, 3), "
                f"got {self.pixels.dtype} {self.pixels.shape}"
            )


@dataclass(frozen=True)
class CameraDescriptor:
    camera_id: str
    name: str
    kind: SourceKind
    native_width: int
    native_height: int


def synthetic_pixels(width: int, height: int, sequence: int) -> np.ndarray:
    """Deterministic test pattern: R=(x+seq)%256, G=(y+seq)%256, B=(x^y)%256."""
    xs = np.arange(width, dtype=np.int64)
    ys = np.arange(height, dtype=np.int64)
    px = np.empty((height, width, 3), dtype=np.uint8)
    px[..., 0] = ((xs + sequence) % 256).astype(np.uint8)[None, :]
    px[..., 1] = ((ys + sequence) % 256).astype(np.uint8)[:, None]
    px[..., 2] = ((xs[None, :] ^ ys[:, None]) % 256).astype(np.uint8)
    return px


def synthetic_frame(width: int, height: int, sequence: int, captured_at: float = 0.0) -> Frame:
    if width < 1 or height < 1:
        raise ValueError("synthetic frame dimensions must be >= 1")
    return Frame(width, height, synthetic_pixels(width, height, sequence), captured_at, sequence)


class SyntheticSource:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height

    def produce(self, sequence: int) -> np.ndarray:
        return synthetic_pixels(self.width, self.height, sequence)


class FileSequenceSource:
    """Cycles the PNG/PPM stills of a directory in lexicographic name order."""

    def __init__(self, directory: str | Path):
        directory = Path(directory)
        paths = sorted(
            p for p in directory.iterdir() if p.suffix.lower() in (".png", ".ppm")
        )
        if not paths:
            raise CameraError(f"no PNG or PPM stills in {directory}")
        self._stills = [self._load(p) for p in paths]
        first = self._stills[0]
        self.height, self.width = first.shape[:2]

    @staticmethod
    def _load(path: Path) -> np.ndarray:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)

    def produce(self, sequence: int) -> np.ndarray:
        return self._stills[sequence % len(self._stills)]


class Camera:
    """A capture loop writing a single latest-frame slot.

    One writer (the loop), any number of snapshot readers. ``tick`` is exposed
    so tests can drive capture without threads.
    """

    def __init__(self, descriptor: CameraDescriptor, source, cadence_ms: int = DEFAULT_CADENCE_MS):
        if cadence_ms < 1:
            raise ValueError("cadence_ms must be >= 1")
        self.descriptor = descriptor
        self.cadence_ms = cadence_ms
        self._source = source
        self._slot: Frame | None = None
        self._slot_lock = threading.Lock()
        self._sequence = 0

    def tick(self, now: float | None = None) -> Frame:
        pixels = self._source.produce(self._sequence)
        frame = Frame(
            width=pixels.shape[1],
            height=pixels.shape[0],
            pixels=pixels,
            captured_at=time.time() if now is None else now,
            sequence=self._sequence,
        )
        self._sequence += 1
        with self._slot_lock:
            self._slot = frame
        return frame

    def latest(self) -> Frame:
        with self._slot_lock:
            frame = self._slot
        if frame is None:
            raise NoFrameYet(self.descriptor.camera_id)
        return frame

    def run(self, stop: threading.Event) -> None:
        # Deadline scheduling so per-tick work does not accumulate drift.
        period = self.cadence_ms / 1000.0
        next_at = time.monotonic()
        while not stop.is_set():
            self.tick()
            next_at += period
            delay = next_at - time.monotonic()
            if delay > 0:
                stop.wait(delay)
            else:
                next_at = time.monotonic()


class CameraHub:
    """The configured camera set and its capture threads."""

    def __init__(self, cameras: list[Camera]):
        self._cameras = {c.descriptor.camera_id: c for c in cameras}
        if len(self._cameras) != len(cameras):
            raise ValueError("camera ids must be unique")
        self._threads: list[threading.Thread] = []
        self._stop = threading.Event()

    def get(self, camera_id: str) -> Camera:
        try:
            return self._cameras[camera_id]
        except KeyError:
            raise UnknownCamera(camera_id) from None

    def capture_latest(self, camera_id: str) -> Frame:
        return self.get(camera_id).latest()

    def descriptors(self) -> list[CameraDescriptor]:
        return [c.descriptor for c in self._cameras.values()]

    def start(self) -> None:
        for cam in self._cameras.values():
            t = threading.Thread(
                target=cam.run, args=(self._stop,), name=f"camera-{cam.descriptor.camera_id}", daemon=True
            )
            t.start()
            self._threads.append(t)

    def stop(self) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=5)
        self._threads.clear()
