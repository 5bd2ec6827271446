"""Durable snapshot storage: one file per image plus a line-delimited index.

Write ordering is what makes this crash-safe without a database:

* save: bytes go to a temp file, fsync, atomic rename to the final name,
  and only then is the index line appended. A crash before the rename leaves
  nothing visible; a crash after it leaves an orphan file that the startup
  scan folds back into the index.
* delete: the image file is unlinked first, then the index rewritten. A crash
  in between leaves a stale index line that the startup scan drops.

So the directory is the ground truth and ``snapshots.idx`` is a cache of it.
"""
from __future__ import annotations

import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from gvss.pipeline import Encoding, EncodedImage, MEDIA_TYPES

INDEX_NAME = "snapshots.idx"

_EXTENSIONS = {
    Encoding.JPEG: "jpg",
    Encoding.PNG24: "png",
    Encoding.PNG8: "png",
    Encoding.PNG_GRAY: "png",
}

# <13-digit epoch millis>-<6-digit counter>, zero-padded so ids sort by time.
_ID_RE = re.compile(r"^(\d{13})-(\d{6})$")
_FILE_RE = re.compile(r"^(\d{13}-\d{6})\.(jpg|png)$")

# PNG stores its color type one byte into the IHDR payload tail:
# 8-byte signature + 8-byte chunk header + width(4) + height(4) + bit depth(1).
_PNG_COLOR_TYPE_OFFSET = 25
_PNG_COLOR_TYPES = {0: Encoding.PNG_GRAY, 2: Encoding.PNG24, 3: Encoding.PNG8}


class StoreError(Exception):
    pass


class NotFound(StoreError):
    def __init__(self, snapshot_id: str):
        super().__init__(f"no snapshot with id {snapshot_id!r}")
        self.snapshot_id = snapshot_id


class IoError(StoreError):
    """Disk-level failure (full, unwritable, vanished directory)."""


@dataclass(frozen=True)
class SnapshotRecord:
    snapshot_id: str
    camera_id: str
    captured_at: float
    encoding: Encoding
    byte_length: int
    media_type: str

    def to_line(self) -> str:
        return "\t".join(
            (
                self.snapshot_id,
                self.camera_id,
                repr(self.captured_at),
                self.encoding.value,
                str(self.byte_length),
                self.media_type,
            )
        )

    @classmethod
    def from_line(cls, line: str) -> "SnapshotRecord":
        snapshot_id, camera_id, captured_at, encoding, byte_length, media_type = line.split("\t")
        return cls(
            snapshot_id=snapshot_id,
            camera_id=camera_id,
            captured_at=float(captured_at),
            encoding=Encoding(encoding),
            byte_length=int(byte_length),
            media_type=media_type,
        )


def _sniff_png_encoding(path: Path) -> Encoding:
    with open(path, "rb") as fh:
        head = fh.read(_PNG_COLOR_TYPE_OFFSET + 1)
    if len(head) > _PNG_COLOR_TYPE_OFFSET:
        kind = _PNG_COLOR_TYPES.get(head[_PNG_COLOR_TYPE_OFFSET])
        if kind is not None:
            return kind
    return Encoding.PNG24


class SnapshotStore:
    """Filesystem-backed snapshot collection under one directory.

    Concurrent save/list/fetch are safe; delete and the index rewrite it
    entails serialize behind the same lock as save.
    """

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._index_path = self._dir / INDEX_NAME
        self._mu = threading.Lock()
        self._records: dict[str, SnapshotRecord] = {}
        self._counter = 0
        self.recover()

    # -- id and path plumbing ------------------------------------------------

    def _new_id(self, ids_in_use) -> str:
        millis = int(time.time() * 1000)
        while True:
            candidate = f"{millis:013d}-{self._counter:06d}"
            self._counter += 1
            if candidate not in ids_in_use:
                return candidate

    def _path_for(self, record: SnapshotRecord) -> Path:
        return self._dir / f"{record.snapshot_id}.{_EXTENSIONS[record.encoding]}"

    # -- startup reconciliation ----------------------------------------------

    def recover(self) -> None:
        """Rebuild the in-memory index from the directory, trusting files over
        index lines: orphan files gain synthesized records, stale lines drop.
        """
        indexed: dict[str, SnapshotRecord] = {}
        if self._index_path.exists():
            for line in self._index_path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                try:
                    rec = SnapshotRecord.from_line(line)
                except (ValueError, KeyError):
                    continue  # torn tail line from a crash mid-append
                indexed[rec.snapshot_id] = rec

        records: dict[str, SnapshotRecord] = {}
        for path in self._dir.iterdir():
            m = _FILE_RE.match(path.name)
            if not m:
                continue
            snapshot_id, ext = m.groups()
            size = path.stat().st_size
            known = indexed.get(snapshot_id)
            if known is not None and self._path_for(known).name == path.name:
                if known.byte_length != size:
                    known = SnapshotRecord(
                        known.snapshot_id, known.camera_id, known.captured_at,
                        known.encoding, size, known.media_type,
                    )
                records[snapshot_id] = known
                continue
            encoding = Encoding.JPEG if ext == "jpg" else _sniff_png_encoding(path)
            records[snapshot_id] = SnapshotRecord(
                snapshot_id=snapshot_id,
                camera_id="unknown",
                captured_at=int(snapshot_id.split("-", 1)[0]) / 1000.0,
                encoding=encoding,
                byte_length=size,
                media_type=MEDIA_TYPES[encoding],
            )

        with self._mu:
            self._records = records
            if records != indexed:
                self._rewrite_index_locked()

    # -- index I/O (callers hold self._mu) -------------------------------------

    def _rewrite_index_locked(self) -> None:
        body = "".join(
            self._records[sid].to_line() + "\n" for sid in sorted(self._records)
        )
        tmp = self._index_path.with_suffix(".idx.tmp")
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                fh.write(body)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self._index_path)
        except OSError as exc:
            raise IoError(f"cannot rewrite snapshot index: {exc}") from exc

    def _append_index_locked(self, record: SnapshotRecord) -> None:
        try:
            with open(self._index_path, "a", encoding="utf-8") as fh:
                fh.write(record.to_line() + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise IoError(f"cannot append to snapshot index: {exc}") from exc

    # -- public operations -----------------------------------------------------

    def save(self, image: EncodedImage, camera_id: str, captured_at: float) -> SnapshotRecord:
        if not image.data:
            raise ValueError("refusing to store an empty image")
        with self._mu:
            snapshot_id = self._new_id(self._records)
            record = SnapshotRecord(
                snapshot_id=snapshot_id,
                camera_id=camera_id,
                captured_at=captured_at,
                encoding=image.encoding,
                byte_length=len(image.data),
                media_type=image.media_type,
            )
            final = self._path_for(record)
            tmp = final.with_suffix(final.suffix + ".tmp")
            try:
                with open(tmp, "wb") as fh:
                    fh.write(image.data)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, final)
            except OSError as exc:
                try:
                    tmp.unlink(missing_ok=True)
                except OSError:
                    pass
                raise IoError(f"cannot write snapshot {snapshot_id}: {exc}") from exc
            self._records[snapshot_id] = record
            self._append_index_locked(record)
            return record

    def list(self) -> list[SnapshotRecord]:
        with self._mu:
            return [self._records[sid] for sid in sorted(self._records, reverse=True)]

    def get(self, snapshot_id: str) -> SnapshotRecord:
        with self._mu:
            try:
                return self._records[snapshot_id]
            except KeyError:
                raise NotFound(snapshot_id) from None

    def fetch(self, snapshot_id: str) -> EncodedImage:
        record = self.get(snapshot_id)
        try:
            data = self._path_for(record).read_bytes()
        except FileNotFoundError:
            raise NotFound(snapshot_id) from None
        except OSError as exc:
            raise IoError(f"cannot read snapshot {snapshot_id}: {exc}") from exc
        return EncodedImage(
            data=data,
            encoding=record.encoding,
            media_type=record.media_type,
            width=0,
            height=0,
        )

    def delete(self, snapshot_id: str) -> None:
        with self._mu:
            if snapshot_id not in self._records:
                raise NotFound(snapshot_id)
            record = self._records[snapshot_id]
            try:
                self._path_for(record).unlink()
            except FileNotFoundError:
                pass  # ground truth already agrees
            except OSError as exc:
                raise IoError(f"cannot delete snapshot {snapshot_id}: {exc}") from exc
            del self._records[snapshot_id]
            self._rewrite_index_locked()

    def __len__(self) -> int:
        with self._mu:
            return len(self._records)
