"""
Append-only record log and its rebuildable side index.

Every line of ``log.jsonl`` is one framed record::

    <8 hex payload length> <8 hex crc32 of payload> <canonical JSON payload>\n

Canonical JSON escapes control characters, so the payload never holds a raw newline and a
record is complete exactly when its terminating newline is on disk. A record cut short by a
crash can only be the last one; anything unreadable before it is corruption.
"""
import json
import logging
import os
import struct
import threading
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from memograph.error_handler import StorageFailure, StoreCorruption
from memograph.graph_core.graph import canonical_json

logger = logging.getLogger(__name__)

HEADER_SIZE = 18
INDEX_MAGIC = b"MGINDEX1"
INDEX_HEADER = struct.Struct(">8sQI")

IndexMap = dict[str, list[tuple[int, int]]]


class _FrameError(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class LogScan:
    """
    Result of reading the whole log: decoded records with their offsets, the size of the
    readable prefix and how many trailing bytes belong to a torn record.
    """

    records: list[tuple[int, Any]] = field(default_factory=list)
    valid_size: int = 0
    torn_bytes: int = 0


def encode_record(document: Any) -> bytes:
    payload = canonical_json(document).encode("utf-8")
    header = f"{len(payload):08x} {zlib.crc32(payload):08x} ".encode("ascii")
    return header + payload + b"\n"


def decode_record(data: bytes, position: int) -> tuple[Any, int]:
    """
    Decode the record starting at ``position``.
    :param data: log bytes
    :param position: byte offset of a record header
    :return: decoded payload and the offset of the next record
    """
    header = data[position : position + HEADER_SIZE]
    if len(header) < HEADER_SIZE:
        raise _FrameError("short header")
    if header[8:9] != b" " or header[17:18] != b" ":
        raise _FrameError("garbled header")
    try:
        length = int(header[0:8], 16)
        checksum = int(header[9:17], 16)
    except ValueError:
        raise _FrameError("garbled header")

    start = position + HEADER_SIZE
    end = start + length
    if end + 1 > len(data):
        raise _FrameError("short payload")
    if data[end : end + 1] != b"\n":
        raise _FrameError("missing record terminator")
    payload = data[start:end]
    if zlib.crc32(payload) != checksum:
        raise _FrameError("checksum mismatch")
    try:
        document = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise _FrameError(f"undecodable payload: {exc}")
    return document, end + 1


class RecordLog:
    """
    Single-writer handle on ``log.jsonl``. Appends are fsynced before they return.
    """

    def __init__(self, path: Path) -> None:
        self.path = path
        self._lock = threading.Lock()

    def size(self) -> int:
        return self.path.stat().st_size if self.path.exists() else 0

    def scan(self) -> LogScan:
        """
        Read every committed record; a torn final record is reported, not raised.
        :return: LogScan
        """
        try:
            data = self.path.read_bytes() if self.path.exists() else b""
        except OSError as exc:
            raise StorageFailure(str(self.path), str(exc))

        scan = LogScan()
        position = 0
        while position < len(data):
            try:
                document, next_position = decode_record(data, position)
            except _FrameError as exc:
                remainder = data[position:]
                newline = remainder.find(b"\n")
                if newline in (-1, len(remainder) - 1):
                    scan.torn_bytes = len(remainder)
                    logger.warning(
                        f"Dropping torn record at offset {position} of {self.path}: {exc.reason}"
                    )
                    break
                raise StoreCorruption(str(self.path), position, exc.reason)
            scan.records.append((position, document))
            position = next_position
        scan.valid_size = position
        return scan

    def truncate(self, size: int) -> None:
        try:
            with open(self.path, "r+b") as handle:
                handle.truncate(size)
                handle.flush()
                os.fsync(handle.fileno())
        except OSError as exc:
            raise StorageFailure(str(self.path), str(exc))
        logger.warning(f"Truncated {self.path} to {size} bytes")

    def append(self, document: Any) -> int:
        """
        Append one record durably.
        :param document: JSON-ready record
        :return: byte offset of the new record
        """
        frame = encode_record(document)
        with self._lock:
            try:
                with open(self.path, "ab") as handle:
                    offset = handle.seek(0, os.SEEK_END)
                    handle.write(frame)
                    handle.flush()
                    os.fsync(handle.fileno())
            except OSError as exc:
                raise StorageFailure(str(self.path), str(exc))
        return offset

    def read_at(self, offset: int) -> Any:
        """
        Read back the single record at ``offset``.
        """
        try:
            with open(self.path, "rb") as handle:
                handle.seek(offset)
                header = handle.read(HEADER_SIZE)
                try:
                    length = int(header[0:8], 16)
                except ValueError:
                    raise StoreCorruption(str(self.path), offset, "garbled header")
                data = header + handle.read(length + 1)
        except OSError as exc:
            raise StorageFailure(str(self.path), str(exc))
        try:
            document, _ = decode_record(data, 0)
        except _FrameError as exc:
            raise StoreCorruption(str(self.path), offset, exc.reason)
        return document


def write_index(path: Path, covered_size: int, index: IndexMap) -> None:
    """
    Atomically replace the side index.
    :param path: index file path
    :param covered_size: log size the index describes
    :param index: graph_id -> [(version, offset)]
    """
    body = canonical_json(
        {graph_id: [list(item) for item in items] for graph_id, items in sorted(index.items())}
    ).encode("utf-8")
    temporary = path.with_name(path.name + ".tmp")
    try:
        with open(temporary, "wb") as handle:
            handle.write(INDEX_HEADER.pack(INDEX_MAGIC, covered_size, zlib.crc32(body)))
            handle.write(body)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(temporary, path)
    except OSError as exc:
        raise StorageFailure(str(path), str(exc))


def read_index(path: Path) -> Optional[tuple[int, IndexMap]]:
    """
    Load the side index; None when it is missing or unreadable.
    """
    try:
        data = path.read_bytes()
    except OSError:
        return None
    if len(data) < INDEX_HEADER.size:
        return None
    magic, covered_size, checksum = INDEX_HEADER.unpack(data[: INDEX_HEADER.size])
    body = data[INDEX_HEADER.size :]
    if magic != INDEX_MAGIC or zlib.crc32(body) != checksum:
        return None
    try:
        raw = json.loads(body.decode("utf-8"))
        index = {
            graph_id: [(int(version), int(offset)) for version, offset in items]
            for graph_id, items in raw.items()
        }
    except (UnicodeDecodeError, json.JSONDecodeError, AttributeError, TypeError, ValueError):
        return None
    return covered_size, index
