"""
In-memory object store.

Keys map to immutable byte payloads plus a small metadata dict. Puts never
block; the store records the simulation time of each write so experiments
can measure when an object first became available.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from seisflow.core.errors import ObjectNotFoundError

# Configure logging
logger = logging.getLogger(__name__)


@dataclass
class StoredObject:
    data: bytes
    metadata: Dict[str, Any] = field(default_factory=dict)
    written_at: float = 0.0


class ObjectStore:
    """
    Key/value object store with prefix listing.

    Args:
        clock: Returns the current simulation time (used to stamp writes)
    """

    def __init__(self, clock: Optional[Callable[[], float]] = None):
        self._objects: Dict[str, StoredObject] = {}
        self._clock = clock or (lambda: 0.0)
        self.puts = 0
        self.gets = 0
        self.deletes = 0
        self.bytes_written = 0
        self.bytes_read = 0

    def __len__(self) -> int:
        return len(self._objects)

    def __contains__(self, key: str) -> bool:
        return key in self._objects

    def put(self, key: str, data: bytes, metadata: Optional[Dict[str, Any]] = None) -> None:
        """Store ``data`` under ``key``, replacing any previous object."""
        payload = bytes(data)
        self._objects[key] = StoredObject(payload, dict(metadata or {}), self._clock())
        self.puts += 1
        self.bytes_written += len(payload)
        logger.debug("put %s (%d bytes)", key, len(payload))

    def _lookup(self, key: str) -> StoredObject:
        try:
            return self._objects[key]
        except KeyError:
            raise ObjectNotFoundError(key) from None

    def get(self, key: str) -> bytes:
        """
        Return the payload stored under ``key``.

        Raises:
            ObjectNotFoundError: If the key is absent
        """
        obj = self._lookup(key)
        self.gets += 1
        self.bytes_read += len(obj.data)
        return obj.data

    def head(self, key: str) -> Dict[str, Any]:
        """Metadata of an object without reading its payload."""
        return dict(self._lookup(key).metadata)

    def size(self, key: str) -> int:
        return len(self._lookup(key).data)

    def written_at(self, key: str) -> float:
        """Simulation time of the last write to ``key``."""
        return self._lookup(key).written_at

    def exists(self, key: str) -> bool:
        return key in self._objects

    def delete(self, key: str) -> bool:
        """
        Remove an object.

        Returns:
            True if the key existed
        """
        existed = self._objects.pop(key, None) is not None
        if existed:
            self.deletes += 1
        return existed

    def list(self, prefix: str = "") -> List[str]:
        """Keys starting with ``prefix`` in lexicographic order."""
        return sorted(k for k in self._objects if k.startswith(prefix))

    def put_array(
        self, key: str, array: np.ndarray, metadata: Optional[Dict[str, Any]] = None
    ) -> None:
        """Store an array as raw little-endian float32."""
        data = np.ascontiguousarray(array, dtype="<f4")
        meta = {"shape": list(data.shape)}
        meta.update(metadata or {})
        self.put(key, data.tobytes(), meta)

    def get_array(self, key: str) -> np.ndarray:
        """Read an array written by put_array (float32, original shape)."""
        obj = self._lookup(key)
        data = self.get(key)
        shape = tuple(obj.metadata.get("shape", [len(data) // 4]))
        return np.frombuffer(data, dtype="<f4").reshape(shape).astype(np.float32)
