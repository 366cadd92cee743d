#!/usr/bin/env python3
"""
Shared Contraction Cache Singleton
One bounded LRU memo of total contraction numbers for every suite worker in the process.
"""

import logging
import threading
from collections import OrderedDict
from fractions import Fraction
from typing import Dict, Optional, Tuple

from src.config.settings import CONTRACTION_CACHE_SIZE

logger = logging.getLogger(__name__)

ContractionKey = Tuple[Tuple[str, int], ...]


class ContractionCache:
    """Singleton memo keyed by the ordered (label, m) letters being contracted."""

    _instance = None
    _lock = threading.Lock()

    def __new__(cls):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
                    cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if not self._initialized:
            self._values: "OrderedDict[ContractionKey, Fraction]" = OrderedDict()
            self._insert_lock = threading.Lock()
            self._max_entries = CONTRACTION_CACHE_SIZE
            self._hits = 0
            self._misses = 0
            self._evictions = 0
            self._initialized = True
            logger.info(f"ContractionCache initialized (max {self._max_entries} entries)")

    def get(self, key: ContractionKey) -> Optional[Fraction]:
        with self._insert_lock:
            value = self._values.get(key)
            if value is None:
                self._misses += 1
            else:
                self._hits += 1
                self._values.move_to_end(key)
            return value

    def store(self, key: ContractionKey, value: Fraction) -> Fraction:
        """Insert once; a concurrent writer that lost the race gets the stored value back."""
        with self._insert_lock:
            if key in self._values:
                self._values.move_to_end(key)
                return self._values[key]
            self._values[key] = value
            self._evict()
            return value

    def resize(self, max_entries: int):
        if max_entries < 1:
            raise ValueError(f"cache size must be positive, got {max_entries}")
        with self._insert_lock:
            self._max_entries = max_entries
            self._evict()
        logger.debug(f"ContractionCache resized to {max_entries} entries")

    def _evict(self):
        # caller holds _insert_lock
        while len(self._values) > self._max_entries:
            self._values.popitem(last=False)
            self._evictions += 1

    def clear(self):
        with self._insert_lock:
            self._values.clear()
            self._hits = 0
            self._misses = 0
            self._evictions = 0

    def get_statistics(self) -> Dict[str, int]:
        with self._insert_lock:
            return {
                "entries": len(self._values),
                "max_entries": self._max_entries,
                "hits": self._hits,
                "misses": self._misses,
                "evictions": self._evictions,
            }
