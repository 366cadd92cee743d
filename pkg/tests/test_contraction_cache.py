from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from src.config.settings import CONTRACTION_CACHE_SIZE
from src.contraction_cache import ContractionCache


def key(m: int):
    return (("e1", m), ("eb1", 0))


@pytest.fixture
def cache():
    cache = ContractionCache()
    cache.clear()
    yield cache
    cache.resize(CONTRACTION_CACHE_SIZE)
    cache.clear()


def test_singleton():
    assert ContractionCache() is ContractionCache()


def test_store_keeps_first_value(cache):
    assert cache.store(key(0), Fraction(1, 8)) == Fraction(1, 8)
    assert cache.store(key(0), Fraction(5)) == Fraction(1, 8)
    assert cache.get(key(0)) == Fraction(1, 8)


def test_least_recently_used_entry_is_evicted(cache):
    cache.resize(2)
    cache.store(key(0), Fraction(1))
    cache.store(key(1), Fraction(2))
    assert cache.get(key(0)) == 1
    cache.store(key(2), Fraction(3))
    assert cache.get(key(1)) is None
    assert cache.get(key(0)) == 1
    stats = cache.get_statistics()
    assert stats["entries"] == 2
    assert stats["max_entries"] == 2
    assert stats["evictions"] == 1


def test_resize_trims_and_rejects_zero(cache):
    for m in range(5):
        cache.store(key(m), Fraction(m + 1))
    cache.resize(3)
    assert cache.get_statistics()["entries"] == 3
    assert cache.get(key(4)) == 5
    with pytest.raises(ValueError):
        cache.resize(0)


def test_counters_are_exact_under_threads(cache):
    cache.store(key(0), Fraction(1))

    def lookups(_):
        for m in range(100):
            cache.get(key(m % 2))

    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lookups, range(8)))
    stats = cache.get_statistics()
    assert stats["hits"] == 400
    assert stats["misses"] == 400
