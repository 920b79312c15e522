"""Byte-capacity content cache with recency eviction and prefetch accounting.

Keys are opaque: the simulator uses the canonical metadata serialization in
Semantic mode and the bare IRI in Traditional mode.  Every entry remembers
whether it was inserted on demand or by a prefetch, so the useless-prefetch
ratio (prefetched bytes never served to anyone) can be reported per run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, asdict
from typing import Hashable, Optional


class CacheError(Exception):
    pass


class TimeRegression(CacheError):
    """A timestamp went backwards relative to an earlier operation."""


class ContentOrigin(enum.Enum):
    DEMAND = "demand"
    PREFETCH = "prefetch"


@dataclass
class CacheEntry:
    key: Hashable
    size: int
    origin: ContentOrigin
    inserted_at: float
    last_access: float
    hit_count: int = 0
    # Set once the entry's bytes have been credited as a useful prefetch.
    prefetch_credited: bool = False


def _lru_victim(entry: CacheEntry):
    return (entry.last_access, entry.inserted_at, str(entry.key))


def _fifo_victim(entry: CacheEntry):
    return (entry.inserted_at, str(entry.key))


_POLICIES = {"lru": _lru_victim, "fifo": _fifo_victim}


@dataclass
class CacheStats:
    lookups: int = 0
    hits: int = 0
    demand_insertions: int = 0
    prefetch_insertions: int = 0
    evictions: int = 0
    rejections: int = 0
    prefetched_bytes: int = 0
    prefetched_bytes_hit: int = 0
    used: int = 0
    capacity: int = 0

    @property
    def hit_ratio(self) -> float:
        return self.hits / self.lookups if self.lookups else 0.0

    @property
    def useless_prefetch_ratio(self) -> float:
        if not self.prefetched_bytes:
            return 0.0
        return (self.prefetched_bytes - self.prefetched_bytes_hit) / self.prefetched_bytes

    def as_dict(self) -> dict:
        out = asdict(self)
        out["hit_ratio"] = self.hit_ratio
        out["useless_prefetch_ratio"] = self.useless_prefetch_ratio
        return out


class Cache:
    """Single-writer byte-capacity cache; eviction policy is pluggable."""

    def __init__(self, capacity: int, policy: str = "lru"):
        if capacity <= 0:
            raise ValueError(f"capacity must be positive, got {capacity}")
        if policy not in _POLICIES:
            raise ValueError(f"unknown eviction policy {policy!r}")
        self.capacity = capacity
        self.policy = policy
        self._victim_key = _POLICIES[policy]
        self._entries: dict[Hashable, CacheEntry] = {}
        self._clock = 0.0
        self._stats = CacheStats(capacity=capacity)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._entries

    @property
    def used(self) -> int:
        return self._stats.used

    def _advance(self, now: float) -> None:
        if now < self._clock:
            raise TimeRegression(f"time went backwards: {now} < {self._clock}")
        self._clock = now

    def lookup(self, key: Hashable, now: float) -> Optional[CacheEntry]:
        """Return the entry on a hit (refreshing recency), None on a miss."""
        self._advance(now)
        self._stats.lookups += 1
        entry = self._entries.get(key)
        if entry is None:
            return None
        self._stats.hits += 1
        entry.last_access = now
        entry.hit_count += 1
        if entry.origin is ContentOrigin.PREFETCH and not entry.prefetch_credited:
            entry.prefetch_credited = True
            self._stats.prefetched_bytes_hit += entry.size
        return entry

    def insert(self, key: Hashable, size: int, origin: ContentOrigin, now: float) -> bool:
        """Insert or refresh an entry, evicting until it fits.

        Returns False (and changes nothing but the rejection counter) when
        the object alone exceeds the cache capacity.  Re-inserting a present
        key refreshes its recency and origin without double-counting bytes.
        """
        if size <= 0:
            raise ValueError(f"size must be positive, got {size}")
        self._advance(now)
        if size > self.capacity:
            self._stats.rejections += 1
            return False

        existing = self._entries.get(key)
        if existing is not None:
            self._stats.used += size - existing.size
            existing.size = size
            existing.origin = origin
            existing.last_access = now
            self._evict_until_fits(exclude=key)
            return True

        while self._stats.used + size > self.capacity:
            self._evict_one()
        entry = CacheEntry(key, size, origin, inserted_at=now, last_access=now)
        self._entries[key] = entry
        self._stats.used += size
        if origin is ContentOrigin.PREFETCH:
            self._stats.prefetch_insertions += 1
            self._stats.prefetched_bytes += size
        else:
            self._stats.demand_insertions += 1
        return True

    def credit_prefetch_hit(self, key: Hashable, now: float) -> None:
        """Mark a prefetched entry as demanded without counting a lookup.

        Used when a demand request was already counted as a miss but is
        satisfied by an in-flight prefetch arriving at the cache.
        """
        self._advance(now)
        entry = self._entries[key]
        entry.last_access = now
        if entry.origin is ContentOrigin.PREFETCH and not entry.prefetch_credited:
            entry.prefetch_credited = True
            self._stats.prefetched_bytes_hit += entry.size

    def _evict_one(self) -> None:
        victim = min(self._entries.values(), key=self._victim_key)
        del self._entries[victim.key]
        self._stats.used -= victim.size
        self._stats.evictions += 1

    def _evict_until_fits(self, exclude: Hashable) -> None:
        while self._stats.used > self.capacity:
            victim = min(
                (e for e in self._entries.values() if e.key != exclude),
                key=self._victim_key,
            )
            del self._entries[victim.key]
            self._stats.used -= victim.size
            self._stats.evictions += 1

    def stats(self) -> CacheStats:
        """Snapshot of all counters (a copy; further ops do not mutate it)."""
        return CacheStats(**asdict(self._stats))

    def entries(self) -> list[CacheEntry]:
        return list(self._entries.values())
