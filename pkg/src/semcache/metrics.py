"""Per-run metrics report shared by the simulator, sweeps and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict


@dataclass
class MetricsReport:
    """All headline numbers for one simulation run.

    ``useless_prefetch_ratio`` divides unused prefetched bytes by total
    prefetched bytes; ``useless_prefetch_origin_ratio`` divides the same
    numerator by all bytes fetched from the origin (demand plus prefetch),
    so both readings of "useless data traffic" are available.
    """

    mode: str
    requests_total: int
    hits: int
    lookups: int
    hit_ratio: float
    mean_latency_ms: float
    prefetched_bytes: int
    prefetched_bytes_hit: int
    useless_prefetch_ratio: float
    origin_bytes: int
    useless_prefetch_origin_ratio: float
    metadata_overhead_bytes: int
    per_user_metadata_bytes: float
    metadata_traffic_ratio: float
    scenario: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)

    def flat_dict(self) -> dict:
        """Flatten for CSV output: scenario keys prefixed with ``scenario_``."""
        out = {k: v for k, v in asdict(self).items() if k != "scenario"}
        for k in sorted(self.scenario):
            out[f"scenario_{k}"] = self.scenario[k]
        return out
