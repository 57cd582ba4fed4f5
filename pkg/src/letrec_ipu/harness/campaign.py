"""Differential fuzzing campaigns over generated programs."""
from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from ..sizing import DEFAULT_SIZES, SizeModel
from .differential import DISAGREE, DEFAULT_K, Verdict, differential_check, save_regression
from .generate import GenConfig, gen_case


@dataclass(frozen=True)
class CampaignConfig:
    count: int = 1000
    seed: int = 0
    prims: Optional[bool] = None  # None alternates between the two
    fault_rate: float = 0.2
    fuel: int = 5000
    k: int = DEFAULT_K
    jobs: int = 1
    regressions: Optional[str] = "regressions"


@dataclass
class CampaignReport:
    counts: Counter = field(default_factory=Counter)
    injected: int = 0
    disagreements: list = field(default_factory=list)  # (seed, Verdict, saved path)
    elapsed: float = 0.0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def conclusive_ratio(self) -> float:
        return 1 - self.counts["Inconclusive"] / self.total if self.total else 0.0

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "counts": dict(self.counts),
            "injected_faults": self.injected,
            "conclusive_ratio": round(self.conclusive_ratio, 4),
            "disagreements": [{"seed": s, "verdict": v.to_json(), "saved": p} for s, v, p in self.disagreements],
            "elapsed_seconds": round(self.elapsed, 2),
        }

    def text(self) -> str:
        lines = [f"{self.total} cases in {self.elapsed:.1f}s, {self.injected} with injected faults"]
        lines += [f"  {k}: {n}" for k, n in sorted(self.counts.items())]
        lines.append(f"  conclusive: {100 * self.conclusive_ratio:.1f}%")
        for s, v, p in self.disagreements:
            lines.append(f"DISAGREE seed {s}: {v.detail} (saved to {p})")
        return "\n".join(lines)


def _one(args) -> tuple[int, bool, Verdict]:
    seed, prims, fault_rate, fuel, k, model = args
    case = gen_case(GenConfig(seed=seed, prims_enabled=prims, fault_rate=fault_rate), model)
    return seed, case.injected is not None, differential_check(case.expr, fuel, k, model)


def run_campaign(cfg: CampaignConfig, model: SizeModel = DEFAULT_SIZES) -> CampaignReport:
    start = time.perf_counter()
    tasks = [
        (cfg.seed + i, (i % 2 == 1) if cfg.prims is None else cfg.prims, cfg.fault_rate, cfg.fuel, cfg.k, model)
        for i in range(cfg.count)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_one, tasks, chunksize=8))
    else:
        results = [_one(t) for t in tasks]
    report = CampaignReport()
    for seed, injected, v in results:
        report.counts[v.agreement] += 1
        report.injected += injected
        if v.agreement == DISAGREE:
            saved = str(save_regression(v, cfg.regressions)) if cfg.regressions else None
            report.disagreements.append((seed, v, saved))
    report.elapsed = time.perf_counter() - start
    return report
