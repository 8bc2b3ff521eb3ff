#!/usr/bin/env python3
"""Bisect the order-n feasibility threshold of the noisy GHZ family on the triangle."""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from inflation_hierarchy import catalog, engine, ghz_noisy
from inflation_hierarchy.inflate import build_inflation, orbits


@dataclass
class Config:
    order: int = 2
    lo: float = 0.0
    hi: float = 1.0
    resolution: float = 1e-4


def bisect(cfg: Config) -> dict:
    sc = catalog.triangle()
    oi = orbits(build_inflation(sc, cfg.order))
    lo, hi, steps = cfg.lo, cfg.hi, []
    while hi - lo > cfg.resolution:
        mid = (lo + hi) / 2
        verdict = engine.check_compatibility(sc, ghz_noisy(mid), cfg.order, orbit_index=oi)
        steps.append((mid, verdict.status))
        if verdict.status == engine.FEASIBLE:
            lo = mid
        else:
            hi = mid
    return {"config": asdict(cfg), "threshold_low": lo, "threshold_high": hi,
            "reference": 2 * np.sqrt(3) - 3, "orbits": len(oi), "steps": steps}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--order", type=int, default=Config.order)
    parser.add_argument("--resolution", type=float, default=Config.resolution)
    args = parser.parse_args()
    print(json.dumps(bisect(Config(order=args.order, resolution=args.resolution)), indent=2))


if __name__ == "__main__":
    main()
