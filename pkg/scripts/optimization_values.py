#!/usr/bin/env python3
"""f_n for F = -P(0)P(1) on the single-variable scenario against -(1/2) n'/(2n'-1)."""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from inflation_hierarchy import Polynomial, catalog, engine


@dataclass
class Config:
    max_order: int = 10


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-order", type=int, default=Config.max_order)
    cfg = Config(parser.parse_args().max_order)
    sc = catalog.single_variable()
    f = Polynomial.from_terms(sc.variables, 2, [(-1.0, [(0,), (1,)])])
    print(f"{'n':>3} {'f_n':>14} {'closed form (even n)':>22}")
    for n in range(2, cfg.max_order + 1):
        value = engine.optimize(sc, f, n).lower_bound
        half = n // 2
        closed = f"{-0.5 * half / (2 * half - 1):.10f}" if n % 2 == 0 else "-"
        print(f"{n:>3} {value:>14.10f} {closed:>22}")
    print("true minimum over compatible distributions: -0.25")


if __name__ == "__main__":
    main()
