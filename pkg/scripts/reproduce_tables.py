#!/usr/bin/env python3
"""
Regenerate the full error tables:
1) oscillatory blocks on [-1, 1] (kappa = 100 and 160)
2) spherical-harmonic blocks on the sphere (Y_12,8 and Y_32,-24)
3) writes one CSV per block to the output folder and prints every row
"""

import argparse
import asyncio
import sys
from pathlib import Path


# Allow `import app...` when the script is launched from /scripts
PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from app.core.config import get_settings  # noqa: E402
from app.core.logging import setup_logging  # noqa: E402
from app.services.analysis.experiments import TABLE_COLUMNS, run_configs, table_configs  # noqa: E402
from app.services.analysis.report_store import ReportStore  # noqa: E402
from app.services.kernels import IntervalOscillatory, SphereHarmonic  # noqa: E402

BLOCKS = {
    "osc_kappa100": (IntervalOscillatory(kappa=100.0), [100, 120, 150], [60, 70, 80, 100, 120, 150, 180]),
    "osc_kappa160": (IntervalOscillatory(kappa=160.0), [160, 180, 210], [70, 100, 120, 150, 180, 210, 240]),
    "harmonic_12_8": (
        SphereHarmonic(lbar=12, kbar=8),
        [16, 18, 20],
        [484, 529, 576, 625, 841, 1089, 1369, 1681, 2025],
    ),
    "harmonic_32_m24": (
        SphereHarmonic(lbar=32, kbar=-24),
        [36, 38, 40],
        [1849, 2025, 2209, 2401, 3249, 4225, 5329, 6561, 7921],
    ),
}


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Regenerate the full error tables")
    parser.add_argument(
        "--block",
        action="append",
        choices=sorted(BLOCKS),
        help="Block to run, may be repeated (default: all)",
    )
    parser.add_argument(
        "--jobs",
        type=int,
        help="Parallel rows (default: HYPERAPPROX_JOBS or logical cores)",
    )
    return parser.parse_args()


async def run() -> int:
    args = parse_args()
    setup_logging()
    settings = get_settings()
    if args.jobs:
        settings = settings.model_copy(update={"jobs": args.jobs})
    store = ReportStore(settings)

    if not settings.designs_dir:
        print("NOTE: HYPERAPPROX_DESIGNS not set, sphere blocks use product rules.")

    for name in args.block or list(BLOCKS):
        kernel, n_list, m_list = BLOCKS[name]
        configs = table_configs(kernel, n_list, m_list, designs_dir=settings.designs_dir)
        rows = await run_configs(configs, settings.jobs, settings)
        path = store.write_table(rows, None, name=name)

        print(f"== {name} ({len(rows)} rows)")
        for row in rows:
            record = row.csv_row()
            print(" ".join(f"{key}={record[key]}" for key in TABLE_COLUMNS if key != "seconds"))
        print(f"table: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(asyncio.run(run()))
