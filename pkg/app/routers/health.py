"""Service information and liveness."""

import time
from pathlib import Path
from typing import List, Optional

from fastapi import APIRouter

from app import __version__
from app.core.config import SUPPORTED_KERNELS, get_settings

router = APIRouter()


def available_designs(designs_dir: Optional[str]) -> List[str]:
    if not designs_dir or not Path(designs_dir).is_dir():
        return []
    return sorted(p.name for p in Path(designs_dir).glob("sd_t*_m*.txt"))


@router.get("/")
async def root():
    settings = get_settings()
    return {
        "service": "hyperapprox",
        "status": "active",
        "version": __version__,
        "endpoints": {
            "health": "/health",
            "moments": "/moments",
            "table": "/experiments/table",
            "designs": "/designs",
        },
        "supported_kernels": SUPPORTED_KERNELS,
        "designs_dir": settings.designs_dir,
        "designs": available_designs(settings.designs_dir),
        "jobs": settings.jobs,
        "reports_folder": settings.reports_folder,
    }


@router.get("/health")
async def health():
    return {"status": "healthy", "timestamp": time.time()}
