import math

import numpy as np
import pytest

from app.core.config import Settings

# vertices of the regular tetrahedron: a spherical 2-design with (1 + 1)^2 points
TETRAHEDRON = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
) / math.sqrt(3.0)

# a spherical 3-design with 6 points
OCTAHEDRON = np.array(
    [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
)


def design_text(points: np.ndarray, header: str = "# test design") -> str:
    lines = [header] + [" ".join(repr(float(c)) for c in p) for p in points]
    return "\n".join(lines) + "\n"


@pytest.fixture
def settings(tmp_path) -> Settings:
    return Settings(
        output_folder=str(tmp_path / "results"),
        reports_folder=str(tmp_path / "results" / "reports"),
        jobs=2,
        designs_dir=None,
        sup_norm_samples=20_000,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def sphere_samples(rng) -> np.ndarray:
    points = rng.standard_normal((50, 3))
    return points / np.linalg.norm(points, axis=1)[:, None]


@pytest.fixture
def isolated_env(tmp_path, monkeypatch):
    """Run with the working directory and runtime folders inside ``tmp_path``."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("OUTPUT_FOLDER", str(tmp_path / "results"))
    monkeypatch.setenv("REPORTS_FOLDER", str(tmp_path / "results" / "reports"))
    monkeypatch.setenv("HYPERAPPROX_JOBS", "2")
    monkeypatch.delenv("HYPERAPPROX_DESIGNS", raising=False)
    return tmp_path
