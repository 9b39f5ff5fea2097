import numpy as np
import pytest

from hexvof.experiments import (
    MeshSpec,
    convergence_study,
    poor_quality_mesh_spec,
    verification_capsule,
    verification_sphere,
)
from hexvof.spatial import build_kdtree

# (name, passed, detail) rows printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


class Experiments:
    """Lazily runs and caches the verification studies shared by several tests."""

    SETUPS = {
        "sphere_axis": (lambda: MeshSpec(), verification_sphere),
        "sphere_sine": (lambda: MeshSpec(transforms=["sinusoidal"]), verification_sphere),
        "capsule_axis": (lambda: MeshSpec(), verification_capsule),
        "capsule_sine": (lambda: MeshSpec(transforms=["sinusoidal"]), verification_capsule),
        "sphere_poor": (poor_quality_mesh_spec, verification_sphere),
    }

    def __init__(self):
        self._meshes = {}
        self._studies = {}

    def setup(self, name):
        if name not in self._meshes:
            spec, geom = self.SETUPS[name]
            mesh = spec().build()
            self._meshes[name] = (mesh, build_kdtree(mesh), geom())
        return self._meshes[name]

    def study(self, name, method="amr", threads=1, n_subs=range(6)):
        key = (name, method, threads, tuple(n_subs))
        if key not in self._studies:
            mesh, tree, g = self.setup(name)
            self._studies[key] = convergence_study(mesh, g, list(n_subs), method, threads, tree)
        return self._studies[key]


@pytest.fixture(scope="session")
def experiments():
    return Experiments()
