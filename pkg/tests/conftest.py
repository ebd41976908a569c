import pytest

from ddcontrol.behavioral import Trajectory
from ddcontrol.controller import Controller, ControllerConfig
from ddcontrol.plant import PlantModel, collect_offline_data


@pytest.fixture(scope="session")
def siso_model():
    """Reference scalar plant: x+ = 0.5x + u, y = x (steady states y = 2u)."""
    return PlantModel([[0.5]], [[1.0]], [[1.0]], [[0.0]])


@pytest.fixture(scope="session")
def siso_data(siso_model) -> Trajectory:
    # excitation order covers n = 1 with horizons up to mu = 2
    return collect_offline_data(siso_model, 60, pe_order=6, seed=3)


@pytest.fixture()
def siso_controller(siso_data):
    cfg = ControllerConfig(gamma=0.15, mu=2, n=1, q_mode="identity")
    return Controller(cfg, siso_data, check_identities=True)
