import pytest

from crnlift import models
from crnlift.kinetics import mass_action_model, model_from_network


@pytest.fixture
def schlogl_model():
    return model_from_network(models.schlogl())


@pytest.fixture
def lotka_model():
    return mass_action_model(models.lotka(), [1.0, 1.0, 1.0])


@pytest.fixture
def brusselator_model():
    return mass_action_model(models.brusselator(), [1.0, 1.0, 3.0, 1.0])
