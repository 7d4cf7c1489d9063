import numpy as np
import pytest

from nkslab import adaptation as ad
from nkslab import engine
from nkslab.schedule import SwitchingSequence


@pytest.fixture
def gentle_schedule():
    return SwitchingSequence(instants=np.array([0.0, 1e-4, 2e-4, 3e-4, 4e-4]))


@pytest.fixture
def gentle_config(gentle_schedule):
    """Mild destabilization, short horizon: fast on either backend.

    dt is set by the fourth-derivative stiffness (the explicit guard needs
    dt below ~1.1e-7 at 10 nodes per half interval)."""
    return engine.ExperimentConfig(
        mode=engine.INTERMITTENT_GES,
        Y=0.5, n_per_subdomain=10, c=0.4,
        dt=1e-7, t_final=4e-4,
        lambda_spec=engine.LambdaSpec(kind="constant", value=5.0),
        forcing_spec=engine.ForcingSpec(kind="zero"),
        amplitude_A=1.0,
        schedule=gentle_schedule,
        adaptation=ad.AdaptationConfig(variant=ad.GES_ALG1, sigma=100.0),
        snapshot_stride=500,
        output_stride=10,
    )
