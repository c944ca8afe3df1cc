import json
import pathlib

import numpy as np

from safd import build_model, load_model
from safd.types import WeightedModel

DATA = pathlib.Path(__file__).parent / "data"

FIXTURES: tuple[str, ...] = (
    "cantor",
    "mcmullen",
    "example_ab",
    "remark13",
    "swapped",
    "overlap",
    "homogeneous3",
)

MODELS: dict[str, WeightedModel] = {name: load_model(name) for name in FIXTURES}


def load_data(name: str) -> dict:
    with open(DATA / f"{name}.json", "r", encoding="utf-8") as f:
        return json.load(f)


def random_model(
    rng: np.random.Generator, d: int, m: int, signs: bool = True
) -> WeightedModel:
    """A float-mode model with rates in [0.2, 0.8] (random signs), offsets in [0, 1] and Dirichlet weights."""
    rates = rng.uniform(0.2, 0.8, size=(m, d))
    if signs:
        rates *= rng.choice((-1.0, 1.0), size=(m, d))
    offsets = rng.uniform(0.0, 1.0, size=(m, d))
    return build_model(
        {
            "maps": [
                {"r": rates[i].tolist(), "t": offsets[i].tolist()} for i in range(m)
            ],
            "p": rng.dirichlet(np.ones(m)).tolist(),
        },
        exact=False,
        name="random",
    )
