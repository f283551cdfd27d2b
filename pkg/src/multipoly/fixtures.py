"""Named reference instances, shipped as JSON under ``fixtures/``.

Run ``python -m multipoly.fixtures`` to regenerate the files.
"""

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .polymap import from_dict as poly_from_dict
from .polymap import id_multipolynomial
from .polymap import to_dict as poly_to_dict
from .tensor_core import BlockShape, MultilinearMap
from .tensor_core import to_dict as tensor_to_dict

FIXTURE_NAMES = (
    "example1_block_symmetric",
    "example2_block_not_fully_symmetric",
    "id_1_1",
    "id_2_2",
    "cauchy_schwarz_summing",
)


def example1():
    """``T(x, y, a, b) = x y a b`` on ``R^1`` blocks of degree (2, 2)."""
    shape = BlockShape((2, 2), (1, 1), 1)
    return MultilinearMap(shape, [1.0])


def example2():
    """``T((x, y), (z, w), (a, b), (c, d)) = x z b d`` on ``R^2`` blocks of degree (2, 2)."""
    shape = BlockShape((2, 2), (2, 2), 1)
    array = np.zeros(shape.array_shape)
    array[0, 0, 1, 1, 0] = 1.0
    return MultilinearMap.from_array(shape, array)


def build():
    """Fixture payloads keyed by name."""
    id11 = poly_to_dict(id_multipolynomial((1, 1)))
    return {
        "example1_block_symmetric": tensor_to_dict(example1()),
        "example2_block_not_fully_symmetric": tensor_to_dict(example2()),
        "id_1_1": id11,
        "id_2_2": poly_to_dict(id_multipolynomial((2, 2))),
        "cauchy_schwarz_summing": {
            "tensor": id11,
            "classes": "lp:2,lp:2->lp:1",
            "anchor_mode": "origin",
            "expected_c": 1.0,
        },
    }


def path(name):
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}")
    return resources.files("multipoly") / "fixtures" / f"{name}.json"


def load_json(name):
    return json.loads(path(name).read_text())


def load(name):
    """Load a tensor fixture as a :class:`Multipolynomial`."""
    data = load_json(name)
    return poly_from_dict(data.get("tensor", data))


def write_all(directory=None):
    directory = Path(directory or Path(__file__).parent / "fixtures")
    directory.mkdir(parents=True, exist_ok=True)
    for name, payload in build().items():
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
        (directory / f"{name}.json").write_text(text)


if __name__ == "__main__":
    write_all()
