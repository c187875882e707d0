"""Shared fixtures: bundled example models and a small mutable model document."""

import copy
import pathlib

import pytest

MODELS_DIR = pathlib.Path(__file__).resolve().parent.parent / "models"

# A minimal but complete document: one component with one seff, one instance,
# one container, one scenario that calls through and collects the result.
# Tests deep-copy it and break exactly one thing at a time.
_MINIMAL = {
    "dictionary": {"labelTypes": [{"name": "Color", "values": ["Red", "Blue"]}]},
    "components": [
        {
            "id": "comp.a",
            "name": "Alpha",
            "labels": ["Color.Red"],
            "signatures": [{"id": "svc", "name": "serve", "parameters": ["p"]}],
            "seffs": {
                "svc": [
                    {"type": "variable", "id": "s0",
                     "assignments": ["out.Color.Blue := p.Color.Red"]},
                    {"type": "return", "id": "s1",
                     "assignments": ["RETURN.Color.Blue := out.Color.Blue"]},
                ]
            },
        }
    ],
    "assembly": {
        "instances": [{"id": "inst.a", "component": "comp.a"}],
        "connectors": [],
    },
    "deployment": {
        "containers": [{"id": "host", "name": "Host", "labels": ["Color.Blue"]}],
        "allocations": {"inst.a": "host"},
    },
    "usageScenarios": [
        {
            "id": "scn",
            "name": "walk",
            "userLabels": ["Color.Red"],
            "actions": [
                {"type": "variable", "id": "u0",
                 "assignments": ["v.Color.Red := TRUE"]},
                {"type": "call", "id": "u1", "instance": "inst.a",
                 "signature": "svc", "bindings": {"p": "v"}, "result": "got"},
            ],
        }
    ],
}


def minimal_model_data():
    return copy.deepcopy(_MINIMAL)


@pytest.fixture
def model_data():
    """Fresh deep copy of the minimal document, safe to mutate."""
    return minimal_model_data()


@pytest.fixture(scope="session")
def models_dir():
    return MODELS_DIR


@pytest.fixture(scope="session")
def shop_path(models_dir):
    return models_dir / "online_shop.json"


@pytest.fixture(scope="session")
def shop_no_encrypt_path(models_dir):
    return models_dir / "online_shop_no_encrypt.json"


@pytest.fixture(scope="session")
def geo_constraints_path(models_dir):
    return models_dir / "geo.constraints"
