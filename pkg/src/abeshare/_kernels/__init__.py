"""Kernel backend selection.

Imports the compiled extension (``fastcore``) when it is available and falls
back to the pure-Python twin (``reference``) otherwise.  Set
``ABESHARE_BACKEND=reference`` or ``ABESHARE_BACKEND=fastcore`` to force a
choice; forcing ``fastcore`` raises if the extension is not built.

Both modules export the same names; ``tests/test_kernels.py`` pins them
against each other on random inputs.
"""

import importlib
import os

_FORCED = os.environ.get("ABESHARE_BACKEND", "").strip().lower()


def _load():
    if _FORCED == "reference":
        return importlib.import_module("abeshare._kernels.reference")
    if _FORCED == "fastcore":
        return importlib.import_module("abeshare._kernels.fastcore")
    if _FORCED:
        raise ImportError(f"unknown ABESHARE_BACKEND {_FORCED!r}")
    try:
        return importlib.import_module("abeshare._kernels.fastcore")
    except ImportError:
        return importlib.import_module("abeshare._kernels.reference")


kernel = _load()

BACKEND_NAME = kernel.BACKEND_NAME


def available_backends():
    names = ["reference"]
    try:
        importlib.import_module("abeshare._kernels.fastcore")
        names.append("fastcore")
    except ImportError:
        pass
    return names


def load_backend(name):
    """Import a specific kernel module (used by differential tests/benchmarks)."""
    if name not in ("reference", "fastcore"):
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(f"abeshare._kernels.{name}")
