import os
import sys

import pytest

# mprlab is imported from the checkout, not an installed copy
ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

MPRLAB_ENV = ("MPRLAB_THREADS", "MPRLAB_LOG_LEVEL", "MPRLAB_LOG_FILE")


@pytest.fixture(autouse=True)
def clean_mprlab_env(monkeypatch):
    """Tests see library defaults regardless of the caller's shell."""
    for name in MPRLAB_ENV:
        monkeypatch.delenv(name, raising=False)
