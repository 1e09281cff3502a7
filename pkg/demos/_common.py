"""Shared output location for the demo scripts."""

import os

OUT = os.environ.get("DMFPO_DEMO_OUT", os.path.join(os.path.dirname(__file__), "output"))
os.makedirs(OUT, exist_ok=True)


def out(name):
    return os.path.join(OUT, name)
