"""Shared fixtures: the long closed-loop runs are executed once per session."""

import time

import pytest

from nrpursuit.scenarios import (
    agnostic_scenario,
    single_adversarial_scenario,
    two_pursuer_scenario,
)
from nrpursuit.sim import run_scenario

import math


def _timed_run(cfg):
    start = time.perf_counter()
    trace, summary = run_scenario(cfg)
    elapsed = time.perf_counter() - start
    return {"cfg": cfg, "trace": trace, "summary": summary, "runtime": elapsed}


@pytest.fixture(scope="session")
def agnostic_loose():
    return _timed_run(agnostic_scenario(u_max=math.pi / 2))


@pytest.fixture(scope="session")
def agnostic_tight():
    return _timed_run(agnostic_scenario(u_max=2 * math.pi))


@pytest.fixture(scope="session")
def adversarial_run():
    return _timed_run(single_adversarial_scenario())


@pytest.fixture(scope="session")
def cooperative_run():
    return _timed_run(two_pursuer_scenario(learning=False))


@pytest.fixture(scope="session")
def learning_run():
    return _timed_run(two_pursuer_scenario(learning=True))
