"""Shared fixtures.

The trainer and the spline solvers run through compiled kernels; the
session fixture below touches each one once so compilation happens before
any timed test, and the on-disk cache keeps later sessions warm.
"""

import numpy as np
import pytest

from adaptix import network as net
from adaptix import targets as tg
from adaptix import trendfilter as tf


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    data = tg.make_dataset(tg.inhomogeneous_1d(), 8, 0.1, 0, "grid")
    net.train(data, net.TrainConfig(width=2, max_iters=3, restarts=1))
    tf.fit_trend(data, 0.5)
    tf.fit_trend(data, 0.0, knot_grid=np.array([-0.3, 0.4]), max_sweeps=8)
    tf.lambda_max(data)
