import numpy as np
import pytest

from enspace.components import RlcParams, LoadProfile
from enspace.simulator import Scenario, Trajectory, run
from enspace.presets import build_preset


PAPER = RlcParams()  # 10 mOhm, 1.12 mH, 6.8 mF


def make_trajectory(t, meta=None, **columns):
    """Synthetic trajectory: named columns, zeros elsewhere."""
    t = np.asarray(t, dtype=float)
    data = np.zeros((t.size, len(Trajectory.COLUMNS)))
    data[:, 0] = t
    for name, vals in columns.items():
        data[:, Trajectory.COLUMNS.index(name)] = np.broadcast_to(vals, t.shape)
    base = {"controller": "fblc", "gain_K": 100.0, "window_s": 1.0}
    base.update(meta or {})
    return Trajectory(data, base)


@pytest.fixture(scope="session")
def cpl_fblc_result():
    return run(build_preset("cpl-fblc").to_scenario())


@pytest.fixture(scope="session")
def cpl_smc_result():
    return run(build_preset("cpl-smc").to_scenario())


@pytest.fixture(scope="session")
def cpl_cg_result():
    return run(build_preset("cpl-constant-gain").to_scenario())


@pytest.fixture(scope="session")
def tv_results():
    out = {}
    for name in ("tv-fblc", "tv-smc", "tv-constant-gain", "tv-brayton-moser"):
        sc = build_preset(name).to_scenario()
        out[sc.controller] = (sc, run(sc))
    return out
