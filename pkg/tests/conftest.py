"""Shared test data and independent oracles.

The oracles here deliberately re-derive results through different routes
than the library (full-matrix loop assembly, strip-and-repeat sorting,
rectangle decomposition) so agreement is meaningful.
"""

import numpy as np
import pytest

from focdes.fractional import FopidParams, controller_state_space, realize_controller
from focdes.lti_sim import LtiSystem
from focdes.plant import PlantConfig

# Published best-compromise controller rows: (case, family, area-1 params,
# area-2 params).  PID rows carry gains only (orders pinned at 1).
TABLE2 = {
    1: ("slow", (0.090, 0.297, 0.036, 0.869, 0.208), (0.036, 0.237, 0.036, 0.533, 0.585)),
    2: ("slow", (0.215, 0.230, 0.026, 0.573, 0.724), (0.160, 0.121, 0.068, 0.354, 0.612)),
    3: ("slow", (0.036, 0.388, 0.048, 0.928, 0.398), (0.000, 0.237, 0.135, 0.823, 0.660)),
    4: ("slow", (0.010, 0.484, 0.083, 0.570, 0.544), (0.090, 0.165, 0.140, 0.523, 0.715)),
    5: ("fast", (0.129, 0.397, 0.107, 1.014, 0.553), (0.244, 0.173, 0.139, 1.155, 0.745)),
    6: ("fast", (0.008, 0.100, 0.037, 1.055, 0.203), (0.034, 0.036, 0.014, 1.222, 0.699)),
    7: ("fast", (0.008, 0.100, 0.037, 1.055, 0.203), (0.034, 0.036, 0.014, 1.222, 0.699)),
    8: ("fast", (0.062, 0.329, 0.099, 1.048, 0.366), (0.078, 0.174, 0.216, 1.053, 0.502)),
    9: ("pid", (0.991, 0.570, 0.376), (0.485, 0.269, 0.800)),
    10: ("pid", (0.411, 0.375, 0.005), (0.316, 0.149, 0.042)),
    11: ("pid", (0.411, 0.375, 0.005), (0.316, 0.149, 0.042)),
    12: ("pid", (0.322, 0.250, 0.006), (0.300, 0.178, 0.052)),
}


def table2_params(case: int) -> tuple[FopidParams, FopidParams]:
    family, p1, p2 = TABLE2[case]
    if family == "pid":
        return (FopidParams(kp=p1[0], ki=p1[1], kd=p1[2], family="pid"),
                FopidParams(kp=p2[0], ki=p2[1], kd=p2[2], family="pid"))
    return (FopidParams(kp=p1[0], ki=p1[1], kd=p1[2], lam=p1[3], mu=p1[4], family=family),
            FopidParams(kp=p2[0], ki=p2[1], kd=p2[2], lam=p2[3], mu=p2[4], family=family))


def table2_controllers(case: int):
    p1, p2 = table2_params(case)
    return realize_controller(p1), realize_controller(p2)


def aggregate_linear_loop(config: PlantConfig, ctrl1, ctrl2):
    """Oracle: the whole linear closed loop as one state-space system.

    Wires the blocks by stuffing one big A matrix directly (a different
    route than the simulator's nested per-block evaluation).  Inputs are the
    two load disturbances; outputs [df1, df2, dptie, ace1, ace2, u1, u2].
    Only valid with dead-band and rate constraint disabled.
    """
    a1, b1, c1, d1 = controller_state_space(ctrl1)
    a2, b2, c2, d2 = controller_state_space(ctrl2)
    ar1, ar2 = config.area1, config.area2
    n1, n2 = a1.shape[0], a2.shape[0]
    base = n1 + n2
    ig1, ir1, it1, ip1 = base, base + 1, base + 2, base + 3
    ig2, ir2, it2, ip2 = base + 4, base + 5, base + 6, base + 7
    itie = base + 8
    nz = base + 9

    ace1 = np.zeros(nz)
    ace1[itie] = 1.0
    ace1[ip1] = ar1.b
    ace2 = np.zeros(nz)
    ace2[itie] = config.a12
    ace2[ip2] = ar2.b

    u1 = np.zeros(nz)
    u1[:n1] = -c1
    u1 -= d1 * ace1
    u2 = np.zeros(nz)
    u2[n1:base] = -c2
    u2 -= d2 * ace2

    A = np.zeros((nz, nz))
    B = np.zeros((nz, 2))
    A[:n1, :n1] = a1
    A[:n1, :] += np.outer(b1, ace1)
    A[n1:base, n1:base] = a2
    A[n1:base, :] += np.outer(b2, ace2)

    gin1 = u1.copy()
    gin1[ip1] -= 1.0 / ar1.r
    gin2 = u2.copy()
    gin2[ip2] -= 1.0 / ar2.r
    A[ig1] = gin1 / ar1.t_g
    A[ig1, ig1] += -1.0 / ar1.t_g
    A[ig2] = gin2 / ar2.t_g
    A[ig2, ig2] += -1.0 / ar2.t_g

    A[ir1, ig1] = 1.0 / ar1.t_r
    A[ir1, ir1] = -1.0 / ar1.t_r
    A[ir2, ig2] = 1.0 / ar2.t_r
    A[ir2, ir2] = -1.0 / ar2.t_r

    A[it1, ig1] = ar1.k_r / ar1.t_t
    A[it1, ir1] = (1.0 - ar1.k_r) / ar1.t_t
    A[it1, it1] = -1.0 / ar1.t_t
    A[it2, ig2] = ar2.k_r / ar2.t_t
    A[it2, ir2] = (1.0 - ar2.k_r) / ar2.t_t
    A[it2, it2] = -1.0 / ar2.t_t

    A[ip1, it1] = ar1.k_ps / ar1.t_ps
    A[ip1, itie] = -ar1.k_ps / ar1.t_ps
    A[ip1, ip1] = -1.0 / ar1.t_ps
    B[ip1, 0] = -ar1.k_ps / ar1.t_ps
    A[ip2, it2] = ar2.k_ps / ar2.t_ps
    A[ip2, itie] = -config.a12 * ar2.k_ps / ar2.t_ps
    A[ip2, ip2] = -1.0 / ar2.t_ps
    B[ip2, 1] = -ar2.k_ps / ar2.t_ps

    A[itie, ip1] = 2.0 * np.pi * config.t12
    A[itie, ip2] = -2.0 * np.pi * config.t12

    C = np.zeros((7, nz))
    C[0, ip1] = 1.0
    C[1, ip2] = 1.0
    C[2, itie] = 1.0
    C[3] = ace1
    C[4] = ace2
    C[5] = u1
    C[6] = u2
    return LtiSystem(A, B, C, np.zeros((7, 2)))


def strip_sort_oracle(objectives) -> list[list[int]]:
    """Brute force: repeatedly remove the mutually non-dominated subset."""
    objs = np.asarray(objectives, dtype=float)
    remaining = list(range(objs.shape[0]))
    fronts = []
    while remaining:
        sub = objs[remaining]
        le = np.all(sub[:, None, :] <= sub[None, :, :], axis=2)
        ge = np.all(sub[:, None, :] >= sub[None, :, :], axis=2)
        dominated = ((le & ~ge).any(axis=0))
        front = [remaining[i] for i in range(len(remaining)) if not dominated[i]]
        fronts.append(front)
        remaining = [remaining[i] for i in range(len(remaining)) if dominated[i]]
    return fronts


def hv_rectangle_oracle(points) -> float:
    """Exact dominated-from-below area by vertical strip decomposition.

    Dominated members are removed first (their rectangles extend beyond the
    front and are not part of the region between the front and the origin),
    then the union of the remaining rectangles is summed strip by strip.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    keep = []
    for i in range(pts.shape[0]):
        others = np.delete(pts, i, axis=0)
        dominated = np.any(np.all(others <= pts[i], axis=1)
                           & np.any(others < pts[i], axis=1))
        if not dominated:
            keep.append(pts[i])
    pts = np.array(keep)
    xs = np.unique(np.concatenate([[0.0], pts[:, 0]]))
    total = 0.0
    for a, b in zip(xs[:-1], xs[1:]):
        covering = pts[pts[:, 0] >= b]
        if covering.size:
            total += (b - a) * covering[:, 1].max()
    return total


@pytest.fixture(scope="session")
def jit_warmup():
    """Compile the simulation kernel outside any timed section."""
    from focdes import FopidParams, nominal_config, realize_controller, simulate
    from focdes.lti_sim import SolverConfig
    from dataclasses import replace
    cfg = replace(nominal_config(), solver=SolverConfig(0.01, 0.1))
    zero = FopidParams(kp=0.0, ki=0.0, kd=0.0, family="pid")
    simulate(cfg, realize_controller(zero), realize_controller(zero))
    return True
