"""JIT-compiled inner loop of the two-area closed-loop simulation.

The evolutionary protocol runs tens of thousands of 10^4-step simulations,
which rules out a pure-Python integrator.  Everything numba sees is a flat
float64 array; `plant.simulate` owns the packing.

Parameter vector layout (index / meaning):
    0 t_g1   1 t_t1   2 t_r1   3 k_r1   4 k_ps1  5 t_ps1  6 r1  7 b1
    8 dead_band_half1   9 grc_delta1 (<= 0 means disabled)
    10..19 same fields for area 2
    20 2*pi*t12   21 a12

State vector layout: [ctrl1 states | ctrl2 states | gov1 reh1 turb1 ps1
gov2 reh2 turb2 ps2 tie].  When the GRC is enabled the turbine state is
frozen during the RK4 stages and advanced afterwards by one forward-Euler
step of the clamped lag rate.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _dead_zone(x, half):
    if abs(x) <= half:
        return 0.0
    if x > 0.0:
        return x - half
    return x + half


@njit(cache=True)
def _rhs(z, dz, a1, b1, c1, d1, a2, b2, c2, d2, p, l1, l2):
    n1 = a1.shape[0]
    n2 = a2.shape[0]
    base = n1 + n2
    ig1, ir1, it1, ip1 = base, base + 1, base + 2, base + 3
    ig2, ir2, it2, ip2 = base + 4, base + 5, base + 6, base + 7
    itie = base + 8

    ptie = z[itie]
    df1 = z[ip1]
    df2 = z[ip2]
    ace1 = ptie + p[7] * df1
    ace2 = p[21] * ptie + p[17] * df2

    y1 = d1 * ace1
    for i in range(n1):
        y1 += c1[i] * z[i]
    y2 = d2 * ace2
    for i in range(n2):
        y2 += c2[i] * z[n1 + i]
    u1 = -y1
    u2 = -y2

    for i in range(n1):
        acc = b1[i] * ace1
        for j in range(n1):
            acc += a1[i, j] * z[j]
        dz[i] = acc
    for i in range(n2):
        acc = b2[i] * ace2
        for j in range(n2):
            acc += a2[i, j] * z[n1 + j]
        dz[n1 + i] = acc

    gin1 = _dead_zone(u1 - df1 / p[6], p[8])
    gin2 = _dead_zone(u2 - df2 / p[16], p[18])
    dz[ig1] = (gin1 - z[ig1]) / p[0]
    dz[ig2] = (gin2 - z[ig2]) / p[10]
    dz[ir1] = (z[ig1] - z[ir1]) / p[2]
    dz[ir2] = (z[ig2] - z[ir2]) / p[12]

    tin1 = p[3] * z[ig1] + (1.0 - p[3]) * z[ir1]
    tin2 = p[13] * z[ig2] + (1.0 - p[13]) * z[ir2]
    if p[9] > 0.0:
        dz[it1] = 0.0
    else:
        dz[it1] = (tin1 - z[it1]) / p[1]
    if p[19] > 0.0:
        dz[it2] = 0.0
    else:
        dz[it2] = (tin2 - z[it2]) / p[11]

    dz[ip1] = (p[4] * (z[it1] - l1 - ptie) - z[ip1]) / p[5]
    dz[ip2] = (p[14] * (z[it2] - l2 - p[21] * ptie) - z[ip2]) / p[15]
    dz[itie] = p[20] * (df1 - df2)


@njit(cache=True)
def _record(k, z, n1, n2, p, c1, d1, c2, d2,
            df1o, df2o, ptieo, ace1o, ace2o, u1o, u2o):
    base = n1 + n2
    ptie = z[base + 8]
    df1 = z[base + 3]
    df2 = z[base + 7]
    ace1 = ptie + p[7] * df1
    ace2 = p[21] * ptie + p[17] * df2
    y1 = d1 * ace1
    for i in range(n1):
        y1 += c1[i] * z[i]
    y2 = d2 * ace2
    for i in range(n2):
        y2 += c2[i] * z[n1 + i]
    df1o[k] = df1
    df2o[k] = df2
    ptieo[k] = ptie
    ace1o[k] = ace1
    ace2o[k] = ace2
    u1o[k] = -y1
    u2o[k] = -y2


@njit(cache=True)
def simulate_kernel(h, n_steps, a1, b1, c1, d1, a2, b2, c2, d2, p,
                    loads1, loads2,
                    df1o, df2o, ptieo, ace1o, ace2o, u1o, u2o):
    """Integrate the closed loop; returns -1 or the index of the diverged sample."""
    n1 = a1.shape[0]
    n2 = a2.shape[0]
    base = n1 + n2
    nz = base + 9
    ig1, ir1, it1 = base, base + 1, base + 2
    ig2, ir2, it2 = base + 4, base + 5, base + 6
    grc1 = p[9]
    grc2 = p[19]

    z = np.zeros(nz)
    zs = np.empty(nz)
    k1 = np.empty(nz)
    k2 = np.empty(nz)
    k3 = np.empty(nz)
    k4 = np.empty(nz)

    _record(0, z, n1, n2, p, c1, d1, c2, d2,
            df1o, df2o, ptieo, ace1o, ace2o, u1o, u2o)

    for step in range(n_steps):
        l1 = loads1[step]
        l2 = loads2[step]

        dturb1 = 0.0
        dturb2 = 0.0
        if grc1 > 0.0:
            tin1 = p[3] * z[ig1] + (1.0 - p[3]) * z[ir1]
            rate = (tin1 - z[it1]) / p[1]
            if rate > grc1:
                rate = grc1
            elif rate < -grc1:
                rate = -grc1
            dturb1 = h * rate
        if grc2 > 0.0:
            tin2 = p[13] * z[ig2] + (1.0 - p[13]) * z[ir2]
            rate = (tin2 - z[it2]) / p[11]
            if rate > grc2:
                rate = grc2
            elif rate < -grc2:
                rate = -grc2
            dturb2 = h * rate

        _rhs(z, k1, a1, b1, c1, d1, a2, b2, c2, d2, p, l1, l2)
        for i in range(nz):
            zs[i] = z[i] + 0.5 * h * k1[i]
        _rhs(zs, k2, a1, b1, c1, d1, a2, b2, c2, d2, p, l1, l2)
        for i in range(nz):
            zs[i] = z[i] + 0.5 * h * k2[i]
        _rhs(zs, k3, a1, b1, c1, d1, a2, b2, c2, d2, p, l1, l2)
        for i in range(nz):
            zs[i] = z[i] + h * k3[i]
        _rhs(zs, k4, a1, b1, c1, d1, a2, b2, c2, d2, p, l1, l2)
        for i in range(nz):
            z[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

        if grc1 > 0.0:
            z[it1] += dturb1
        if grc2 > 0.0:
            z[it2] += dturb2

        for i in range(nz):
            if not np.isfinite(z[i]):
                return step + 1

        _record(step + 1, z, n1, n2, p, c1, d1, c2, d2,
                df1o, df2o, ptieo, ace1o, ace2o, u1o, u2o)

    return -1
