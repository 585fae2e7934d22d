"""Pure-Python SE(3) and projection kernels.

Mirror of ``_ckernels.pyx``; both must stay numerically equivalent. Poses are
flat 6-sequences ``(x, y, z, alpha, beta, gamma)`` with angles in degrees and
rotation ``R = Rz(gamma) @ Ry(beta) @ Rx(alpha)``. Rotations are row-major
9-tuples.
"""

import math

DEG = math.pi / 180.0
RAD = 180.0 / math.pi
# |beta| within 1e-7 deg of 90 deg
GIMBAL_EPS = math.sin(1e-7 * DEG)

SADDLE = 0
WAVE = 1


def wrap_deg(a):
    """Wrap an angle in degrees to (-180, 180]."""
    # remainder is exact, so the result never leaves [-180, 180]
    w = math.remainder(a, 360.0)
    if w == -180.0:
        w = 180.0
    return w


def euler_to_rot(alpha, beta, gamma):
    a = alpha * DEG
    b = beta * DEG
    g = gamma * DEG
    ca = math.cos(a)
    sa = math.sin(a)
    cb = math.cos(b)
    sb = math.sin(b)
    cg = math.cos(g)
    sg = math.sin(g)
    return (
        cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg,
        cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg,
        -sb, sa * cb, ca * cb,
    )


def rot_to_euler(r):
    r00, r01, r02, r10, r11, r12, r20, r21, r22 = r
    cb = math.sqrt(r00 * r00 + r10 * r10)
    if cb < GIMBAL_EPS:
        alpha = 0.0
        beta = 90.0 if r20 < 0.0 else -90.0
        gamma = math.atan2(-r01, r11) * RAD
    else:
        alpha = math.atan2(r21, r22) * RAD
        beta = math.atan2(-r20, cb) * RAD
        gamma = math.atan2(r10, r00) * RAD
    return wrap_deg(alpha), wrap_deg(beta), wrap_deg(gamma)


def _matmul(a, b):
    a00, a01, a02, a10, a11, a12, a20, a21, a22 = a
    b00, b01, b02, b10, b11, b12, b20, b21, b22 = b
    return (
        a00 * b00 + a01 * b10 + a02 * b20,
        a00 * b01 + a01 * b11 + a02 * b21,
        a00 * b02 + a01 * b12 + a02 * b22,
        a10 * b00 + a11 * b10 + a12 * b20,
        a10 * b01 + a11 * b11 + a12 * b21,
        a10 * b02 + a11 * b12 + a12 * b22,
        a20 * b00 + a21 * b10 + a22 * b20,
        a20 * b01 + a21 * b11 + a22 * b21,
        a20 * b02 + a21 * b12 + a22 * b22,
    )


def _tmatmul(a, b):
    # a^T @ b
    a00, a01, a02, a10, a11, a12, a20, a21, a22 = a
    b00, b01, b02, b10, b11, b12, b20, b21, b22 = b
    return (
        a00 * b00 + a10 * b10 + a20 * b20,
        a00 * b01 + a10 * b11 + a20 * b21,
        a00 * b02 + a10 * b12 + a20 * b22,
        a01 * b00 + a11 * b10 + a21 * b20,
        a01 * b01 + a11 * b11 + a21 * b21,
        a01 * b02 + a11 * b12 + a21 * b22,
        a02 * b00 + a12 * b10 + a22 * b20,
        a02 * b01 + a12 * b11 + a22 * b21,
        a02 * b02 + a12 * b12 + a22 * b22,
    )


def compose(p, q):
    ra = euler_to_rot(p[3], p[4], p[5])
    rb = euler_to_rot(q[3], q[4], q[5])
    qx, qy, qz = q[0], q[1], q[2]
    x = ra[0] * qx + ra[1] * qy + ra[2] * qz + p[0]
    y = ra[3] * qx + ra[4] * qy + ra[5] * qz + p[1]
    z = ra[6] * qx + ra[7] * qy + ra[8] * qz + p[2]
    a, b, g = rot_to_euler(_matmul(ra, rb))
    return (x, y, z, a, b, g)


def inverse(p):
    r = euler_to_rot(p[3], p[4], p[5])
    px, py, pz = p[0], p[1], p[2]
    x = -(r[0] * px + r[3] * py + r[6] * pz)
    y = -(r[1] * px + r[4] * py + r[7] * pz)
    z = -(r[2] * px + r[5] * py + r[8] * pz)
    rt = (r[0], r[3], r[6], r[1], r[4], r[7], r[2], r[5], r[8])
    a, b, g = rot_to_euler(rt)
    return (x, y, z, a, b, g)


def relative(p, q):
    """inverse(p) composed with q, without forming the inverse explicitly."""
    ra = euler_to_rot(p[3], p[4], p[5])
    rb = euler_to_rot(q[3], q[4], q[5])
    dx = q[0] - p[0]
    dy = q[1] - p[1]
    dz = q[2] - p[2]
    x = ra[0] * dx + ra[3] * dy + ra[6] * dz
    y = ra[1] * dx + ra[4] * dy + ra[7] * dz
    z = ra[2] * dx + ra[5] * dy + ra[8] * dz
    a, b, g = rot_to_euler(_tmatmul(ra, rb))
    return (x, y, z, a, b, g)


def height(kind, c0, c1, u, v):
    """Height z = f(u, v) with first and second derivatives.

    Returns ``(f, fu, fv, fuu, fuv, fvv)``. Saddle: ``f = (u^2 - v^2) / c0``.
    Wave: ``f = c0 * sin(2 pi u / c1)``.
    """
    if kind == SADDLE:
        return ((u * u - v * v) / c0, 2.0 * u / c0, -2.0 * v / c0,
                2.0 / c0, 0.0, -2.0 / c0)
    k = 2.0 * math.pi / c1
    s = math.sin(k * u)
    c = math.cos(k * u)
    return (c0 * s, c0 * k * c, 0.0, -c0 * k * k * s, 0.0, 0.0)


def _sqdist(kind, c0, c1, u, v, px, py, pz):
    f = height(kind, c0, c1, u, v)[0]
    return (u - px) ** 2 + (v - py) ** 2 + (f - pz) ** 2


def project_heightfield(kind, c0, c1, px, py, pz, grid, tol, max_iter):
    """Closest point on the graph of a height function.

    A ``grid x grid`` scan over the disk that must contain the answer seeds a
    damped Newton solve on the squared distance. Returns ``(u, v, iters)``
    with ``iters = -1`` on non-convergence.
    """
    f0 = height(kind, c0, c1, px, py)[0]
    rho = abs(pz - f0)
    u = px
    v = py
    best = rho * rho
    if grid > 1 and rho > 0.0:
        h = 2.0 * rho / (grid - 1)
        for i in range(grid):
            uu = px - rho + i * h
            for j in range(grid):
                vv = py - rho + j * h
                d = _sqdist(kind, c0, c1, uu, vv, px, py, pz)
                if d < best:
                    best = d
                    u = uu
                    v = vv
    for it in range(max_iter):
        f, fu, fv, fuu, fuv, fvv = height(kind, c0, c1, u, v)
        r = f - pz
        gu = (u - px) + r * fu
        gv = (v - py) + r * fv
        huu = 1.0 + fu * fu + r * fuu
        huv = fu * fv + r * fuv
        hvv = 1.0 + fv * fv + r * fvv
        det = huu * hvv - huv * huv
        if huu <= 0.0 or det <= 0.0:
            # Gauss-Newton fallback is always positive definite
            huu = 1.0 + fu * fu
            huv = fu * fv
            hvv = 1.0 + fv * fv
            det = huu * hvv - huv * huv
        du = -(hvv * gu - huv * gv) / det
        dv = -(huu * gv - huv * gu) / det
        cur = (u - px) ** 2 + (v - py) ** 2 + r * r
        step = 1.0
        while step > 1e-6:
            un = u + step * du
            vn = v + step * dv
            if _sqdist(kind, c0, c1, un, vn, px, py, pz) <= cur + 1e-15 * (1.0 + cur):
                break
            step *= 0.5
        u = u + step * du
        v = v + step * dv
        if abs(step * du) + abs(step * dv) < tol:
            return u, v, it + 1
    return u, v, -1
