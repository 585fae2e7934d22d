# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SE(3) and projection kernels.

Must stay numerically equivalent to ``_pykernels.py``.
"""

from libc.math cimport sin, cos, atan2, sqrt, fabs, remainder, M_PI

cdef double DEG = M_PI / 180.0
cdef double RAD = 180.0 / M_PI
cdef double GIMBAL_EPS = sin(1e-7 * M_PI / 180.0)

SADDLE = 0
WAVE = 1


cdef inline double _wrap(double a) nogil:
    # remainder is exact, so the result never leaves [-180, 180]
    cdef double w = remainder(a, 360.0)
    if w == -180.0:
        w = 180.0
    return w


cdef inline void _euler_to_rot(double alpha, double beta, double gamma, double* r) nogil:
    cdef double a = alpha * DEG, b = beta * DEG, g = gamma * DEG
    cdef double ca = cos(a), sa = sin(a), cb = cos(b), sb = sin(b), cg = cos(g), sg = sin(g)
    r[0] = cb * cg
    r[1] = sa * sb * cg - ca * sg
    r[2] = ca * sb * cg + sa * sg
    r[3] = cb * sg
    r[4] = sa * sb * sg + ca * cg
    r[5] = ca * sb * sg - sa * cg
    r[6] = -sb
    r[7] = sa * cb
    r[8] = ca * cb


cdef inline void _rot_to_euler(const double* r, double* out) nogil:
    cdef double cb = sqrt(r[0] * r[0] + r[3] * r[3])
    if cb < GIMBAL_EPS:
        out[0] = 0.0
        out[1] = 90.0 if r[6] < 0.0 else -90.0
        out[2] = atan2(-r[1], r[4]) * RAD
    else:
        out[0] = atan2(r[7], r[8]) * RAD
        out[1] = atan2(-r[6], cb) * RAD
        out[2] = atan2(r[3], r[0]) * RAD
    out[0] = _wrap(out[0])
    out[1] = _wrap(out[1])
    out[2] = _wrap(out[2])


cdef inline void _matmul(const double* a, const double* b, double* c) nogil:
    c[0] = a[0] * b[0] + a[1] * b[3] + a[2] * b[6]
    c[1] = a[0] * b[1] + a[1] * b[4] + a[2] * b[7]
    c[2] = a[0] * b[2] + a[1] * b[5] + a[2] * b[8]
    c[3] = a[3] * b[0] + a[4] * b[3] + a[5] * b[6]
    c[4] = a[3] * b[1] + a[4] * b[4] + a[5] * b[7]
    c[5] = a[3] * b[2] + a[4] * b[5] + a[5] * b[8]
    c[6] = a[6] * b[0] + a[7] * b[3] + a[8] * b[6]
    c[7] = a[6] * b[1] + a[7] * b[4] + a[8] * b[7]
    c[8] = a[6] * b[2] + a[7] * b[5] + a[8] * b[8]


cdef inline void _tmatmul(const double* a, const double* b, double* c) nogil:
    c[0] = a[0] * b[0] + a[3] * b[3] + a[6] * b[6]
    c[1] = a[0] * b[1] + a[3] * b[4] + a[6] * b[7]
    c[2] = a[0] * b[2] + a[3] * b[5] + a[6] * b[8]
    c[3] = a[1] * b[0] + a[4] * b[3] + a[7] * b[6]
    c[4] = a[1] * b[1] + a[4] * b[4] + a[7] * b[7]
    c[5] = a[1] * b[2] + a[4] * b[5] + a[7] * b[8]
    c[6] = a[2] * b[0] + a[5] * b[3] + a[8] * b[6]
    c[7] = a[2] * b[1] + a[5] * b[4] + a[8] * b[7]
    c[8] = a[2] * b[2] + a[5] * b[5] + a[8] * b[8]


def wrap_deg(double a):
    """Wrap an angle in degrees to (-180, 180]."""
    return _wrap(a)


def euler_to_rot(double alpha, double beta, double gamma):
    cdef double r[9]
    _euler_to_rot(alpha, beta, gamma, r)
    return (r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8])


def rot_to_euler(r):
    cdef double m[9]
    cdef double out[3]
    cdef int i
    for i in range(9):
        m[i] = r[i]
    _rot_to_euler(m, out)
    return (out[0], out[1], out[2])


def compose(p, q):
    cdef double px = p[0], py = p[1], pz = p[2], pa = p[3], pb = p[4], pg = p[5]
    cdef double qx = q[0], qy = q[1], qz = q[2], qa = q[3], qb = q[4], qg = q[5]
    cdef double ra[9]
    cdef double rb[9]
    cdef double rc[9]
    cdef double e[3]
    _euler_to_rot(pa, pb, pg, ra)
    _euler_to_rot(qa, qb, qg, rb)
    cdef double x = ra[0] * qx + ra[1] * qy + ra[2] * qz + px
    cdef double y = ra[3] * qx + ra[4] * qy + ra[5] * qz + py
    cdef double z = ra[6] * qx + ra[7] * qy + ra[8] * qz + pz
    _matmul(ra, rb, rc)
    _rot_to_euler(rc, e)
    return (x, y, z, e[0], e[1], e[2])


def inverse(p):
    cdef double px = p[0], py = p[1], pz = p[2]
    cdef double r[9]
    cdef double rt[9]
    cdef double e[3]
    _euler_to_rot(p[3], p[4], p[5], r)
    cdef double x = -(r[0] * px + r[3] * py + r[6] * pz)
    cdef double y = -(r[1] * px + r[4] * py + r[7] * pz)
    cdef double z = -(r[2] * px + r[5] * py + r[8] * pz)
    rt[0] = r[0]; rt[1] = r[3]; rt[2] = r[6]
    rt[3] = r[1]; rt[4] = r[4]; rt[5] = r[7]
    rt[6] = r[2]; rt[7] = r[5]; rt[8] = r[8]
    _rot_to_euler(rt, e)
    return (x, y, z, e[0], e[1], e[2])


def relative(p, q):
    """inverse(p) composed with q, without forming the inverse explicitly."""
    cdef double ra[9]
    cdef double rb[9]
    cdef double rc[9]
    cdef double e[3]
    _euler_to_rot(p[3], p[4], p[5], ra)
    _euler_to_rot(q[3], q[4], q[5], rb)
    cdef double dx = q[0] - p[0]
    cdef double dy = q[1] - p[1]
    cdef double dz = q[2] - p[2]
    cdef double x = ra[0] * dx + ra[3] * dy + ra[6] * dz
    cdef double y = ra[1] * dx + ra[4] * dy + ra[7] * dz
    cdef double z = ra[2] * dx + ra[5] * dy + ra[8] * dz
    _tmatmul(ra, rb, rc)
    _rot_to_euler(rc, e)
    return (x, y, z, e[0], e[1], e[2])


cdef inline void _height(int kind, double c0, double c1, double u, double v, double* h) nogil:
    cdef double k, s, c
    if kind == 0:
        h[0] = (u * u - v * v) / c0
        h[1] = 2.0 * u / c0
        h[2] = -2.0 * v / c0
        h[3] = 2.0 / c0
        h[4] = 0.0
        h[5] = -2.0 / c0
    else:
        k = 2.0 * M_PI / c1
        s = sin(k * u)
        c = cos(k * u)
        h[0] = c0 * s
        h[1] = c0 * k * c
        h[2] = 0.0
        h[3] = -c0 * k * k * s
        h[4] = 0.0
        h[5] = 0.0


def height(int kind, double c0, double c1, double u, double v):
    """Height z = f(u, v) with first and second derivatives."""
    cdef double h[6]
    _height(kind, c0, c1, u, v, h)
    return (h[0], h[1], h[2], h[3], h[4], h[5])


cdef inline double _sqdist(int kind, double c0, double c1, double u, double v,
                           double px, double py, double pz) nogil:
    cdef double h[6]
    _height(kind, c0, c1, u, v, h)
    return (u - px) * (u - px) + (v - py) * (v - py) + (h[0] - pz) * (h[0] - pz)


def project_heightfield(int kind, double c0, double c1, double px, double py, double pz,
                        int grid, double tol, int max_iter):
    """Closest point on the graph of a height function; see the Python twin."""
    cdef double h[6]
    cdef double f0, rho, u, v, best, hh, uu, vv, d
    cdef double f, fu, fv, fuu, fuv, fvv, r, gu, gv, huu, huv, hvv, det, du, dv, cur, step, un, vn
    cdef int i, j, it
    _height(kind, c0, c1, px, py, h)
    f0 = h[0]
    rho = fabs(pz - f0)
    u = px
    v = py
    best = rho * rho
    if grid > 1 and rho > 0.0:
        hh = 2.0 * rho / (grid - 1)
        for i in range(grid):
            uu = px - rho + i * hh
            for j in range(grid):
                vv = py - rho + j * hh
                d = _sqdist(kind, c0, c1, uu, vv, px, py, pz)
                if d < best:
                    best = d
                    u = uu
                    v = vv
    for it in range(max_iter):
        _height(kind, c0, c1, u, v, h)
        f = h[0]; fu = h[1]; fv = h[2]; fuu = h[3]; fuv = h[4]; fvv = h[5]
        r = f - pz
        gu = (u - px) + r * fu
        gv = (v - py) + r * fv
        huu = 1.0 + fu * fu + r * fuu
        huv = fu * fv + r * fuv
        hvv = 1.0 + fv * fv + r * fvv
        det = huu * hvv - huv * huv
        if huu <= 0.0 or det <= 0.0:
            huu = 1.0 + fu * fu
            huv = fu * fv
            hvv = 1.0 + fv * fv
            det = huu * hvv - huv * huv
        du = -(hvv * gu - huv * gv) / det
        dv = -(huu * gv - huv * gu) / det
        cur = (u - px) * (u - px) + (v - py) * (v - py) + r * r
        step = 1.0
        while step > 1e-6:
            un = u + step * du
            vn = v + step * dv
            if _sqdist(kind, c0, c1, un, vn, px, py, pz) <= cur + 1e-15 * (1.0 + cur):
                break
            step *= 0.5
        u = u + step * du
        v = v + step * dv
        if fabs(step * du) + fabs(step * dv) < tol:
            return u, v, it + 1
    return u, v, -1
