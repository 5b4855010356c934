"""Compiled inner loops for the classical-noise trajectories."""

import math

import numba as nb
import numpy as np

_TWO_PI_3 = 2.0 * math.pi / 3.0


@nb.njit(cache=True, nogil=True)
def _kernel_vector(a00, a11, a22, a01, a02, a12, lam):
    """Largest cross product of two rows of ``A - lam I`` and its squared norm."""
    r0x, r0y, r0z = a00 - lam, a01, a02
    r1x, r1y, r1z = a01, a11 - lam, a12
    r2x, r2y, r2z = a02, a12, a22 - lam
    bx = r0y * r1z - r0z * r1y
    by = r0z * r1x - r0x * r1z
    bz = r0x * r1y - r0y * r1x
    best = bx * bx + by * by + bz * bz
    cx = r0y * r2z - r0z * r2y
    cy = r0z * r2x - r0x * r2z
    cz = r0x * r2y - r0y * r2x
    n = cx * cx + cy * cy + cz * cz
    if n > best:
        bx, by, bz, best = cx, cy, cz, n
    cx = r1y * r2z - r1z * r2y
    cy = r1z * r2x - r1x * r2z
    cz = r1x * r2y - r1y * r2x
    n = cx * cx + cy * cy + cz * cz
    if n > best:
        bx, by, bz, best = cx, cy, cz, n
    return bx, by, bz, best


@nb.njit(cache=True, nogil=True)
def _quad(a00, a11, a22, a01, a02, a12, x0, x1, x2, y0, y1, y2):
    """Bilinear form ``x^T A y`` for a symmetric 3x3 ``A``."""
    return (
        x0 * (a00 * y0 + a01 * y1 + a02 * y2)
        + x1 * (a01 * y0 + a11 * y1 + a12 * y2)
        + x2 * (a02 * y0 + a12 * y1 + a22 * y2)
    )


@nb.njit(cache=True, nogil=True)
def eigh3(a00, a11, a22, a01, a02, a12, w, v):
    """Eigenpairs of a real symmetric 3x3 matrix.

    The characteristic cubic is solved trigonometrically on the matrix scaled
    to unit max-norm. The extreme eigenvalue that is better separated from
    the middle one gets its eigenvector from cross products of the rows of
    ``A - lambda I``; the remaining 2x2 problem on the orthogonal complement
    is diagonalized by one Jacobi rotation, so near-degenerate pairs stay
    accurate and the frame is orthonormal to round-off. Eigenvalues are
    Rayleigh quotients of the final vectors. Writes eigenvalues (ascending up
    to round-off) into ``w`` and eigenvectors as columns of ``v``.
    """
    m = max(abs(a00), abs(a11), abs(a22), abs(a01), abs(a02), abs(a12))
    for i in range(3):
        for j in range(3):
            v[i, j] = 1.0 if i == j else 0.0
    if m == 0.0:
        w[0] = w[1] = w[2] = 0.0
        return
    s00, s11, s22, s01, s02, s12 = a00 / m, a11 / m, a22 / m, a01 / m, a02 / m, a12 / m
    q = (s00 + s11 + s22) / 3.0
    b00 = s00 - q
    b11 = s11 - q
    b22 = s22 - q
    p2 = (b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * (s01 * s01 + s02 * s02 + s12 * s12)) / 6.0
    if p2 < 1e-30:
        w[0] = w[1] = w[2] = q * m
        return
    p = math.sqrt(p2)
    det = b00 * (b11 * b22 - s12 * s12) - s01 * (s01 * b22 - s12 * s02) + s02 * (s01 * s12 - b11 * s02)
    r = 0.5 * det / (p * p2)
    if r <= -1.0:
        phi = math.pi / 3.0
    elif r >= 1.0:
        phi = 0.0
    else:
        phi = math.acos(r) / 3.0
    lam_hi = q + 2.0 * p * math.cos(phi)
    lam_lo = q + 2.0 * p * math.cos(phi + _TWO_PI_3)
    lam_mid = 3.0 * q - lam_hi - lam_lo

    anchor_low = (lam_mid - lam_lo) >= (lam_hi - lam_mid)
    lam = lam_lo if anchor_low else lam_hi
    ux, uy, uz, nu = _kernel_vector(s00, s11, s22, s01, s02, s12, lam)
    if nu > 0.0:
        t = 1.0 / math.sqrt(nu)
        ux, uy, uz = ux * t, uy * t, uz * t
    else:
        ux, uy, uz = 1.0, 0.0, 0.0
    e1x, e1y, e1z = _orthogonal(ux, uy, uz)
    e2x = uy * e1z - uz * e1y
    e2y = uz * e1x - ux * e1z
    e2z = ux * e1y - uy * e1x
    c11 = _quad(s00, s11, s22, s01, s02, s12, e1x, e1y, e1z, e1x, e1y, e1z)
    c22 = _quad(s00, s11, s22, s01, s02, s12, e2x, e2y, e2z, e2x, e2y, e2z)
    c12 = _quad(s00, s11, s22, s01, s02, s12, e1x, e1y, e1z, e2x, e2y, e2z)
    if c12 == 0.0:
        c, sn = 1.0, 0.0
    else:
        theta = (c22 - c11) / (2.0 * c12)
        t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
        c = 1.0 / math.sqrt(t * t + 1.0)
        sn = t * c
    # rotated pair: f = c e1 - s e2 (value c11 - t c12), g = s e1 + c e2 (value c22 + t c12)
    fx, fy, fz = c * e1x - sn * e2x, c * e1y - sn * e2y, c * e1z - sn * e2z
    gx, gy, gz = sn * e1x + c * e2x, sn * e1y + c * e2y, sn * e1z + c * e2z
    if c12 != 0.0 and (c11 - t * c12) > (c22 + t * c12):
        fx, fy, fz, gx, gy, gz = gx, gy, gz, fx, fy, fz
    elif c12 == 0.0 and c11 > c22:
        fx, fy, fz, gx, gy, gz = gx, gy, gz, fx, fy, fz
    k_u, k_f, k_g = (0, 1, 2) if anchor_low else (2, 0, 1)
    v[0, k_u], v[1, k_u], v[2, k_u] = ux, uy, uz
    v[0, k_f], v[1, k_f], v[2, k_f] = fx, fy, fz
    v[0, k_g], v[1, k_g], v[2, k_g] = gx, gy, gz
    w[k_u] = _quad(a00, a11, a22, a01, a02, a12, ux, uy, uz, ux, uy, uz)
    w[k_f] = _quad(a00, a11, a22, a01, a02, a12, fx, fy, fz, fx, fy, fz)
    w[k_g] = _quad(a00, a11, a22, a01, a02, a12, gx, gy, gz, gx, gy, gz)


@nb.njit(cache=True, nogil=True)
def _orthogonal(x, y, z):
    """Some unit vector orthogonal to the unit vector ``(x, y, z)``."""
    if abs(x) <= abs(y) and abs(x) <= abs(z):
        ox, oy, oz = 0.0, z, -y
    elif abs(y) <= abs(z):
        ox, oy, oz = -z, 0.0, x
    else:
        ox, oy, oz = y, -x, 0.0
    s = 1.0 / math.sqrt(ox * ox + oy * oy + oz * oz)
    return ox * s, oy * s, oz * s


@nb.njit(cache=True, nogil=True)
def classical_trajectory(noise, x0, sigma, wall_lo, wall_hi, dt, delta, g0, L,
                         burn_in, record_every, psi_out, rec_x, rec_c):
    """Propagate one single-excitation three-spin trajectory.

    Spin 1 sits at 0 with frequency 0, spin 2 at ``L`` with frequency
    ``delta``, and the mobile spin at ``x`` with frequency ``x * delta / L``.
    Each step first moves the particle with the given standard-normal draw and
    then applies ``exp(-i H dt)`` for the frozen position.

    Returns ``(mean C12 over steps >= burn_in, final position)``. When
    ``record_every > 0`` the position and ``C12`` after every
    ``record_every``-th step are written to ``rec_x`` / ``rec_c`` (entry 0 is
    the initial point).
    """
    w = np.empty(3)
    v = np.empty((3, 3))
    p0 = psi_out[0]
    p1 = psi_out[1]
    p2 = psi_out[2]
    x = x0
    half_g12 = 0.5 * g0
    acc = 0.0
    n_acc = 0
    n_steps = noise.shape[0]
    if record_every > 0:
        rec_x[0] = x
        rec_c[0] = 2.0 * abs(p0) * abs(p1)
    for n in range(n_steps):
        x = x + sigma * noise[n]
        while x < wall_lo or x > wall_hi:
            if x > wall_hi:
                x = 2.0 * wall_hi - x
            else:
                x = 2.0 * wall_lo - x
        u = x / L
        y = 1.0 - u
        eigh3(0.0, delta, u * delta, half_g12, 0.5 * g0 / (u * u * u), 0.5 * g0 / (y * y * y), w, v)
        s0 = v[0, 0] * p0 + v[1, 0] * p1 + v[2, 0] * p2
        s1 = v[0, 1] * p0 + v[1, 1] * p1 + v[2, 1] * p2
        s2 = v[0, 2] * p0 + v[1, 2] * p1 + v[2, 2] * p2
        s0 *= complex(math.cos(w[0] * dt), -math.sin(w[0] * dt))
        s1 *= complex(math.cos(w[1] * dt), -math.sin(w[1] * dt))
        s2 *= complex(math.cos(w[2] * dt), -math.sin(w[2] * dt))
        p0 = v[0, 0] * s0 + v[0, 1] * s1 + v[0, 2] * s2
        p1 = v[1, 0] * s0 + v[1, 1] * s1 + v[1, 2] * s2
        p2 = v[2, 0] * s0 + v[2, 1] * s1 + v[2, 2] * s2
        c12 = 2.0 * abs(p0) * abs(p1)
        if n + 1 >= burn_in:
            acc += c12
            n_acc += 1
        if record_every > 0 and (n + 1) % record_every == 0:
            k = (n + 1) // record_every
            rec_x[k] = x
            rec_c[k] = c12
    psi_out[0] = p0
    psi_out[1] = p1
    psi_out[2] = p2
    return (acc / n_acc if n_acc > 0 else 0.0), x
