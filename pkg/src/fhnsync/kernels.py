"""Fused forward-Euler kernel for the coupled FHN network.

Every cell update reads the previous time level only and the coupling sum
runs over k in index order, so results do not depend on how work is split.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _euler_step(u, v, un, vn, c, C, eps, d_u, a, b, dx, dy, dt):
    """One Euler step from ``(u, v)`` into ``(un, vn)``; False if a sample went non-finite."""
    n, ny, nx = u.shape
    idx2 = 1.0 / (dx * dx)
    idy2 = 1.0 / (dy * dy)
    inv_eps = 1.0 / eps
    ok = True
    for i in range(n):
        for j in range(ny):
            jm = j - 1 if j > 0 else 0
            jp = j + 1 if j < ny - 1 else ny - 1
            for m in range(nx):
                mm = m - 1 if m > 0 else 0
                mp = m + 1 if m < nx - 1 else nx - 1
                uc = u[i, j, m]
                vc = v[i, j, m]
                lap = (u[i, j, mp] - 2.0 * uc + u[i, j, mm]) * idx2 + (
                    u[i, jp, m] - 2.0 * uc + u[i, jm, m]
                ) * idy2
                cpl = 0.0
                for k in range(n):
                    cik = C[i, k]
                    if cik != 0.0:
                        cpl += cik * u[k, j, m]
                du = (d_u * lap - uc * uc * uc + 3.0 * uc - vc + cpl) * inv_eps
                dv = a * uc - b * vc + c[j, m]
                unew = uc + dt * du
                vnew = vc + dt * dv
                if not (math.isfinite(unew) and math.isfinite(vnew)):
                    ok = False
                un[i, j, m] = unew
                vn[i, j, m] = vnew
    return ok


@njit(cache=True, nogil=True)
def euler_steps(u, v, c, C, eps, d_u, a, b, dx, dy, dt, nsteps, u_buf, v_buf):
    """Advance ``u, v`` of shape ``(n, ny, nx)`` in place by ``nsteps`` Euler steps.

    Returns -1 on success, otherwise the 0-based index of the first step that
    produced a non-finite sample (state left at the end of that step).
    """
    failed = -1
    done = 0
    for step in range(nsteps):
        if step % 2 == 0:
            ok = _euler_step(u, v, u_buf, v_buf, c, C, eps, d_u, a, b, dx, dy, dt)
        else:
            ok = _euler_step(u_buf, v_buf, u, v, c, C, eps, d_u, a, b, dx, dy, dt)
        done = step + 1
        if not ok:
            failed = step
            break
    if done % 2 == 1:
        u[:, :, :] = u_buf
        v[:, :, :] = v_buf
    return failed


def warmup():
    """Compile the kernel on a tiny problem."""
    u = np.zeros((1, 3, 3))
    v = np.zeros((1, 3, 3))
    euler_steps(u, v, np.zeros((3, 3)), np.zeros((1, 1)), 0.1, 0.05, 1.0, 0.001, 1.0, 1.0,
                0.001, 1, np.empty_like(u), np.empty_like(v))
