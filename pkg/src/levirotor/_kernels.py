"""Compiled integration kernels for the rigid-rotor trap dynamics.

State vector layout (float64[20]):

    y[0:3]   center-of-mass position R
    y[3:6]   momentum P
    y[6:15]  rotation matrix, row-major; columns are the body axes
    y[15:18] angular momentum J (space frame)
    y[18]    circuit charge Q
    y[19]    inductor flux Phi

Parameter packing (built by engine._pack_params; keep both in sync):

    flags[0] mode: 0 exact fields, 1 effective (drive-averaged) fields
    flags[1] trap present          flags[2] endcap present
    flags[3] homogeneous field     flags[4] image charges
    flags[5] pickup: 0 none, 1 linear, 2 quadrupole
    flags[6] circuit: 0 none, 1 series, 2 parallel
    flags[7] stochastic step       flags[8] gas coupling

    scal[0]  mass          scal[1]  q            scal[2]  1/ell0^2
    scal[3]  U_dc          scal[4]  U_ac         scal[5]  omega_ac
    scal[6]  2 k_ec U_ec / ell_ec^2              scal[7]  image coeff c
    scal[8]  pickup gain (k1/z0 or k2/2z0^2)
    scal[9]  1/L           scal[10] 1/C          scal[11] R/L (series)
    scal[12] 1/R (parallel)                      scal[13] circuit noise amp
    scal[14] U_ac/(m w^2 l0^2)  scal[15] U_ac/(w^2 l0^2)
    scal[16] U_dc/l0^2     scal[17] U_ac/(2 l0^2)  scal[18] escape radius^2

    mats[0] A    mats[1] A_ec    mats[2] G (pickup)    mats[3] Q_body
    vecs[0] p_body   vecs[1] I_body    vecs[2] E_hom
    vecs[3] gas Gamma_cm   vecs[4] gas Gamma_rot (body axes)
    vecs[5] cm noise amp   vecs[6] rot noise amp (body axes)

Noise rows are (7,): three center-of-mass, three rotational (body frame),
one circuit.  Step times are computed as t0 + k*dt from the global step
index so results do not depend on how the run is chunked.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_ESCAPED = 2
STATUS_NONFINITE = 3


@njit(cache=True, inline="always")
def _mv3(M, v, out):
    out[0] = M[0, 0] * v[0] + M[0, 1] * v[1] + M[0, 2] * v[2]
    out[1] = M[1, 0] * v[0] + M[1, 1] * v[1] + M[1, 2] * v[2]
    out[2] = M[2, 0] * v[0] + M[2, 1] * v[1] + M[2, 2] * v[2]


@njit(cache=True, inline="always")
def _mtv3(M, v, out):
    out[0] = M[0, 0] * v[0] + M[1, 0] * v[1] + M[2, 0] * v[2]
    out[1] = M[0, 1] * v[0] + M[1, 1] * v[1] + M[2, 1] * v[2]
    out[2] = M[0, 2] * v[0] + M[1, 2] * v[1] + M[2, 2] * v[2]


@njit(cache=True, inline="always")
def _mm3(A, B, C):
    for i in range(3):
        for j in range(3):
            C[i, j] = A[i, 0] * B[0, j] + A[i, 1] * B[1, j] + A[i, 2] * B[2, j]


@njit(cache=True, inline="always")
def _mm3t(A, B, C):
    # C = A @ B.T
    for i in range(3):
        for j in range(3):
            C[i, j] = A[i, 0] * B[j, 0] + A[i, 1] * B[j, 1] + A[i, 2] * B[j, 2]


@njit(cache=True, inline="always")
def _cross(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


@njit(cache=True, inline="always")
def _crossvec(M, out):
    # out_j = eps_jkl M_kl
    out[0] = M[1, 2] - M[2, 1]
    out[1] = M[2, 0] - M[0, 2]
    out[2] = M[0, 1] - M[1, 0]


@njit(cache=True, inline="always")
def _skew_into(v, M):
    M[0, 0] = 0.0
    M[0, 1] = -v[2]
    M[0, 2] = v[1]
    M[1, 0] = v[2]
    M[1, 1] = 0.0
    M[1, 2] = -v[0]
    M[2, 0] = -v[1]
    M[2, 1] = v[0]
    M[2, 2] = 0.0


@njit(cache=True)
def _orthonormalize_columns(R):
    n0 = np.sqrt(R[0, 0] ** 2 + R[1, 0] ** 2 + R[2, 0] ** 2)
    for i in range(3):
        R[i, 0] /= n0
    d = R[0, 0] * R[0, 1] + R[1, 0] * R[1, 1] + R[2, 0] * R[2, 1]
    for i in range(3):
        R[i, 1] -= d * R[i, 0]
    n1 = np.sqrt(R[0, 1] ** 2 + R[1, 1] ** 2 + R[2, 1] ** 2)
    for i in range(3):
        R[i, 1] /= n1
    R[0, 2] = R[1, 0] * R[2, 1] - R[2, 0] * R[1, 1]
    R[1, 2] = R[2, 0] * R[0, 1] - R[0, 0] * R[2, 1]
    R[2, 2] = R[0, 0] * R[1, 1] - R[1, 0] * R[0, 1]


@njit(cache=True)
def _rhs(y, t, flags, scal, mats, vecs, dy, V, M):
    """Deterministic drift; gas friction included when flags[8] is set."""
    r = y[0:3]
    P = y[3:6]
    Rm = y[6:15].reshape(3, 3)
    J = y[15:18]

    p_sp = V[0]
    va = V[1]
    vb = V[2]
    vc = V[3]
    vd = V[4]
    ve = V[5]
    vf = V[6]
    vg = V[7]
    vh = V[8]
    Q_sp = M[0]
    T1 = M[1]
    T2 = M[2]
    T3 = M[3]

    _mv3(Rm, vecs[0], p_sp)
    _mm3(Rm, mats[3], T1)
    _mm3t(T1, Rm, Q_sp)

    q = scal[1]
    mass = scal[0]
    F0 = 0.0
    F1 = 0.0
    F2 = 0.0
    N0 = 0.0
    N1 = 0.0
    N2 = 0.0

    if flags[1] == 1:
        A = mats[0]
        if flags[0] == 0:
            # instantaneous drive field
            cU = (scal[3] + scal[4] * np.cos(scal[5] * t)) * scal[2]
            _mv3(A, r, va)
            _mv3(A, p_sp, vb)
            _mm3(A, Q_sp, T2)
            _crossvec(T2, vc)
            _cross(p_sp, va, vd)
            F0 -= cU * (q * va[0] + vb[0])
            F1 -= cU * (q * va[1] + vb[1])
            F2 -= cU * (q * va[2] + vb[2])
            N0 -= cU * (vd[0] - vc[0] / 3.0)
            N1 -= cU * (vd[1] - vc[1] / 3.0)
            N2 -= cU * (vd[2] - vc[2] / 3.0)
        else:
            # drive-averaged force and torque
            cdc = scal[16]
            cac = scal[17]
            for i in range(3):
                va[i] = q * r[i] + p_sp[i]
            _mv3(A, va, vb)          # A (q r + p)
            _mv3(A, r, vc)           # A r
            _cross(p_sp, vc, vd)
            _mm3(A, Q_sp, T2)
            _crossvec(T2, ve)
            W0 = vd[0] - ve[0] / 3.0
            W1 = vd[1] - ve[1] / 3.0
            W2 = vd[2] - ve[2] / 3.0
            # delta0 = c_del I^-1 W, with I^-1 w = Rm ((Rm^T w)/I_body)
            vd[0] = W0
            vd[1] = W1
            vd[2] = W2
            _mtv3(Rm, vd, vf)
            for i in range(3):
                vf[i] /= vecs[1][i]
            _mv3(Rm, vf, vg)
            for i in range(3):
                vg[i] *= scal[15]    # delta0
            # eps0 = c_eps A (q r + p)
            for i in range(3):
                ve[i] = scal[14] * vb[i]
            _cross(vg, p_sp, vh)     # delta0 x p
            for i in range(3):
                vf[i] = q * ve[i] + vh[i]
            _mv3(A, vf, vd)          # A (q eps0 + delta0 x p)
            F0 -= cdc * vb[0] + cac * vd[0]
            F1 -= cdc * vb[1] + cac * vd[1]
            F2 -= cdc * vb[2] + cac * vd[2]
            # torque: -cdc W - cac [ (d0 x p) x Ar + p x A eps0
            #                        - crossvec(A [d0]x Q)/3 + crossvec(A Q [d0]x)/3 ]
            _cross(vh, vc, vd)       # (delta0 x p) x (A r)
            _mv3(A, ve, vf)          # A eps0
            _cross(p_sp, vf, ve)     # p x A eps0
            _skew_into(vg, T1)       # [delta0]x
            _mm3(A, T1, T2)
            _mm3(T2, Q_sp, T3)
            _crossvec(T3, vf)        # crossvec(A [d0]x Q)
            _mm3(Q_sp, T1, T2)
            _mm3(A, T2, T3)
            _crossvec(T3, vg)        # crossvec(A Q [d0]x)
            N0 -= cdc * W0 + cac * (vd[0] + ve[0] - vf[0] / 3.0 + vg[0] / 3.0)
            N1 -= cdc * W1 + cac * (vd[1] + ve[1] - vf[1] / 3.0 + vg[1] / 3.0)
            N2 -= cdc * W2 + cac * (vd[2] + ve[2] - vf[2] / 3.0 + vg[2] / 3.0)

        if flags[2] == 1:
            c2 = scal[6]
            Aec = mats[1]
            _mv3(Aec, r, va)
            _mv3(Aec, p_sp, vb)
            _mm3(Aec, Q_sp, T2)
            _crossvec(T2, vc)
            _cross(p_sp, va, vd)
            F0 += c2 * (q * va[0] + vb[0])
            F1 += c2 * (q * va[1] + vb[1])
            F2 += c2 * (q * va[2] + vb[2])
            N0 += c2 * (vd[0] - vc[0] / 3.0)
            N1 += c2 * (vd[1] - vc[1] / 3.0)
            N2 += c2 * (vd[2] - vc[2] / 3.0)

    if flags[3] == 1:
        E = vecs[2]
        _cross(p_sp, E, vd)
        F0 += q * E[0]
        F1 += q * E[1]
        F2 += q * E[2]
        N0 += vd[0]
        N1 += vd[1]
        N2 += vd[2]

    if flags[4] == 1:
        c_im = scal[7]
        F2 += 14.0 * c_im * q * (q * r[2] + p_sp[2])
        w = 14.0 * c_im * q * r[2] + 5.0 * c_im * p_sp[2]
        N0 += w * p_sp[1] + 3.0 * c_im * q * Q_sp[1, 2]
        N1 += -w * p_sp[0] - 3.0 * c_im * q * Q_sp[0, 2]

    # pickup back-action and circuit equations (exact mode only)
    if flags[5] > 0 and flags[0] == 0:
        pk = scal[8]
        if flags[5] == 1:
            q_ind = pk * (q * r[2] + p_sp[2])
            g0 = 0.0
            g1 = 0.0
            g2 = pk * q
            t0 = pk * p_sp[1]
            t1 = -pk * p_sp[0]
            t2 = 0.0
        else:
            G = mats[2]
            _mv3(G, r, va)
            trGQ = 0.0
            for i in range(3):
                for j in range(3):
                    trGQ += G[i, j] * Q_sp[i, j]
            q_ind = pk * (
                q * (r[0] * va[0] + r[1] * va[1] + r[2] * va[2])
                + 2.0 * (p_sp[0] * va[0] + p_sp[1] * va[1] + p_sp[2] * va[2])
                + trGQ / 3.0
            )
            _mv3(G, p_sp, vb)
            g0 = 2.0 * pk * (q * va[0] + vb[0])
            g1 = 2.0 * pk * (q * va[1] + vb[1])
            g2 = 2.0 * pk * (q * va[2] + vb[2])
            _cross(p_sp, va, vd)
            _mm3(G, Q_sp, T2)
            _crossvec(T2, vc)
            t0 = 2.0 * pk * (vd[0] - vc[0] / 3.0)
            t1 = 2.0 * pk * (vd[1] - vc[1] / 3.0)
            t2 = 2.0 * pk * (vd[2] - vc[2] / 3.0)
        u_z = (y[18] + q_ind) * scal[10]
        F0 -= u_z * g0
        F1 -= u_z * g1
        F2 -= u_z * g2
        N0 -= u_z * t0
        N1 -= u_z * t1
        N2 -= u_z * t2
        if flags[6] == 1:
            dy[18] = y[19] * scal[9]
            dy[19] = -u_z - scal[11] * y[19]
        else:
            dy[18] = y[19] * scal[9] - u_z * scal[12]
            dy[19] = -u_z
    else:
        dy[18] = 0.0
        dy[19] = 0.0

    if flags[8] == 1:
        F0 -= vecs[3][0] * P[0]
        F1 -= vecs[3][1] * P[1]
        F2 -= vecs[3][2] * P[2]
        _mtv3(Rm, J, va)
        for i in range(3):
            va[i] *= vecs[4][i]
        _mv3(Rm, va, vb)
        N0 -= vb[0]
        N1 -= vb[1]
        N2 -= vb[2]

    dy[0] = P[0] / mass
    dy[1] = P[1] / mass
    dy[2] = P[2] / mass
    dy[3] = F0
    dy[4] = F1
    dy[5] = F2
    dy[15] = N0
    dy[16] = N1
    dy[17] = N2

    # dR = skew(omega_space) R with omega = R (j_body / I_body)
    _mtv3(Rm, J, va)
    for i in range(3):
        va[i] /= vecs[1][i]
    _mv3(Rm, va, vb)
    DR = dy[6:15].reshape(3, 3)
    for jcol in range(3):
        DR[0, jcol] = vb[1] * Rm[2, jcol] - vb[2] * Rm[1, jcol]
        DR[1, jcol] = vb[2] * Rm[0, jcol] - vb[0] * Rm[2, jcol]
        DR[2, jcol] = vb[0] * Rm[1, jcol] - vb[1] * Rm[0, jcol]


@njit(cache=True, nogil=True)
def integrate(y, t0, dt, g0, n_steps, stride, flags, scal, mats, vecs, noise, out):
    """Advance y by n_steps, writing strided snapshots into out.

    g0 is the global index of the step about to be taken; snapshot rows
    are indexed by (global step)//stride.  Returns (status, completed).
    """
    k1 = np.empty(20)
    k2 = np.empty(20)
    k3 = np.empty(20)
    k4 = np.empty(20)
    yt = np.empty(20)
    V = np.empty((9, 3))
    M = np.empty((4, 3, 3))
    sqdt = np.sqrt(dt)
    stochastic = flags[7] == 1
    esc_sq = scal[18]

    for i in range(n_steps):
        t = t0 + (g0 + i) * dt
        if stochastic:
            _rhs(y, t, flags, scal, mats, vecs, k1, V, M)
            for k in range(20):
                y[k] += dt * k1[k]
            # additive noise: cm momentum, body-frame angular momentum, circuit
            y[3] += vecs[5][0] * sqdt * noise[i, 0]
            y[4] += vecs[5][1] * sqdt * noise[i, 1]
            y[5] += vecs[5][2] * sqdt * noise[i, 2]
            amp = vecs[6]
            if amp[0] != 0.0 or amp[1] != 0.0 or amp[2] != 0.0:
                Rm = y[6:15].reshape(3, 3)
                b0 = amp[0] * noise[i, 3]
                b1 = amp[1] * noise[i, 4]
                b2 = amp[2] * noise[i, 5]
                y[15] += sqdt * (Rm[0, 0] * b0 + Rm[0, 1] * b1 + Rm[0, 2] * b2)
                y[16] += sqdt * (Rm[1, 0] * b0 + Rm[1, 1] * b1 + Rm[1, 2] * b2)
                y[17] += sqdt * (Rm[2, 0] * b0 + Rm[2, 1] * b1 + Rm[2, 2] * b2)
            if scal[13] != 0.0:
                if flags[6] == 1:
                    y[19] += scal[13] * sqdt * noise[i, 6]
                elif flags[6] == 2:
                    y[18] += scal[13] * sqdt * noise[i, 6]
        else:
            _rhs(y, t, flags, scal, mats, vecs, k1, V, M)
            for k in range(20):
                yt[k] = y[k] + 0.5 * dt * k1[k]
            _rhs(yt, t + 0.5 * dt, flags, scal, mats, vecs, k2, V, M)
            for k in range(20):
                yt[k] = y[k] + 0.5 * dt * k2[k]
            _rhs(yt, t + 0.5 * dt, flags, scal, mats, vecs, k3, V, M)
            for k in range(20):
                yt[k] = y[k] + dt * k3[k]
            _rhs(yt, t + dt, flags, scal, mats, vecs, k4, V, M)
            for k in range(20):
                y[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])

        _orthonormalize_columns(y[6:15].reshape(3, 3))

        ok = True
        for k in range(20):
            if not np.isfinite(y[k]):
                ok = False
        if not ok:
            return STATUS_NONFINITE, i

        g = g0 + i + 1
        if g % stride == 0:
            row = g // stride
            out[row, 0] = t0 + g * dt
            for k in range(20):
                out[row, 1 + k] = y[k]

        if y[0] ** 2 + y[1] ** 2 + y[2] ** 2 > esc_sq:
            return STATUS_ESCAPED, i + 1

    return STATUS_OK, n_steps


@njit(cache=True, nogil=True)
def axial_chunk(z, P, g0, n_steps, dt, c_dc, c_ac, omega, mass, gamma, amp, noise, accumulate):
    """Stochastic z-motion of a charge in the ring trap, many trajectories.

    The axial force (c_dc + c_ac cos(omega t)) z decouples from all other
    coordinates, so the ensemble advances as flat arrays.  A Heun
    (drift-trapezoid) step keeps the bias in the stationary variance at
    second order in dt.  Returns the accumulated sum of P^2 over all
    steps and trajectories when accumulate is set.
    """
    n_traj = z.shape[0]
    sqdt = np.sqrt(dt)
    inv_m = 1.0 / mass
    acc = 0.0
    for i in range(n_steps):
        t = (g0 + i) * dt
        s0 = c_dc + c_ac * np.cos(omega * t)
        s1 = c_dc + c_ac * np.cos(omega * (t + dt))
        for k in range(n_traj):
            w = amp * sqdt * noise[i, k]
            f0 = s0 * z[k] - gamma * P[k]
            zp = z[k] + P[k] * inv_m * dt
            pp = P[k] + f0 * dt + w
            f1 = s1 * zp - gamma * pp
            z[k] += 0.5 * (P[k] + pp) * inv_m * dt
            P[k] += 0.5 * (f0 + f1) * dt + w
            if accumulate:
                acc += P[k] * P[k]
    return acc
