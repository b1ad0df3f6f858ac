"""Compiled time loop. Mirrors the operator sequence of ``coupled_solver.step``
element by element; ``tests/test_engines.py`` keeps the two in agreement."""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from . import fem1d

_G0 = (1.0 + 1.0 / math.sqrt(3.0)) / 2.0  # N1 at first Gauss point = N2 at second
_G1 = (1.0 - 1.0 / math.sqrt(3.0)) / 2.0

OK, FAILED, TAUT, BAD_SOLVE = 0, 1, -1, -2


@njit(cache=True)
def _solve_tridiag(d, e, b, x, cp, dp):
    """Symmetric tridiagonal solve; returns the relative residual."""
    n = d.size
    cp[0] = e[0] / d[0]
    dp[0] = b[0] / d[0]
    for i in range(1, n):
        m = d[i] - e[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = e[i] / m
        dp[i] = (b[i] - e[i - 1] * dp[i - 1]) / m
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    rn = 0.0
    bn = 0.0
    for i in range(n):
        r = d[i] * x[i] - b[i]
        if i > 0:
            r += e[i - 1] * x[i - 1]
        if i < n - 1:
            r += e[i] * x[i + 1]
        rn += r * r
        bn += b[i] * b[i]
    if bn > 0.0:
        return math.sqrt(rn / bn)
    return math.sqrt(rn)


@njit(cache=True)
def _clip01(p):
    if p < 0.0:
        return 0.0
    if p > 1.0:
        return 1.0
    return p


@njit(cache=True)
def _degr(p, floor):
    q = 1.0 - _clip01(p)
    q = q * q
    return q if q > floor else floor


@njit(cache=True)
def _kernel(area_g, h, perim, mat, sag, state, loads, dt, n_steps, theta_lim,
            snap_every, snaps, series, tol):
    """``mat`` = (Y, gamma, g_c, rho, a, kappa, sigma0, alpha_res, theta0, floor);
    ``sag`` = (h0, w_b, alpha_l, span, theta_ref);
    ``state`` rows = u, phi, F, theta, V, hist;
    ``loads`` rows = t, ambient, current, h_conv, wind_load."""
    Y, gam, gc, rho, aging, kappa, sig0, ares, th0, floor = (
        mat[0], mat[1], mat[2], mat[3], mat[4], mat[5], mat[6], mat[7], mat[8], mat[9])
    h0, wb, alpha_l, span, theta_ref = sag[0], sag[1], sag[2], sag[3], sag[4]
    ne = area_g.shape[0]
    nn = ne + 1
    w = 0.5 * h
    n00 = _G0 * _G0
    n11 = _G1 * _G1
    n01 = _G0 * _G1
    u = state[0]
    phi = state[1]
    fat = state[2]
    theta = state[3]
    volt = state[4]
    hist = state[5]
    d = np.empty(nn)
    e = np.empty(nn - 1)
    b = np.empty(nn)
    x = np.empty(nn)
    cp = np.empty(nn)
    dp = np.empty(nn)
    qj = np.empty((ne, 2))
    s0 = wb * span * span / (8.0 * h0)
    l0 = span + 8.0 * s0 * s0 / (3.0 * span)
    max_res = 0.0
    first_bad = -1
    n_snap = 0
    for k in range(n_steps):
        # 1. tension from the previous mean temperature
        tm = 0.0
        for i in range(nn):
            tm += theta[i]
        tm /= nn
        length = l0 * (1.0 + alpha_l * (tm - theta_ref))
        if length <= span:
            return TAUT, k + 1, max_res, first_bad, n_snap
        sg = math.sqrt(3.0 * span * (length - span) / 8.0)
        wtot = math.sqrt(wb * wb + loads[4, k] * loads[4, k])
        tension = wtot * span * span / (8.0 * sg)

        # Joule source at Gauss points from the incoming phi, theta, V
        for el in range(ne):
            dv = (volt[el + 1] - volt[el]) / h
            for g in range(2):
                if g == 0:
                    pg = phi[el] * _G0 + phi[el + 1] * _G1
                    tg = theta[el] * _G0 + theta[el + 1] * _G1
                else:
                    pg = phi[el] * _G1 + phi[el + 1] * _G0
                    tg = theta[el] * _G1 + theta[el + 1] * _G0
                sig = _degr(pg, floor) * sig0 / (1.0 + ares * (tg - th0))
                qj[el, g] = sig * area_g[el, g] * dv * dv

        # 2. displacement
        for i in range(nn):
            d[i] = 0.0
            b[i] = 0.0
        for el in range(ne):
            p0 = phi[el] * _G0 + phi[el + 1] * _G1
            p1 = phi[el] * _G1 + phi[el + 1] * _G0
            ke = (_degr(p0, floor) * area_g[el, 0] + _degr(p1, floor) * area_g[el, 1]) * Y * 0.5 / h
            d[el] += ke
            d[el + 1] += ke
            e[el] = -ke
            dphi = (phi[el + 1] - phi[el]) / h
            ge = gam * gc * dphi * dphi * (area_g[el, 0] + area_g[el, 1]) * w
            b[el] -= ge / h
            b[el + 1] += ge / h
        b[nn - 1] += tension
        e[0] = 0.0
        d[0] = 1.0
        b[0] = 0.0
        r = _solve_tridiag(d, e, b, x, cp, dp)
        if r > max_res:
            max_res = r
        if r > tol and first_bad < 0:
            first_bad = k + 1
        for i in range(nn):
            u[i] = x[i]

        # 3. strain-energy history (element strains averaged to nodes)
        for i in range(nn):
            if i == 0:
                eps = (u[1] - u[0]) / h
            elif i == nn - 1:
                eps = (u[nn - 1] - u[nn - 2]) / h
            else:
                eps = 0.5 * (u[i + 1] - u[i - 1]) / h
            en = Y * eps * eps
            if en > hist[i]:
                hist[i] = en

        # 4. damage
        for i in range(nn):
            d[i] = 0.0
            b[i] = 0.0
        for el in range(ne):
            a0 = area_g[el, 0]
            a1 = area_g[el, 1]
            hg0 = hist[el] * _G0 + hist[el + 1] * _G1
            hg1 = hist[el] * _G1 + hist[el + 1] * _G0
            fg0 = fat[el] * _G0 + fat[el + 1] * _G1
            fg1 = fat[el] * _G1 + fat[el + 1] * _G0
            c0 = (hg0 + gc / gam) * a0
            c1 = (hg1 + gc / gam) * a1
            ke = gam * gc * (a0 + a1) * 0.5 / h
            d[el] += ke + w * (c0 * n00 + c1 * n11)
            d[el + 1] += ke + w * (c0 * n11 + c1 * n00)
            e[el] = -ke + w * (c0 + c1) * n01
            f0 = (hg0 + fg0 / gam) * a0
            f1 = (hg1 + fg1 / gam) * a1
            b[el] += w * (f0 * _G0 + f1 * _G1)
            b[el + 1] += w * (f0 * _G1 + f1 * _G0)
        r = _solve_tridiag(d, e, b, x, cp, dp)
        if r > max_res:
            max_res = r
        if r > tol and first_bad < 0:
            first_bad = k + 1
        for i in range(nn):
            phi[i] = x[i]

        # 5. fatigue, forward Euler with the consistent mass matrix
        for i in range(nn):
            d[i] = 0.0
            b[i] = 0.0
        coef = rho * aging * Y / (gam * th0)
        for el in range(ne):
            a0 = area_g[el, 0]
            a1 = area_g[el, 1]
            sabs = abs(u[el + 1] - u[el]) / h
            p0 = _clip01(phi[el] * _G0 + phi[el + 1] * _G1)
            p1 = _clip01(phi[el] * _G1 + phi[el + 1] * _G0)
            t0 = theta[el] * _G0 + theta[el + 1] * _G1
            t1 = theta[el] * _G1 + theta[el + 1] * _G0
            r0 = coef * t0 * (1.0 - p0) * sabs * p0 * a0
            r1 = coef * t1 * (1.0 - p1) * sabs * p1 * a1
            d[el] += w * (a0 * n00 + a1 * n11)
            d[el + 1] += w * (a0 * n11 + a1 * n00)
            e[el] = w * (a0 + a1) * n01
            b[el] += dt * w * (r0 * _G0 + r1 * _G1)
            b[el + 1] += dt * w * (r0 * _G1 + r1 * _G0)
        r = _solve_tridiag(d, e, b, x, cp, dp)
        if r > max_res:
            max_res = r
        if r > tol and first_bad < 0:
            first_bad = k + 1
        for i in range(nn):
            fat[i] += x[i]

        # 6. temperature
        amb = loads[1, k]
        hp = loads[3, k] * perim
        for i in range(nn):
            d[i] = 0.0
            b[i] = 0.0
        for el in range(ne):
            a0 = area_g[el, 0]
            a1 = area_g[el, 1]
            ke = kappa * (a0 + a1) * 0.5 / h
            d[el] += ke + w * hp * (n00 + n11)
            d[el + 1] += ke + w * hp * (n11 + n00)
            e[el] = -ke + w * hp * 2.0 * n01
            f0 = qj[el, 0] + hp * amb
            f1 = qj[el, 1] + hp * amb
            b[el] += w * (f0 * _G0 + f1 * _G1)
            b[el + 1] += w * (f0 * _G1 + f1 * _G0)
        r = _solve_tridiag(d, e, b, x, cp, dp)
        if r > max_res:
            max_res = r
        if r > tol and first_bad < 0:
            first_bad = k + 1
        tmax = -1e300
        for i in range(nn):
            theta[i] = x[i]
            if x[i] > tmax:
                tmax = x[i]

        # 7. voltage
        for i in range(nn):
            d[i] = 0.0
            b[i] = 0.0
        for el in range(ne):
            p0 = phi[el] * _G0 + phi[el + 1] * _G1
            p1 = phi[el] * _G1 + phi[el + 1] * _G0
            t0 = theta[el] * _G0 + theta[el + 1] * _G1
            t1 = theta[el] * _G1 + theta[el + 1] * _G0
            s0g = _degr(p0, floor) * sig0 / (1.0 + ares * (t0 - th0)) * area_g[el, 0]
            s1g = _degr(p1, floor) * sig0 / (1.0 + ares * (t1 - th0)) * area_g[el, 1]
            ke = (s0g + s1g) * 0.5 / h
            d[el] += ke
            d[el + 1] += ke
            e[el] = -ke
        b[nn - 1] += loads[2, k]
        e[0] = 0.0
        d[0] = 1.0
        b[0] = 0.0
        r = _solve_tridiag(d, e, b, x, cp, dp)
        if r > max_res:
            max_res = r
        if r > tol and first_bad < 0:
            first_bad = k + 1
        for i in range(nn):
            volt[i] = x[i]

        # bookkeeping
        pmax = 0.0
        fmax = -1e300
        for i in range(nn):
            pc = _clip01(phi[i])
            if pc > pmax:
                pmax = pc
            if fat[i] > fmax:
                fmax = fat[i]
        series[0, k] = loads[0, k]
        series[1, k] = pmax
        series[2, k] = fmax
        series[3, k] = tmax
        series[4, k] = abs(volt[nn - 1])
        series[5, k] = tension
        if snap_every > 0 and (k + 1) % snap_every == 0 and n_snap < snaps.shape[0]:
            for j in range(6):
                for i in range(nn):
                    snaps[n_snap, j, i] = state[j, i]
            n_snap += 1
        if tmax > theta_lim:
            return FAILED, k + 1, max_res, first_bad, n_snap
    return OK, n_steps, max_res, first_bad, n_snap


def run_compiled(model, n_steps, loads, disc):
    from .coupled_solver import FieldState, SimulationResult, SolverError, initial_state

    cfg = model.config
    m = model.material
    mat = np.array([m.young, m.gamma, m.g_c, m.rho, m.aging, m.kappa, m.sigma_e0, m.alpha_res,
                    m.theta0, m.degradation_floor])
    s = model.sag
    sag = np.array([s.h0, s.w_b, s.alpha_l, s.span, s.theta_ref])
    st0 = initial_state(model, disc)
    state = np.vstack([st0.u, st0.phi, st0.fatigue, st0.theta, st0.voltage, st0.hist])
    ld = np.vstack([loads.t, loads.ambient, loads.current, loads.h, loads.wind_load])
    n_snap = n_steps // cfg.snapshot_every if cfg.snapshot_every else 0
    snaps = np.zeros((max(n_snap, 1), 6, disc.mesh.n_nodes))
    series = np.full((6, n_steps), np.nan)
    status, done, max_res, first_bad, got = _kernel(
        disc.area_g, disc.mesh.h, disc.perimeter, mat, sag, state, ld, cfg.dt, n_steps, cfg.theta_lim,
        cfg.snapshot_every, snaps, series, fem1d.RESIDUAL_TOL)

    def mk(arr, step_):
        return FieldState(*(arr[j].copy() for j in range(6)), step=step_,
                          tension=float(series[5, step_ - 1]))

    snapshots = {(i + 1) * cfg.snapshot_every: mk(snaps[i], (i + 1) * cfg.snapshot_every)
                 for i in range(got)}
    final = mk(state, done)
    fail = done if status == FAILED else None
    result = SimulationResult(*series[:, :done], failure_time=None if fail is None else fail * cfg.dt,
                              failure_step=fail, snapshots=snapshots, final_state=final,
                              max_residual=max_res, nodes=disc.mesh.nodes)
    if status == TAUT:
        raise SolverError("taut-cable regime (cable shorter than span)", done,
                          _truncate(result, done - 1, cfg.snapshot_every))
    if first_bad >= 0:
        raise SolverError(f"linear solve residual {max_res:.3e} above tolerance", first_bad,
                          _truncate(result, first_bad - 1, cfg.snapshot_every))
    return result


def _truncate(result, n_good, snap_every):
    """Keep the first ``n_good`` steps; the final state is no longer trustworthy."""
    from .coupled_solver import SimulationResult
    keep = {k: v for k, v in result.snapshots.items() if k <= n_good}
    return SimulationResult(result.t[:n_good], result.phi_max[:n_good], result.fatigue_max[:n_good],
                            result.theta_max[:n_good], result.voltage_drop[:n_good],
                            result.tension[:n_good], None, None, keep, None,
                            result.max_residual, result.nodes)
