"""Reduced Hamiltonian flow in the canonical coordinates (p_r, K, r, phi).

H = p_r^2/2 + U_K(r) with U_K = (K - Lambda)^2 / (2 f^2).  K is conserved by
construction; phi is recovered by quadrature of phi' = (K - Lambda)/f^2.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import EndpointSingularityError, InconclusiveFit, PoleError, PoleEscape
from .singularity import ELLIPTIC, HYPERBOLIC, ProfilePair, classify_circle

POLE_GUARD = 1e-6
PROBE_DELTA = 1e-7
MIN_R2 = 0.99


@dataclass
class PhaseState:
    p_r: float
    K: float
    r: float
    phi: float = 0.0

    def astuple(self):
        return (self.p_r, self.K, self.r, self.phi)


def _potential_terms(pair: ProfilePair, K, r):
    """U and dU/dr, plus phi' = (K - Lambda)/f^2."""
    F, G = pair.jets(r)
    w = K - G.value
    f2 = F.value * F.value
    U = 0.5 * w * w / f2
    dU = -w * G.d1 / f2 - w * w * F.d1 / (f2 * F.value)
    return U, dU, w / f2


def energy(pair: ProfilePair, p_r, K, r):
    U, _, _ = _potential_terms(pair, K, r)
    return 0.5 * np.asarray(p_r) ** 2 + U


def hamiltonian_rhs(pair: ProfilePair, s: PhaseState) -> PhaseState:
    if not (POLE_GUARD <= s.r <= pair.L - POLE_GUARD):
        raise PoleError("r=%.6g is too close to a pole" % s.r)
    _, dU, dphi = _potential_terms(pair, s.K, s.r)
    return PhaseState(-float(dU), 0.0, float(s.p_r), float(dphi))


@dataclass
class Trajectory:
    t: np.ndarray
    p_r: np.ndarray
    K: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    H: np.ndarray
    max_dH: float
    max_dK: float
    termination: str = "completed"

    def state(self, i: int = -1) -> PhaseState:
        return PhaseState(float(self.p_r[i]), float(self.K[i]), float(self.r[i]), float(self.phi[i]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "p_r", "K", "r", "phi", "H"])
        for row in zip(self.t, self.p_r, self.K, self.r, self.phi, self.H):
            w.writerow(["%.17g" % v for v in row])
        return buf.getvalue()


def integrate_batch(pair: ProfilePair, p_r, K, r, phi, T: float, dt: float, record_every: int = 1):
    """Velocity Verlet (kick-drift-kick) for many trajectories at once.

    Arrays of shape (n,).  Returns sampled (t, p_r, r, phi) arrays of shape
    (samples, n) and the largest energy deviation per trajectory.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    p = np.array(p_r, dtype=float)
    q = np.array(r, dtype=float)
    K = np.array(K, dtype=float)
    ph = np.array(phi, dtype=float)
    nsteps = int(round(T / dt))
    lo, hi = POLE_GUARD, pair.L - POLE_GUARD
    U, dU, w = _potential_terms(pair, K, q)
    H0 = 0.5 * p * p + U
    max_dH = np.zeros_like(p)
    ts, ps, qs, phs, Hs = [0.0], [p.copy()], [q.copy()], [ph.copy()], [H0.copy()]
    for n in range(1, nsteps + 1):
        p = p - 0.5 * dt * dU
        q = q + dt * p
        if np.any((q < lo) | (q > hi)):
            i = int(np.flatnonzero((q < lo) | (q > hi))[0])
            raise PoleEscape(n * dt, float(q[i]))
        U, dU, w_new = _potential_terms(pair, K, q)
        p = p - 0.5 * dt * dU
        ph = ph + 0.5 * dt * (w + w_new)
        w = w_new
        H = 0.5 * p * p + U
        np.maximum(max_dH, np.abs(H - H0), out=max_dH)
        if n % record_every == 0 or n == nsteps:
            ts.append(n * dt)
            ps.append(p.copy())
            qs.append(q.copy())
            phs.append(ph.copy())
            Hs.append(H)
    return (np.array(ts), np.array(ps), np.array(qs), np.array(phs), np.array(Hs), max_dH)


def integrate(pair: ProfilePair, s0: PhaseState, T: float, dt: float, record_every: int = 1) -> Trajectory:
    t, p, q, ph, H, dH = integrate_batch(pair, [s0.p_r], [s0.K], [s0.r], [s0.phi], T, dt, record_every)
    K = np.full_like(t, s0.K)
    return Trajectory(t, p[:, 0], K, q[:, 0], ph[:, 0], H[:, 0], float(dH[0]), 0.0)


def circle_state(pair: ProfilePair, r0: float, dr: float = 0.0) -> PhaseState:
    """State on the C1k circle through r0 (K = k(r0), p_r = 0), displaced by dr in r."""
    return PhaseState(0.0, float(pair.k(r0)), r0 + dr, 0.0)


def omega(pair: ProfilePair, r0: float) -> float:
    """Angular velocity of the motion along the critical circle r0."""
    F, G = pair.jets(r0)
    return float(-G.d1 / (F.value * F.d1))


# ---------------------------------------------------------------------------
# stability


@dataclass
class ProbeResult:
    r0: float
    verdict: str
    rate: float          # growth exponent (hyperbolic) or angular frequency (elliptic)
    r2: float
    expected: str

    def to_dict(self):
        return {"r0": self.r0, "verdict": self.verdict, "exponentOrFrequency": self.rate,
                "r2": self.r2, "classification": self.expected}


def _linear_fit(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss if ss > 0 else 0.0
    return coef, r2


def stability_probe(pair: ProfilePair, r0: float, delta: float = PROBE_DELTA, dt: float = 0.01,
                    chunk: float = 50.0, t_max: float = 4000.0) -> ProbeResult:
    """Perturb the critical circle r0 by delta in r and fit the linearized response.

    Growth |r - r0| ~ exp(lambda t) is fitted on the log scale once the
    deviation exceeds 10*delta; an oscillation is fitted through its zero
    crossings.  The verdict must agree with the classification of the circle.
    """
    res = stability_probes(pair, [r0], delta, dt, chunk, t_max)[0]
    if isinstance(res, InconclusiveFit):
        raise res
    return res


def stability_probes(pair: ProfilePair, r0s, delta: float = PROBE_DELTA, dt: float = 0.01,
                     chunk: float = 50.0, t_max: float = 4000.0):
    """Batch version of stability_probe; inconclusive probes are returned as InconclusiveFit."""
    r0s = np.asarray(r0s, dtype=float)
    expected = [classify_circle(pair, float(r)).type for r in r0s]
    K = pair.k(r0s)
    p = np.zeros_like(r0s)
    q = r0s + delta
    ph = np.zeros_like(r0s)
    ts, devs = [np.array([0.0])], [np.full((1, len(r0s)), delta)]
    t0 = 0.0
    while t0 < t_max:
        t, P, Q, PH, _, _ = integrate_batch(pair, p, K, q, ph, chunk, dt)
        ts.append(t0 + t[1:])
        devs.append(Q[1:] - r0s)
        p, q, ph = P[-1], Q[-1], PH[-1]
        t0 += chunk
        dev = np.concatenate(devs)
        grown = np.max(np.abs(dev), axis=0) > 1e4 * delta
        turned = np.count_nonzero(np.diff(np.sign(dev), axis=0) != 0, axis=0) >= 12
        if np.all(grown | turned):
            break
    t = np.concatenate(ts)
    dev = np.concatenate(devs)
    return [_fit_probe(float(r0s[i]), t, dev[:, i], delta, expected[i]) for i in range(len(r0s))]


def _fit_probe(r0, t, dev, delta, expected):
    big = np.flatnonzero(np.abs(dev) > 1e4 * delta)
    if big.size:
        # keep the linear regime only
        t, dev = t[:big[0]], dev[:big[0]]
    crossings = np.flatnonzero(np.diff(np.sign(dev)) != 0)
    if len(crossings) >= 4:
        # interpolated crossing times are spaced by pi/omega
        i0, i1 = crossings, crossings + 1
        tc = t[i0] - dev[i0] * (t[i1] - t[i0]) / (dev[i1] - dev[i0])
        coef, _ = _linear_fit(np.arange(len(tc), dtype=float), tc)
        w = np.pi / coef[0]
        A = np.column_stack([np.cos(w * t), np.sin(w * t)])
        amp, *_ = np.linalg.lstsq(A, dev, rcond=None)
        ss = float(np.sum((dev - dev.mean()) ** 2))
        r2 = 1.0 - float(np.sum((dev - A @ amp) ** 2)) / ss if ss > 0 else 0.0
        verdict, rate = ELLIPTIC, float(w)
    else:
        m = np.abs(dev) > 10 * delta
        if np.count_nonzero(m) < 10:
            return InconclusiveFit("no growth or oscillation detected at r0=%.10g" % r0)
        coef, r2 = _linear_fit(t[m], np.log(np.abs(dev[m])))
        verdict, rate = HYPERBOLIC, float(coef[0])
    if r2 < MIN_R2:
        return InconclusiveFit("fit quality R^2=%.4f below %.2f at r0=%.10g" % (r2, MIN_R2, r0))
    return ProbeResult(r0, verdict, rate, r2, expected)


# ---------------------------------------------------------------------------
# rotation increment


@dataclass
class IncrementResult:
    r_lo: float
    r_hi: float
    topology: str
    value: Optional[float]
    error: Optional[float]

    def to_dict(self):
        return {"rRange": [self.r_lo, self.r_hi], "topology": self.topology,
                "Phi": self.value, "error": self.error}


def _increment(pair: ProfilePair, h: float, k: float, r1: float, r2: float, epsabs: float = 1e-7):
    """2 * int_{r1}^{r2} dU/dk / sqrt(2(h - U)) dr with turning points at both ends.

    r = c + w sin(theta) removes the inverse square root at the ends.
    """
    for end in (r1, r2):
        _, dU, _ = _potential_terms(pair, k, end)
        if abs(float(dU)) < 1e-10:
            raise EndpointSingularityError("U' vanishes at the turning point r=%.10g" % end)
    c, w = 0.5 * (r1 + r2), 0.5 * (r2 - r1)

    def g(theta):
        r = c + w * np.sin(theta)
        U, _, dkU = _potential_terms(pair, k, r)
        gap = 2.0 * (h - U)
        ct = np.cos(theta)
        if gap <= 0:
            return 0.0
        return dkU * w * ct / np.sqrt(gap)
    val, err = quad(g, -0.5 * np.pi, 0.5 * np.pi, epsabs=epsabs, epsrel=1e-10, limit=400)
    return 2.0 * val, 2.0 * err


def rotation_increment(pair: ProfilePair, h: float, k: float):
    """Phi for every Annulus component of the motion domain at (h, k)."""
    from .molecule import ANNULUS, ensure_regular, motion_domain
    ensure_regular(pair, h)
    out = []
    for iv in motion_domain(pair, h, k):
        if iv.topology != ANNULUS:
            out.append(IncrementResult(iv.r_lo, iv.r_hi, iv.topology, None, None))
            continue
        v, e = _increment(pair, h, k, iv.r_lo, iv.r_hi)
        out.append(IncrementResult(iv.r_lo, iv.r_hi, iv.topology, v, e))
    return out


def partial_increment(pair: ProfilePair, h: float, eps: float, pole: float = 0.0):
    """Increment over [r1, |eps|^(3/4)] for k = Lambda(pole) + eps, r1 the turning point near the pole.

    The upper limit is measured as a distance from the pole.  Returns (value, error).
    """
    from scipy.optimize import brentq
    L = pair.L
    k = float(pair.lam(pole)) + eps
    delta = abs(eps) ** 0.75
    sgn = 1.0 if pole == 0.0 else -1.0

    def gap(x):
        U, _, _ = _potential_terms(pair, k, pole + sgn * x)
        return float(h - U)
    if gap(delta) <= 0:
        raise EndpointSingularityError("no allowed motion at distance |eps|^(3/4) from the pole")
    x1 = brentq(gap, 1e-15 * L, delta, xtol=1e-16, rtol=1e-15)
    lo, hi = sorted((pole + sgn * x1, pole + sgn * delta))
    c, w = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def g(theta):
        r = c + w * np.sin(theta)
        U, _, dkU = _potential_terms(pair, k, r)
        gp = 2.0 * (h - U)
        if gp <= 0:
            return 0.0
        return dkU * w * np.cos(theta) / np.sqrt(gp)
    val, err = quad(g, -0.5 * np.pi, 0.5 * np.pi, epsabs=1e-9, epsrel=1e-10, limit=400)
    return 2.0 * val, 2.0 * err


def pole_limit_model(h: float, eps: float) -> float:
    """Closed form of the partial increment for the flat model f = r, Lambda = Lambda(0)."""
    v = abs(eps) ** 0.75 * np.sqrt(2.0 * h) / abs(eps)
    return float(np.sign(eps) * (np.pi - 2.0 * np.arcsin(1.0 / v)))
