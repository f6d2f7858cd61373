"""Discretized qubit evolution under arbitrary in-plane drive.

Each 50 ns step applies the closed-form SU(2) unitary of the static step
Hamiltonian

    H_k = (1/2)(gamma b c_k + xi_k) sigma_z
        + (phi_x[k]/(2 dt)) sigma_x + (phi_y[k]/(2 dt)) sigma_y,

so the control alone rotates the qubit by angle phi about the respective
in-plane axis during the step.  Writing m = dt*H as a Pauli vector,

    U = cos(theta) I - i (sin(theta)/theta) (m . sigma),   theta = |m|,

with series fallbacks near theta = 0.  The density matrix and d(rho)/db
are co-propagated by the product rule (one derivative term per step, O(N)
total).  Control gradients are accumulated in reverse: a single backward
sweep of adjoint observables yields d<x>/dphi and d(d<x>/db)/dphi for all
2N components at O(N) cost, algebraically identical to per-component
forward accumulation (cross-checked in the tests).

Fisher information uses the noise-averaged state: <x> and d<x>/db are
averaged over traces first, then F = (d<x>/db)^2 / (1 - <x>^2).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .fields import GYRO_RAD_PER_S_UT
from .noise import NoisePool, NoiseTrace

if os.environ.get("SENSEOPT_DISABLE_NUMBA"):
    _kernels = None
else:
    try:
        from . import _kernels
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _kernels = None

DEFAULT_DT = 50e-9

_RHO_TOL = 1e-10


class DegenerateFisherError(ArithmeticError):
    """|<x>| is numerically 1; the Fisher denominator vanishes."""


@dataclass(frozen=True)
class ContinuousProtocol:
    """Per-step in-plane rotation angles, |phi| <= pi componentwise."""

    phi_x: np.ndarray
    phi_y: np.ndarray
    dt: float = DEFAULT_DT

    def __post_init__(self):
        px = np.array(self.phi_x, dtype=float)
        py = np.array(self.phi_y, dtype=float)
        if px.shape != py.shape or px.ndim != 1:
            raise ValueError("phi_x and phi_y must be equal-length 1-d arrays")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if px.size and max(np.abs(px).max(), np.abs(py).max()) > np.pi + 1e-12:
            raise ValueError("control angles must satisfy |phi| <= pi")
        px.setflags(write=False)
        py.setflags(write=False)
        object.__setattr__(self, "phi_x", px)
        object.__setattr__(self, "phi_y", py)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def n_steps(self) -> int:
        return self.phi_x.size

    @property
    def sensing_time(self) -> float:
        return self.n_steps * self.dt

    def step_midpoints(self) -> np.ndarray:
        return (np.arange(self.n_steps) + 0.5) * self.dt


@dataclass(frozen=True)
class QubitState:
    """Density matrix and its amplitude derivative after evolution."""

    rho: np.ndarray
    drho_db: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        d = np.asarray(self.drho_db, dtype=complex)
        if rho.shape != (2, 2) or d.shape != (2, 2):
            raise ValueError("expected 2x2 matrices")
        if abs(np.trace(rho) - 1.0) > _RHO_TOL:
            raise ValueError(f"trace(rho) = {np.trace(rho)} is not 1")
        if np.abs(rho - rho.conj().T).max() > _RHO_TOL:
            raise ValueError("rho is not Hermitian")
        ev = np.linalg.eigvalsh(rho)
        if ev.min() < -_RHO_TOL or ev.max() > 1.0 + _RHO_TOL:
            raise ValueError(f"rho eigenvalues {ev} outside [0, 1]")
        if abs(np.trace(d)) > _RHO_TOL:
            raise ValueError("drho_db must be traceless")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "drho_db", d)

    @property
    def x_expectation(self) -> float:
        return float(2.0 * self.rho[0, 1].real)

    @property
    def dx_db(self) -> float:
        return float(2.0 * self.drho_db[0, 1].real)


def plus_x_state() -> np.ndarray:
    return 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)


# ---------------------------------------------------------------------------
# closed-form step coefficients, stable near theta = 0
# ---------------------------------------------------------------------------


def _coef_s(theta):
    """sin(theta)/theta."""
    return np.sinc(theta / np.pi)


def _coef_g(theta):
    """(theta cos theta - sin theta)/theta^3 -> -1/3 at 0."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-3
    t2 = theta * theta
    series = -1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.where(
            small, series, (theta * np.cos(theta) - np.sin(theta)) / np.where(small, 1.0, theta**3)
        )
    return exact


def _coef_g2(theta):
    """d/dtheta of _coef_g, divided by theta -> 1/15 at 0."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < 1e-2
    t2 = theta * theta
    series = 1.0 / 15.0 - t2 / 210.0 + t2 * t2 / 7560.0
    s = _coef_s(theta)
    g = _coef_g(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.where(small, series, -(s + 3.0 * g) / np.where(small, 1.0, t2))
    return exact


def _unitary_parts(mx, my, mz, want_derivs=False, want_second=False):
    """Step unitary (and optionally its m-derivatives) as 2x2 entry tuples.

    All inputs broadcast together; entries come back with that shape.
    Derivative matrices follow d U/d m_a = -s m_a I - i(g m_a (m.sigma) + s sigma_a)
    and the mixed second derivative adds the g2 term.  ``want_derivs="z"``
    returns (U, dU/dm_z) only, the pieces the forward pass needs.
    """
    theta = np.sqrt(mx * mx + my * my + mz * mz)
    c = np.cos(theta)
    s = _coef_s(theta)
    U = (c - 1j * s * mz, -s * my - 1j * s * mx, s * my - 1j * s * mx, c + 1j * s * mz)
    if not want_derivs:
        return U
    g = _coef_g(theta)
    p = mx - 1j * my  # (m.sigma)_{01}
    q = mx + 1j * my  # (m.sigma)_{10}
    dUz = (
        -s * mz - 1j * (g * mz * mz + s),
        -1j * g * mz * p,
        -1j * g * mz * q,
        -s * mz + 1j * (g * mz * mz + s),
    )
    if want_derivs == "z":
        return U, dUz
    dUx = (
        -mx * (s + 1j * g * mz),
        -1j * (g * mx * p + s),
        -1j * (g * mx * q + s),
        -mx * (s - 1j * g * mz),
    )
    dUy = (
        -my * (s + 1j * g * mz),
        -1j * g * my * p - s,
        -1j * g * my * q + s,
        -my * (s - 1j * g * mz),
    )
    if not want_second:
        return U, dUx, dUy, dUz
    g2 = _coef_g2(theta)
    d2Ux = (
        -g * mx * mz - 1j * (g2 * mx * mz * mz + g * mx),
        -1j * (g2 * mx * mz * p + g * mz),
        -1j * (g2 * mx * mz * q + g * mz),
        -g * mx * mz - 1j * (-g2 * mx * mz * mz - g * mx),
    )
    d2Uy = (
        -g * my * mz - 1j * (g2 * my * mz * mz + g * my),
        -1j * (g2 * my * mz * p - 1j * g * mz),
        -1j * (g2 * my * mz * q + 1j * g * mz),
        -g * my * mz - 1j * (-g2 * my * mz * mz - g * my),
    )
    return U, dUx, dUy, dUz, d2Ux, d2Uy


# 2x2 helpers on (entry, entry, entry, entry) tuples of broadcast arrays


def _mm(A, B):
    a00, a01, a10, a11 = A
    b00, b01, b10, b11 = B
    return (
        a00 * b00 + a01 * b10,
        a00 * b01 + a01 * b11,
        a10 * b00 + a11 * b10,
        a10 * b01 + a11 * b11,
    )


def _dag(A):
    a00, a01, a10, a11 = A
    return (np.conj(a00), np.conj(a10), np.conj(a01), np.conj(a11))


def _tr2(A, B):
    """trace(A @ B)."""
    a00, a01, a10, a11 = A
    b00, b01, b10, b11 = B
    return a00 * b00 + a01 * b10 + a10 * b01 + a11 * b11


def _full_rho(p, q):
    return (p, q, np.conj(q), 1.0 - p)


def _full_traceless(d, e):
    return (d, e, np.conj(e), -d)


def _full_herm(h00, h01, h11):
    return (h00, h01, np.conj(h01), h11)


def _conjugate_herm(U, h00, h01, h11):
    """U^dagger H U for Hermitian H given by (h00, h01, h11)."""
    u00, u01, u10, u11 = U
    n00 = (
        np.abs(u00) ** 2 * h00
        + np.abs(u10) ** 2 * h11
        + 2.0 * (np.conj(u00) * h01 * u10).real
    )
    n01 = (
        np.conj(u00) * u01 * h00
        + np.conj(u00) * u11 * h01
        + np.conj(u10) * u01 * np.conj(h01)
        + np.conj(u10) * u11 * h11
    )
    n11 = (
        np.abs(u01) ** 2 * h00
        + np.abs(u11) ** 2 * h11
        + 2.0 * (np.conj(u01) * h01 * u11).real
    )
    return n00.real, n01, n11.real


def _signal_terms(b: float, field, dt: float, n_steps: int):
    """Signal part of m_z and its b-derivative, per step."""
    c = field.evaluate((np.arange(n_steps) + 0.5) * dt)
    dbsc = 0.5 * dt * GYRO_RAD_PER_S_UT * c
    return b * dbsc, dbsc


def step_unitary(k: int, protocol: ContinuousProtocol, b: float, field, xi_k: float):
    """(U_k, dU_k/db) as 2x2 arrays for a single step with noise sample xi_k."""
    if not 0 <= k < protocol.n_steps:
        raise ValueError(f"step index {k} out of range")
    t_mid = (k + 0.5) * protocol.dt
    mz = 0.5 * protocol.dt * (GYRO_RAD_PER_S_UT * b * field.evaluate(t_mid) + xi_k)
    mx = 0.5 * protocol.phi_x[k]
    my = 0.5 * protocol.phi_y[k]
    U, _, _, dUz = _unitary_parts(
        np.float64(mx), np.float64(my), np.float64(mz), want_derivs=True
    )
    dm_db = 0.5 * protocol.dt * GYRO_RAD_PER_S_UT * field.evaluate(t_mid)
    u = np.array([[U[0], U[1]], [U[2], U[3]]], dtype=complex)
    du = dm_db * np.array([[dUz[0], dUz[1]], [dUz[2], dUz[3]]], dtype=complex)
    return u, du


def _forward(phix, phiy, dt, mzsig, dbsc, xi, store=False, p0=0.5, q0=0.5 + 0.0j):
    """Evolve rho and drho/db for noise xi of shape (..., N) from rho0.

    ``phix``/``phiy`` have shape (N,) or any shape whose [..., k] slice
    broadcasts against xi[..., k] (e.g. (R, 1, N) against (R, B, N) for a
    stack of runs).  rho is tracked as (p, q) with rho = [[p, q], [q*, 1-p]]
    and drho/db as (d, e) with the traceless layout [[d, e], [e*, -d]].
    Returns the final components and, when ``store``, the per-step history
    needed by the backward pass.
    """
    n_steps = phix.shape[-1]
    mx_all = 0.5 * phix
    my_all = 0.5 * phiy
    lead = np.broadcast_shapes(mx_all.shape[:-1], xi.shape[:-1])
    p = np.full(lead, p0)
    q = np.full(lead, q0, dtype=complex)
    d = np.zeros(lead)
    e = np.zeros(lead, dtype=complex)
    history = [] if store else None
    for k in range(n_steps):
        mx, my = mx_all[..., k], my_all[..., k]
        mz = mzsig[k] + 0.5 * dt * xi[..., k]
        U, dUz = _unitary_parts(mx, my, mz, want_derivs="z")
        V = tuple(dbsc[k] * x for x in dUz)
        if store:
            history.append((p, q, d, e, U, V, mx, my, mz))
        # W = V rho U^dagger; D' = U D U^dagger + W + W^dagger
        Ud = _dag(U)
        W = _mm(_mm(V, _full_rho(p, q)), Ud)
        nd00, nd01, _ = _conjugate_herm(Ud, d, e, -d)  # U D U^dagger
        d = nd00 + 2.0 * W[0].real
        e = nd01 + W[1] + np.conj(W[2])
        p, q, _ = _conjugate_herm(Ud, p, q, 1.0 - p)
    return p, q, d, e, history


def evolve(protocol: ContinuousProtocol, b: float, field, trace, rho0=None) -> QubitState:
    """Full-chain evolution for one noise trace; returns the final state.

    ``trace`` is a NoiseTrace or plain sample array with at least
    ``n_steps`` entries; ``rho0`` defaults to |+x><+x|.
    """
    xi = trace.samples if isinstance(trace, NoiseTrace) else np.asarray(trace, dtype=float)
    if xi.shape[-1] < protocol.n_steps:
        raise ValueError(
            f"trace has {xi.shape[-1]} samples but protocol needs {protocol.n_steps}"
        )
    xi = xi[: protocol.n_steps]
    if rho0 is None:
        p0, q0 = 0.5, 0.5 + 0.0j
    else:
        rho0 = np.asarray(rho0, dtype=complex)
        p0, q0 = float(rho0[0, 0].real), complex(rho0[0, 1])
    mzsig, dbsc = _signal_terms(b, field, protocol.dt, protocol.n_steps)
    p, q, d, e, _ = _forward(
        protocol.phi_x, protocol.phi_y, protocol.dt, mzsig, dbsc, xi, p0=p0, q0=q0
    )
    rho = np.array([[p, q], [np.conj(q), 1.0 - p]], dtype=complex)
    dr = np.array([[d, e], [np.conj(e), -d]], dtype=complex)
    return QubitState(rho=rho, drho_db=dr)


def _ensemble_moments(protocol, b, field, xi):
    """Noise-averaged <x> and d<x>/db for xi of shape (..., B, N)."""
    mzsig, dbsc = _signal_terms(b, field, protocol.dt, protocol.n_steps)
    if _kernels is not None:
        lead = xi.shape[:-2]
        flat = xi.reshape((-1,) + xi.shape[-2:])
        xs = np.empty(flat.shape[0])
        dxs = np.empty(flat.shape[0])
        for i, block in enumerate(flat):
            x_tr, dx_tr = _kernels.forward_kernel(
                protocol.phi_x, protocol.phi_y, protocol.dt, mzsig, dbsc,
                np.ascontiguousarray(block), 0.5, 0.5 + 0.0j,
            )
            xs[i] = x_tr.mean()
            dxs[i] = dx_tr.mean()
        return xs.reshape(lead), dxs.reshape(lead)
    p, q, d, e, _ = _forward(protocol.phi_x, protocol.phi_y, protocol.dt, mzsig, dbsc, xi)
    return 2.0 * q.real.mean(axis=-1), 2.0 * e.real.mean(axis=-1)


def _fisher_from_moments(x_mean, dx_mean):
    if np.any(np.abs(x_mean) >= 1.0 - 1e-12):
        raise DegenerateFisherError(
            f"noise-averaged <x> = {x_mean} saturates the measurement"
        )
    return dx_mean**2 / (1.0 - x_mean**2)


def _resolve_indices(pool: NoisePool, sample_count, rng, indices):
    if indices is not None:
        idx = np.asarray(indices, dtype=int)
    elif sample_count is None:
        idx = np.arange(pool.size)
    else:
        if sample_count < 2:
            raise ValueError("need at least 2 noise samples")
        rng = rng if rng is not None else np.random.default_rng(0)
        idx = rng.integers(0, pool.size, size=sample_count)
    if idx.size < 2:
        raise ValueError("need at least 2 noise samples")
    return idx


def fisher_information(
    protocol: ContinuousProtocol,
    b: float,
    field,
    pool: NoisePool,
    sample_count=None,
    rng=None,
    indices=None,
) -> float:
    """Noise-averaged Fisher information at amplitude b (1/uT^2)."""
    idx = _resolve_indices(pool, sample_count, rng, indices)
    if pool.n_steps < protocol.n_steps:
        raise ValueError("pool traces are shorter than the protocol")
    xi = pool.traces[idx, : protocol.n_steps]
    x_mean, dx_mean = _ensemble_moments(protocol, b, field, xi)
    return float(_fisher_from_moments(x_mean, dx_mean))


def cd_sensitivity(protocol: ContinuousProtocol, b: float, field, pool: NoisePool, **kw) -> float:
    """Per-shot sensitivity eta = sqrt(T / F), uT sqrt(s)."""
    F = fisher_information(protocol, b, field, pool, **kw)
    if F == 0.0:
        return np.inf
    return float(np.sqrt(protocol.sensing_time / F))


def _backward_gradients(phix, phiy, dt, b, field, xi):
    """d<x>/dphi, d(d<x>/db)/dphi via one reverse sweep.

    xi: (..., B, N); phix/phiy as in ``_forward``.  Returns the forward
    moments plus trace-averaged gradient arrays of shape (..., N).
    """
    n_steps = phix.shape[-1]
    mzsig, dbsc = _signal_terms(b, field, dt, n_steps)
    p, q, d, e, hist = _forward(phix, phiy, dt, mzsig, dbsc, xi, store=True)
    lead = np.broadcast_shapes(phix.shape[:-1], xi.shape[:-1])[:-1]
    N = n_steps
    gX_x = np.zeros(lead + (N,))
    gX_y = np.zeros(lead + (N,))
    gA_x = np.zeros(lead + (N,))
    gA_y = np.zeros(lead + (N,))
    # adjoints: Lx for <x>; (Lr, LD) pair for d<x>/db
    full = np.broadcast_shapes(phix.shape[:-1], xi.shape[:-1])
    zero = np.zeros(full)
    one = np.ones(full)
    lx00, lx01, lx11 = zero.copy(), one + 0j, zero.copy()
    ld00, ld01, ld11 = zero.copy(), one + 0j, zero.copy()
    lr00, lr01, lr11 = zero.copy(), zero + 0j, zero.copy()
    for k in range(N - 1, -1, -1):
        pk, qk, dk, ek, U, V, mx, my, mz = hist[k]
        _, dUx, dUy, _, d2Ux, d2Uy = _unitary_parts(
            mx, my, mz, want_derivs=True, want_second=True
        )
        dVx = tuple(dbsc[k] * x for x in d2Ux)
        dVy = tuple(dbsc[k] * x for x in d2Uy)
        rho = _full_rho(pk, qk)
        D = _full_traceless(dk, ek)
        Ud = _dag(U)
        RU = _mm(rho, Ud)
        DU = _mm(D, Ud)
        Lx = _full_herm(lx00, lx01, lx11)
        LD = _full_herm(ld00, ld01, ld11)
        Lr = _full_herm(lr00, lr01, lr11)
        G3 = _mm(LD, _mm(V, rho))  # for Tr(LD V rho dU^dagger)
        for c, dU, dV, gX, gA in (
            ("x", dUx, dVx, gX_x, gA_x),
            ("y", dUy, dVy, gX_y, gA_y),
        ):
            dU_RU = _mm(dU, RU)
            gX[..., k] = 2.0 * _tr2(Lx, dU_RU).real.mean(axis=-1)
            val = (
                _tr2(LD, _mm(dU, DU))
                + _tr2(LD, _mm(dV, RU))
                + _tr2(G3, _dag(dU))
                + _tr2(Lr, dU_RU)
            )
            gA[..., k] = 2.0 * val.real.mean(axis=-1)
        # pull adjoints through step k
        lx00, lx01, lx11 = _conjugate_herm(U, lx00, lx01, lx11)
        # Lr <- U^dag Lr U + (U^dag LD V + h.c.)
        K = _mm(_dag(U), _mm(LD, V))
        nr00, nr01, nr11 = _conjugate_herm(U, lr00, lr01, lr11)
        lr00 = nr00 + 2.0 * K[0].real
        lr01 = nr01 + K[1] + np.conj(K[2])
        lr11 = nr11 + 2.0 * K[3].real
        ld00, ld01, ld11 = _conjugate_herm(U, ld00, ld01, ld11)
    x_mean = 2.0 * q.real.mean(axis=-1)
    dx_mean = 2.0 * e.real.mean(axis=-1)
    # chain rule from Pauli coefficients to control angles: m_c = phi_c / 2
    return x_mean, dx_mean, 0.5 * gX_x, 0.5 * gX_y, 0.5 * gA_x, 0.5 * gA_y


def _eta_chain(T, x, a, gXx, gXy, gAx, gAy):
    F = _fisher_from_moments(x, a)
    if np.any(F == 0.0):
        raise DegenerateFisherError("zero Fisher information; gradient undefined")
    denom = 1.0 - x**2
    x_, a_, F_, denom_ = (np.asarray(v)[..., None] for v in (x, a, F, denom))
    dF_x = 2.0 * a_ * gAx / denom_ + (a_**2) * 2.0 * x_ * gXx / denom_**2
    dF_y = 2.0 * a_ * gAy / denom_ + (a_**2) * 2.0 * x_ * gXy / denom_**2
    eta = np.sqrt(T / F)
    scale = -0.5 * np.sqrt(T) * F_ ** (-1.5)
    return eta, scale * dF_x, scale * dF_y


def _gradients_dispatch(phix1d, phiy1d, dt, b, field, xi2d):
    """Single-run gradients on a 2-d (B, N) noise block."""
    if _kernels is not None:
        mzsig, dbsc = _signal_terms(b, field, dt, phix1d.shape[-1])
        x_tr, dx_tr, gXx, gXy, gAx, gAy = _kernels.gradient_kernel(
            phix1d, phiy1d, dt, mzsig, dbsc, np.ascontiguousarray(xi2d)
        )
        B = xi2d.shape[0]
        return (
            x_tr.mean(),
            dx_tr.mean(),
            0.5 * gXx / B,
            0.5 * gXy / B,
            0.5 * gAx / B,
            0.5 * gAy / B,
        )
    return _backward_gradients(phix1d, phiy1d, dt, b, field, xi2d)


def cd_loss_and_gradient(protocol: ContinuousProtocol, b: float, field, xi: np.ndarray):
    """(eta, deta/dphi_x, deta/dphi_y) on the given noise batch (..., B, N)."""
    if xi.ndim == 2:
        x, a, gXx, gXy, gAx, gAy = _gradients_dispatch(
            protocol.phi_x, protocol.phi_y, protocol.dt, b, field, xi
        )
        return _eta_chain(protocol.sensing_time, x, a, gXx, gXy, gAx, gAy)
    x, a, gXx, gXy, gAx, gAy = _backward_gradients(
        protocol.phi_x, protocol.phi_y, protocol.dt, b, field, xi
    )
    return _eta_chain(protocol.sensing_time, x, a, gXx, gXy, gAx, gAy)


def batched_loss_and_gradient(phi_x, phi_y, dt, b, field, xi):
    """Per-run gradients for a stack of runs: phi_* (R, N), xi (R, B, N).

    Returns (eta (R,), grad_x (R, N), grad_y (R, N)); entry r equals
    evaluating run r on its own.
    """
    phi_x = np.asarray(phi_x, float)
    phi_y = np.asarray(phi_y, float)
    R, N = phi_x.shape
    if _kernels is not None:
        etas = np.empty(R)
        gxs = np.empty((R, N))
        gys = np.empty((R, N))
        for r in range(R):
            eta, gx, gy = cd_loss_and_gradient(
                ContinuousProtocol(phi_x[r], phi_y[r], dt), b, field, xi[r]
            )
            etas[r], gxs[r], gys[r] = float(eta), gx, gy
        return etas, gxs, gys
    x, a, gXx, gXy, gAx, gAy = _backward_gradients(
        phi_x[:, None, :], phi_y[:, None, :], dt, b, field, xi
    )
    return _eta_chain(N * dt, x, a, gXx, gXy, gAx, gAy)


def cd_gradient(
    protocol: ContinuousProtocol,
    b: float,
    field,
    pool: NoisePool,
    sample_count=None,
    rng=None,
    indices=None,
):
    """(deta/dphi_x, deta/dphi_y) arrays on a pool minibatch."""
    idx = _resolve_indices(pool, sample_count, rng, indices)
    xi = pool.traces[idx, : protocol.n_steps]
    _, gx, gy = cd_loss_and_gradient(protocol, b, field, xi)
    return gx, gy


def embed_pulse_protocol(pulse_times, sensing_time, dt: float = DEFAULT_DT) -> ContinuousProtocol:
    """Map flip times onto per-step pi rotations about x.

    Each flip lands in the step containing it; two flips in one step cancel
    (identity), matching the annihilation convention of the pulse engine.
    """
    n = int(round(sensing_time / dt))
    if abs(n * dt - sensing_time) > 1e-12 * sensing_time:
        raise ValueError("sensing_time must be a multiple of dt")
    counts = np.zeros(n, dtype=int)
    for t in np.atleast_1d(pulse_times):
        k = min(int(t / dt), n - 1)
        counts[k] += 1
    phi_x = np.pi * (counts % 2)
    return ContinuousProtocol(phi_x=phi_x.astype(float), phi_y=np.zeros(n), dt=dt)
