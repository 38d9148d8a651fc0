"""The integrable cluster model: phase-plane system, periods, and oracles.

One resonant cluster, after normal-form truncation and rescaling, reduces to
a single degree of freedom (phi, K) with Hamiltonian

    H(phi, K) = (9/4) K (1-K) [ C + 4 sqrt(K(1-K)) cos(2 phi) ],

evolving by  dphi/dtau = -dH/dK,  dK/dtau = +dH/dphi.  The constant
C = 10 J / eps_k^2 - 6 collects the total action J and the cluster
amplitude eps_k; a lone cluster always has C = 9.  This module implements
the reduced flow, its periods and thresholds, and -- as an internal oracle
-- the unreduced four-mode action-angle flow whose reduction must reproduce
the phase plane.

Orbits with phi(0) = 0 and K(0) = K0 in (gamma, 1/2) are periodic and swap
K0 <-> 1-K0 every half period, which is the beating effect; gamma is the
band edge cut out by the separatrix through the saddles at (+-pi/2, 1/2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import cos, exp, pi, sin, sqrt
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (
    ActionSingularityError,
    AmplitudeUnderflowError,
    BranchScanError,
    DomainError,
    HeteroclinicError,
    LabError,
    OscillationBandError,
    PeriodDivergenceError,
    PeriodUnreachableError,
)
from .resonance import ClusterFamily

# The model Hamiltonian written with the coefficient set (18, -9J, 4, 6J^3)
# is exactly three times the resonant sextic truncation of the quintic
# lattice Hamiltonian in the convention u = sum u_j e^{ijx} (the ordered
# sextuple count works out to 1/3 of those coefficients; see the
# combinatorial cross-check in the test suite).  One unit of model time
# therefore corresponds to MODEL_TIME_DILATION units of nu-scaled physical
# time, and any PDE comparison must divide its model-time argument by this.
MODEL_TIME_DILATION = 3.0

# K values this close to {0, 1} are treated as outside the phase-plane
# domain: the square roots in the vector field lose meaning below it.
K_GUARD = 1e-14

_TINY = float(np.finfo(float).tiny)  # smallest positive normal double


@dataclass(frozen=True)
class ModelParams:
    """Per-cluster constants of the reduced model.

    eps_k is the dimensionless cluster amplitude, J the total-action
    constant.  Everything downstream depends on them only through
    C = 10 J / eps_k^2 - 6; params derived from a family with the standard
    initial data always have C >= 9 (equality for a lone cluster).
    """

    eps_k: float
    J: float

    def __post_init__(self):
        if not self.eps_k > 0.0:
            raise DomainError(f"eps_k must be positive, got {self.eps_k}")
        if self.eps_k < _TINY:
            raise AmplitudeUnderflowError(
                f"cluster amplitude eps_k={self.eps_k!r} is below the smallest "
                "positive normal double"
            )

    @property
    def C(self) -> float:
        return 10.0 * self.J / (self.eps_k * self.eps_k) - 6.0

    @classmethod
    def from_C(cls, C: float, eps_k: float = 1.0) -> "ModelParams":
        """Params with a prescribed C (J chosen accordingly)."""
        return cls(eps_k=eps_k, J=(C + 6.0) * eps_k * eps_k / 10.0)


def cluster_params(family: ClusterFamily, eps: float, k: int) -> ModelParams:
    """Constants for cluster k (1-based) of a family at overall amplitude eps.

    eps_k = eps e^{-n_k} and J = (3/2) eps^2 sum_m e^{-2 n_m}.  A weight
    below the smallest positive normal double cannot participate in any
    computation and raises AmplitudeUnderflowError -- this is where the
    e^{-n} desk-scale wall surfaces for literally-grown families.
    """
    K = len(family.clusters)
    if not 1 <= k <= K:
        raise DomainError(f"cluster index {k} outside 1..{K}")
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    n_k = family.clusters[k - 1].n
    try:
        w = exp(-n_k)
    except OverflowError:  # pragma: no cover - exp(-n) cannot overflow
        w = 0.0
    eps_k = eps * w
    if eps_k < _TINY:
        raise AmplitudeUnderflowError(
            f"cluster {k} (center {n_k}): amplitude eps*e^-{n_k} underflows "
            "double precision"
        )
    J = 1.5 * eps * eps * sum(exp(-2.0 * c.n) for c in family.clusters)
    return ModelParams(eps_k=eps_k, J=J)


@dataclass(frozen=True)
class PhasePlaneState:
    """A point (phi, K) of the reduced phase plane."""

    phi: float
    K: float


@dataclass(frozen=True)
class ActionAngleState:
    """Actions and angles of the four cluster modes (a1, b1, a2, b2)."""

    I_a1: float
    I_b1: float
    I_a2: float
    I_b2: float
    theta_a1: float = 0.0
    theta_b1: float = 0.0
    theta_a2: float = 0.0
    theta_b2: float = 0.0

    @property
    def actions(self) -> tuple[float, float, float, float]:
        return (self.I_a1, self.I_b1, self.I_a2, self.I_b2)

    @property
    def angles(self) -> tuple[float, float, float, float]:
        return (self.theta_a1, self.theta_b1, self.theta_a2, self.theta_b2)


def _check_K(K: float) -> None:
    if not (K_GUARD <= K <= 1.0 - K_GUARD):
        raise DomainError(f"K={K} outside the open interval (0, 1) (guard {K_GUARD})")


def hstar(state: PhasePlaneState, params: ModelParams) -> float:
    """Energy of the reduced cluster at (phi, K)."""
    _check_K(state.K)
    P = state.K * (1.0 - state.K)
    return 2.25 * P * (params.C + 4.0 * sqrt(P) * cos(2.0 * state.phi))


def vector_field(state: PhasePlaneState, params: ModelParams) -> tuple[float, float]:
    """Right-hand side (dphi/dtau, dK/dtau) of the reduced system."""
    _check_K(state.K)
    K = state.K
    P = K * (1.0 - K)
    rootP = sqrt(P)
    dphi = -6.75 * (1.0 - 2.0 * K) * (params.C / 3.0 + 2.0 * rootP * cos(2.0 * state.phi))
    dK = -18.0 * P * rootP * sin(2.0 * state.phi)
    return (dphi, dK)


def gamma(params: ModelParams) -> float:
    """Lower edge of the oscillation band in K.

    D = (C-2)/(sqrt((C-2)^2 + 8(C-2)) + (C-2)) is the value of
    sqrt(K(1-K)) where the separatrix meets phi = 0; gamma is the smaller
    root of K(1-K) = D^2.  Requires C > 2.
    """
    C = params.C
    if C <= 2.0:
        raise DomainError(f"band edge needs C > 2, got C={C}")
    c2 = C - 2.0
    D = c2 / (sqrt(c2 * c2 + 8.0 * c2) + c2)
    return 0.5 * (1.0 - sqrt(1.0 - 4.0 * D * D))


def limit_period(params: ModelParams) -> float:
    """Half-period limit of small oscillations around (0, 1/2): 2 pi / (9 sqrt(C+3))."""
    C = params.C
    if C <= -3.0:
        raise DomainError(f"limit period needs C > -3, got C={C}")
    return 2.0 * pi / (9.0 * sqrt(C + 3.0))


def separatrix_level(params: ModelParams) -> float:
    """Energy of the separatrix through the saddles (+-pi/2, 1/2): (9/16)(C-2)."""
    return 0.5625 * (params.C - 2.0)


@dataclass
class ModelTrajectory:
    """Dense phase-plane trajectory with its conservation log."""

    tau: np.ndarray
    phi: np.ndarray
    K: np.ndarray
    sol: Callable[[float], np.ndarray]
    energy: np.ndarray
    energy_drift: float  # max |H - H0| / |H0| over the samples
    params: ModelParams

    def state(self, tau: float) -> PhasePlaneState:
        y = self.sol(tau)
        return PhasePlaneState(phi=float(y[0]), K=float(y[1]))


def _rhs(tau, y, C):
    phi, K = y
    P = K * (1.0 - K)
    if P <= 0.0:
        # outside the physical square; push back with a zero field so the
        # solver's own error control reports the failure
        return (0.0, 0.0)
    rootP = sqrt(P)
    return (
        -6.75 * (1.0 - 2.0 * K) * (C / 3.0 + 2.0 * rootP * cos(2.0 * phi)),
        -18.0 * P * rootP * sin(2.0 * phi),
    )


def integrate(
    state0: PhasePlaneState,
    params: ModelParams,
    tau_span: tuple[float, float],
    tol: float = 1e-12,
    n_samples: int = 600,
) -> ModelTrajectory:
    """Integrate the reduced system with dense output.

    Adaptive 8th-order Runge-Kutta at rtol = atol = tol; the returned
    trajectory records the energy along the way and its relative drift.
    """
    _check_K(state0.K)
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    C = params.C
    res = solve_ivp(
        _rhs,
        tau_span,
        [state0.phi, state0.K],
        method="DOP853",
        rtol=tol,
        atol=tol,
        dense_output=True,
        args=(C,),
    )
    if not res.success:
        raise HeteroclinicError(
            "reduced-model integration failed "
            f"({res.message}); initial energy H={hstar(state0, params):.6g}, "
            f"separatrix level H={separatrix_level(params):.6g}"
        )
    tau = np.linspace(tau_span[0], tau_span[1], n_samples)
    ys = res.sol(tau)
    phi, K = ys[0], ys[1]
    P = np.clip(K * (1.0 - K), 0.0, None)
    energy = 2.25 * P * (C + 4.0 * np.sqrt(P) * np.cos(2.0 * phi))
    h0 = energy[0]
    drift = float(np.max(np.abs(energy - h0)) / abs(h0)) if h0 != 0.0 else float(np.max(np.abs(energy)))
    return ModelTrajectory(
        tau=tau, phi=phi, K=K, sol=res.sol, energy=energy, energy_drift=drift, params=params
    )


def _band(params: ModelParams) -> tuple[float, float]:
    g = gamma(params)
    return g, 1.0 - g


def half_period(
    K0: float,
    params: ModelParams,
    tol: float = 1e-12,
    tau_max: Optional[float] = None,
) -> float:
    """Time T for the orbit from (0, K0) to next cross phi = 0, where K = 1-K0.

    Valid for K0 inside the oscillation band (gamma, 1-gamma) excluding the
    center 1/2.  The crossing is located on the dense output of the
    integrator (root refinement to machine precision in time) and the
    reflection identity |K(T) - (1-K0)| <= 10*tol is verified before
    returning.  If no crossing appears before ``tau_max`` (default
    1000 * limit_period), the period is reported as diverging -- K0 is then
    essentially on the band edge.
    """
    g, g_hi = _band(params)
    if not g < K0 < g_hi:
        raise OscillationBandError(
            f"K0={K0} outside the oscillation band ({g:.6f}, {g_hi:.6f})"
        )
    if K0 == 0.5:
        raise OscillationBandError("K0=1/2 is the center equilibrium; no period")
    if tau_max is None:
        tau_max = 1000.0 * limit_period(params)

    # From phi=0 the angle initially moves against its return direction
    # (dphi/dtau < 0 for K0 < 1/2), so the tau=0 zero of the event function
    # has the wrong sign and only the genuine return triggers.
    direction = 1.0 if K0 < 0.5 else -1.0

    def crossing(tau, y, C):
        return y[0]

    crossing.terminal = True
    crossing.direction = direction

    res = solve_ivp(
        _rhs,
        (0.0, tau_max),
        [0.0, K0],
        method="DOP853",
        rtol=tol,
        atol=tol,
        dense_output=True,
        events=crossing,
        args=(params.C,),
    )
    if not res.success and res.status != 1:
        raise HeteroclinicError(
            f"half-period integration failed ({res.message}); "
            f"separatrix level H={separatrix_level(params):.6g}"
        )
    if res.status != 1 or len(res.t_events[0]) == 0:
        raise PeriodDivergenceError(
            f"no phi=0 return within tau_max={tau_max:.6g}; K0={K0} is too close "
            "to the band edge"
        )
    T = float(res.t_events[0][0])
    K_T = float(res.y_events[0][0][1])
    if abs(K_T - (1.0 - K0)) > 10.0 * tol:
        raise LabError(
            f"half-period consistency check failed: K(T)={K_T!r} vs 1-K0={1.0 - K0!r}"
        )
    return T


def invert_period(
    T_target: float,
    params: ModelParams,
    tol: float = 1e-6,
    grid_size: int = 49,
) -> float:
    """K0 in (gamma, 1/2) whose half period equals T_target.

    The period decreases to limit_period as K0 -> 1/2 and diverges
    logarithmically as K0 -> gamma, but monotonicity is not guaranteed a
    priori, so the branch is grid-scanned (log-spaced in 1/2 - K0) before
    bracketing; multiple sign changes are reported with a warning and the
    bracket nearest the center is used.  The returned K0 reproduces
    T_target to relative ``tol`` (verified by re-evaluation).
    """
    Tlim = limit_period(params)
    if not T_target > Tlim:
        raise PeriodUnreachableError(
            f"target {T_target} is at or below the small-oscillation limit {Tlim:.9g}"
        )
    g = gamma(params)
    band = 0.5 - g

    # Sample K0 = gamma + s with s approaching both ends of the band
    # geometrically: the period diverges logarithmically at the edge
    # (s -> 0) and flattens quadratically to the limit at the center
    # (s -> band), so both extremes need dense coverage.  The smallest s
    # kept bounds the largest reachable target (roughly |ln s_min| growth).
    half = np.log10(0.5)
    lo_side = band * np.logspace(-10, half, grid_size // 2)
    hi_side = band - band * np.logspace(-8, half, grid_size - grid_size // 2)
    ss = np.unique(np.concatenate([lo_side, hi_side]))
    ss = ss[(ss > 0.0) & (ss < band)]
    periods = np.array([half_period(g + s, params) for s in ss])
    f = periods - T_target

    brackets = [
        (ss[i], ss[i + 1]) for i in range(len(ss) - 1) if f[i] * f[i + 1] <= 0.0
    ]
    if not brackets:
        raise BranchScanError(
            f"could not bracket T={T_target} on the sampled branch "
            f"(periods range {periods.min():.6g}..{periods.max():.6g})"
        )
    if len(brackets) > 1:
        warnings.warn(
            f"period {T_target} has {len(brackets)} preimage brackets on the "
            "branch; using the one nearest the center",
            RuntimeWarning,
            stacklevel=2,
        )
    lo, hi = brackets[-1]
    # Root-find in ln s: near the edge the period grows like |ln s|, so in
    # this variable it is nearly linear and the bracket shrinks uniformly.
    ls_root = brentq(
        lambda ls: half_period(g + exp(ls), params) - T_target,
        np.log(lo),
        np.log(hi),
        xtol=1e-14,
        rtol=4.0 * np.finfo(float).eps,
    )
    K0 = g + exp(ls_root)
    achieved = half_period(K0, params)
    if abs(achieved - T_target) > tol * T_target:
        raise LabError(
            f"period inversion missed the target: wanted {T_target}, got {achieved}"
        )
    return float(K0)


def actions_from(state: PhasePlaneState, params: ModelParams) -> ActionAngleState:
    """Cluster actions realizing (phi, K) with the standard conserved triple.

    I_a1 = eps^2 K, I_b1 = eps^2 (1-K), I_a2 = I_a1/2, I_b2 = I_b1/2; the
    beating combination of angles is carried entirely by theta_a1, so
    ``reduce_state`` of the result returns the input state exactly.
    Accepts the closed interval K in [0, 1] (boundary states have zero
    actions and are valid data, though not integrable ones).
    """
    K = state.K
    if not 0.0 <= K <= 1.0:
        raise DomainError(f"K={K} outside [0, 1]")
    e2 = params.eps_k * params.eps_k
    return ActionAngleState(
        I_a1=e2 * K,
        I_b1=e2 * (1.0 - K),
        I_a2=0.5 * e2 * K,
        I_b2=0.5 * e2 * (1.0 - K),
        theta_a1=state.phi,
    )


def wrap_angle(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    return pi - (pi - phi) % (2.0 * pi)


def reduce_state(
    aa: ActionAngleState, params: ModelParams
) -> tuple[PhasePlaneState, tuple[float, float, float]]:
    """Phase-plane coordinates and the conserved triple of a four-mode state.

    phi = theta_a1 - theta_b1 + (theta_a2 - theta_b2)/2 wrapped to (-pi, pi];
    K = I_a1 / eps_k^2.  The triple (I_a1+I_b1, I_a2+I_b2, I_b2+I_a1/2) is
    returned for drift monitoring.
    """
    phi = wrap_angle(aa.theta_a1 - aa.theta_b1 + 0.5 * (aa.theta_a2 - aa.theta_b2))
    e2 = params.eps_k * params.eps_k
    K = aa.I_a1 / e2
    triple = (aa.I_a1 + aa.I_b1, aa.I_a2 + aa.I_b2, aa.I_b2 + 0.5 * aa.I_a1)
    return PhasePlaneState(phi=phi, K=K), triple


def full_hamiltonian(aa: ActionAngleState, params: ModelParams, J_extra: float = 0.0) -> float:
    """Model energy of a four-mode state (resonant sextic part).

    H = 6 J^3 - 9 J sum I^2 + 4 sum I^3
        + 18 sqrt(I_a2 I_b2) I_a1 I_b1 cos(2 phi0),

    with J = J_extra + sum I (J_extra carries the actions of any other,
    dynamically frozen, clusters).  The quadratic term sum j^2 I_j of the
    full normal form only adds a uniform angle rotation that cancels in the
    beating combination phi0, so it is omitted here.
    """
    I = aa.actions
    J = J_extra + sum(I)
    phi0 = aa.theta_a1 - aa.theta_b1 + 0.5 * (aa.theta_a2 - aa.theta_b2)
    S2 = sum(x * x for x in I)
    S3 = sum(x * x * x for x in I)
    G = 18.0 * sqrt(aa.I_a2 * aa.I_b2) * aa.I_a1 * aa.I_b1
    return 6.0 * J**3 - 9.0 * J * S2 + 4.0 * S3 + G * cos(2.0 * phi0)


@dataclass
class FullModelTrajectory:
    """Trajectory of the four-mode flow with its conservation log."""

    t: np.ndarray
    I: np.ndarray  # (n, 4): I_a1, I_b1, I_a2, I_b2
    theta: np.ndarray  # (n, 4)
    sol: Callable[[float], np.ndarray]
    drifts: dict[str, float]  # max relative drift of K1, K2, K_half, H
    params: ModelParams
    J_extra: float

    def state(self, t: float) -> ActionAngleState:
        y = self.sol(t)
        return ActionAngleState(*map(float, y))


def _full_rhs(t, y, J_extra):
    I = y[:4]
    Ia1, Ib1, Ia2, Ib2 = I
    phi0 = y[4] - y[5] + 0.5 * (y[6] - y[7])
    # Trial stages of the stepper may probe slightly negative actions while
    # the termination event is being bracketed; clamp the square-root
    # arguments so those out-of-domain evaluations stay finite (the values
    # are unchanged wherever all actions are positive).
    a2 = max(Ia2, 0.0)
    b2 = max(Ib2, 0.0)
    r = sqrt(a2 * b2)
    G = 18.0 * r * Ia1 * Ib1
    base = -2.0 * G * sin(2.0 * phi0)  # dI_a1/dt = +dH/dtheta_a1
    J = J_extra + Ia1 + Ib1 + Ia2 + Ib2
    S2 = Ia1 * Ia1 + Ib1 * Ib1 + Ia2 * Ia2 + Ib2 * Ib2
    c = cos(2.0 * phi0)
    # dG/dI with the square root differentiated analytically; the a2/b2
    # derivatives carry the genuine I^{-1/2} singularity
    tiny = 1e-300
    dG = (
        18.0 * r * Ib1,
        18.0 * r * Ia1,
        9.0 * sqrt(b2 / max(a2, tiny)) * Ia1 * Ib1,
        9.0 * sqrt(a2 / max(b2, tiny)) * Ia1 * Ib1,
    )
    out = np.empty(8)
    out[0] = base
    out[1] = -base
    out[2] = 0.5 * base
    out[3] = -0.5 * base
    for m in range(4):
        Im = I[m]
        out[4 + m] = -(18.0 * J * J - 9.0 * S2 - 18.0 * J * Im + 12.0 * Im * Im + dG[m] * c)
    return out


def full_model_integrate(
    aa0: ActionAngleState,
    params: ModelParams,
    span: tuple[float, float],
    tol: float = 1e-12,
    n_samples: int = 600,
) -> FullModelTrajectory:
    """Integrate the four-mode model flow (the reduction oracle).

    Canonical equations dI/dt = +dH/dtheta, dtheta/dt = -dH/dI of
    ``full_hamiltonian`` -- the same sign convention the reduced system
    uses with K as action and phi as angle.  All four actions must start
    strictly positive; if any action falls to the singular floor during the
    span the run aborts, naming the square-root singularity.  J is split as
    J_extra + sum(I) with J_extra inferred from params, so params with
    C > 9 (other clusters present) are honored exactly.
    """
    I0 = aa0.actions
    if min(I0) <= 0.0:
        raise DomainError("all four actions must be strictly positive")
    J_extra = params.J - sum(I0)

    floor = 1e-12 * max(I0)

    def touching_zero(t, y, J_extra):
        return min(y[:4]) - floor

    touching_zero.terminal = True

    res = solve_ivp(
        _full_rhs,
        span,
        list(I0) + list(aa0.angles),
        method="DOP853",
        rtol=tol,
        atol=tol,
        dense_output=True,
        events=touching_zero,
        args=(J_extra,),
    )
    if res.status == 1:
        raise ActionSingularityError(
            f"an action reached the square-root singularity floor at t={res.t_events[0][0]:.6g}"
        )
    if not res.success:
        raise HeteroclinicError(f"four-mode integration failed ({res.message})")

    t = np.linspace(span[0], span[1], n_samples)
    ys = res.sol(t)
    I = ys[:4].T
    theta = ys[4:].T

    k1 = I[:, 0] + I[:, 1]
    k2 = I[:, 2] + I[:, 3]
    kh = I[:, 3] + 0.5 * I[:, 0]
    H = np.array(
        [full_hamiltonian(ActionAngleState(*row), params, J_extra) for row in ys.T]
    )
    drifts = {
        "K1": float(np.max(np.abs(k1 - k1[0])) / abs(k1[0])),
        "K2": float(np.max(np.abs(k2 - k2[0])) / abs(k2[0])),
        "K_half": float(np.max(np.abs(kh - kh[0])) / abs(kh[0])),
        "H": float(np.max(np.abs(H - H[0])) / max(abs(H[0]), 1e-300)),
    }
    return FullModelTrajectory(
        t=t, I=I, theta=theta, sol=res.sol, drifts=drifts, params=params, J_extra=J_extra
    )
