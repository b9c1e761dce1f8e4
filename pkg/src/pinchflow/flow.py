"""Axisymmetric support-function flow for convex surfaces of revolution.

State is the support function s(theta) on a uniform grid over [0, pi].  The
principal radii split into a meridian radius s'' + s and a rotational radius
cot(theta) s' + s; both collapse to s'' + s at the axis, which the even
ghost-node reflection supplies without one-sided stencils.  Time stepping is
explicit midpoint with a parabolic CFL cap, halving on convexity rejection.

Grids are kept mirror-symmetric bit for bit: the cotangent table and the
built-in initial profiles are constructed on the upper half and reflected,
so an equator-symmetric initial profile stays exactly symmetric under the
flow (the acceptance checks rely on this).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvexityLossError,
    DomainError,
    ResolutionError,
    StepRejectedError,
)
from .speeds import SpeedFunction, _f_derivs, _k_derivs

_trapz = getattr(np, "trapezoid", None) or np.trapz


def _make_grid(n_nodes):
    if n_nodes < 33 or n_nodes % 2 == 0:
        raise ResolutionError(
            f"need an odd node count >= 33 (equator on-grid), got {n_nodes}"
        )
    return np.linspace(0.0, math.pi, n_nodes)


_COT_CACHE = {}


def _cot_table(theta):
    """cot(theta) with exact odd mirror symmetry about the equator; the pole
    entries are never used (the radii formulas switch branch there).  Cached
    per node count — profiles always live on the standard uniform grid."""
    n = theta.size
    c = _COT_CACHE.get(n)
    if c is None:
        h = n // 2
        c = np.zeros(n)
        c[1:h] = np.cos(theta[1:h]) / np.sin(theta[1:h])
        c[h + 1 : n - 1] = -c[1:h][::-1]
        c.setflags(write=False)
        _COT_CACHE[n] = c
    return c


@dataclass
class SupportProfile:
    theta: np.ndarray
    s: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.s = np.asarray(self.s, dtype=float)
        if self.theta.shape != self.s.shape or self.theta.ndim != 1:
            raise DomainError("theta and s must be 1-d arrays of equal length")
        if not np.array_equal(self.theta, _make_grid(self.theta.size)):
            raise DomainError("theta must be the uniform [0, pi] grid")
        if not np.all(self.s > 0):
            raise DomainError("support function must be positive")

    @property
    def n_nodes(self):
        return self.theta.size

    @property
    def dtheta(self):
        return self.theta[1] - self.theta[0]


@dataclass(frozen=True)
class RadiiField:
    r1: np.ndarray  # meridian principal radius s'' + s
    r2: np.ndarray  # rotational principal radius cot * s' + s


def sphere_support(radius, n_nodes=201):
    if not radius > 0:
        raise DomainError("radius must be positive")
    theta = _make_grid(n_nodes)
    return SupportProfile(theta, np.full(n_nodes, float(radius)))


def ellipsoid_support(a, b, n_nodes=201):
    """Support function of the spheroid with semi-axis a along the symmetry
    axis and b across it: s^2 = a^2 cos^2 + b^2 sin^2.  Built on the upper
    half and mirrored so the profile is exactly equator-symmetric."""
    if not (a > 0 and b > 0):
        raise DomainError("semi-axes must be positive")
    theta = _make_grid(n_nodes)
    h = n_nodes // 2
    cos2 = np.cos(theta[: h + 1]) ** 2
    s_half = np.sqrt(b * b + (a * a - b * b) * cos2)
    s = np.concatenate([s_half, s_half[:-1][::-1]])
    return SupportProfile(theta, s)


def ellipsoid_radii(a, b, theta):
    """Closed-form principal radii of the spheroid at support angle theta."""
    theta = np.asarray(theta, dtype=float)
    s = np.sqrt(b * b + (a * a - b * b) * np.cos(theta) ** 2)
    return RadiiField(r1=a * a * b * b / s**3, r2=b * b / s)


def _derivatives(profile):
    s = profile.s
    d = profile.dtheta
    sp = np.empty(s.size + 2)
    sp[1:-1] = s
    sp[0] = s[1]  # even reflection across each pole
    sp[-1] = s[-2]
    s_th = (sp[2:] - sp[:-2]) / (2.0 * d)
    s_thth = (sp[2:] - 2.0 * s + sp[:-2]) / (d * d)
    return s_th, s_thth


def radii_from_support(profile) -> RadiiField:
    """Principal radii on the grid; raises ConvexityLossError when either
    radius is nonpositive anywhere (the flow operator is undefined there)."""
    s = profile.s
    s_th, s_thth = _derivatives(profile)
    r1 = s_thth + s
    r2 = _cot_table(profile.theta) * s_th + s
    r2[0] = r1[0]
    r2[-1] = r1[-1]
    if r1.min() <= 0 or r2.min() <= 0:
        node = int(np.argmin(np.minimum(r1, r2)))
        raise ConvexityLossError(
            f"convexity lost at node {node} (theta={profile.theta[node]:.6f}): "
            f"r1={r1[node]:.6e}, r2={r2[node]:.6e}",
            node=node,
            r1=float(r1[node]),
            r2=float(r2[node]),
        )
    return RadiiField(r1=r1, r2=r2)


def _speed_rate(profile, speed):
    """ds/dt = -k^(-alpha) on the grid."""
    rf = radii_from_support(profile)
    k = _k_derivs(speed.family, float(speed.alpha), rf.r1, rf.r2)[0]
    return -(k ** (-float(speed.alpha)))


def step(profile, speed, dt) -> SupportProfile:
    """One explicit midpoint step, output revalidated.  dt = 0 returns a
    copy; negative/non-finite dt, or a step that loses positivity or
    convexity, is rejected (the caller halves dt)."""
    if not (math.isfinite(dt) and dt >= 0):
        raise StepRejectedError(f"bad time step {dt}")
    if dt == 0.0:
        return SupportProfile(profile.theta, profile.s.copy(), profile.time)
    t_new = profile.time + dt
    try:
        rate0 = _speed_rate(profile, speed)
        mid = SupportProfile(profile.theta, profile.s + 0.5 * dt * rate0)
        rate1 = _speed_rate(mid, speed)
        out = SupportProfile(profile.theta, profile.s + dt * rate1, t_new)
        radii_from_support(out)
    except (DomainError, ConvexityLossError) as err:
        raise StepRejectedError(f"step to t={t_new} rejected: {err}") from err
    return out


def adaptive_dt(profile, speed, safety=0.25):
    """Parabolic cap: safety * dtheta^2 / max(df1 + df2), the trace of the
    linearization's diffusion coefficient."""
    if not 0 < safety <= 0.5:
        raise DomainError("safety must lie in (0, 0.5]")
    rf = radii_from_support(profile)
    fd = _f_derivs(speed.family, float(speed.alpha), rf.r1, rf.r2)
    diff = np.max(fd[1] + fd[2])
    return float(safety * profile.dtheta**2 / diff)


def pinching_sup(rf: RadiiField, alpha):
    """sup of (r2 - r1)^2 / (r1 r2)^alpha over the grid."""
    return float(
        np.max((rf.r2 - rf.r1) ** 2 / (rf.r1 * rf.r2) ** float(alpha))
    )


def _center_estimate(profile):
    """Axial Steiner point: (3/2) integral of s cos sin."""
    th = profile.theta
    return 1.5 * float(_trapz(profile.s * np.cos(th) * np.sin(th), th))


def diagnostics(profile, alpha, speed=None):
    """Per-profile record: pinching sup at exponent alpha, radius extremes,
    per-node max ratio supremum, circumradius/inradius about the axial
    Steiner point (documented estimators, heuristic near strong anisotropy),
    and min |speed| when a speed function is supplied."""
    rf = radii_from_support(profile)
    th = profile.theta
    s = profile.s
    s_th, _ = _derivatives(profile)
    q = _center_estimate(profile)
    x = s * np.sin(th) + s_th * np.cos(th)
    z = s * np.cos(th) - s_th * np.sin(th)
    circum = float(np.max(np.hypot(x, z - q)))
    inrad = float(np.min(s - q * np.cos(th)))
    out = {
        "alpha": float(alpha),
        "pinch_sup": pinching_sup(rf, alpha),
        "min_radius": float(np.minimum(rf.r1, rf.r2).min()),
        "max_radius": float(np.maximum(rf.r1, rf.r2).max()),
        "max_ratio": float(
            max(np.max(rf.r1 / rf.r2), np.max(rf.r2 / rf.r1))
        ),
        "min_support": float(s.min()),
        "max_support": float(s.max()),
        "center_z": q,
        "circumradius": circum,
        "inradius": inrad,
        "roundness": circum / inrad,
    }
    if speed is not None:
        k = _k_derivs(speed.family, float(speed.alpha), rf.r1, rf.r2)[0]
        out["min_abs_speed"] = float(np.min(k ** (-float(speed.alpha))))
    return out


@dataclass(frozen=True)
class FlowRecord:
    step: int
    t: float
    dt: float
    min_support: float
    max_support: float
    pinch_sup: float
    min_radius: float
    max_radius: float
    max_ratio: float
    circumradius: float
    inradius: float
    min_abs_speed: float
    center_z: float

    def row(self):
        return tuple(getattr(self, c) for c in TRACE_COLUMNS)


TRACE_COLUMNS = (
    "step",
    "t",
    "dt",
    "min_support",
    "max_support",
    "pinch_sup",
    "min_radius",
    "max_radius",
    "max_ratio",
    "circumradius",
    "inradius",
    "min_abs_speed",
    "center_z",
)


@dataclass
class FlowConfig:
    family: str
    alpha: float
    a: float = 1.0  # polar semi-axis of the initial spheroid
    b: float = 1.0  # equatorial semi-axis
    n_nodes: int = 201
    safety: float = 0.25
    stop_fraction: float = 0.05
    max_steps: int = 2_000_000
    record_every: int = 100

    def __post_init__(self):
        SpeedFunction(self.family, self.alpha)  # validates family/alpha
        _make_grid(self.n_nodes)  # validates the node count
        if not self.a > 0 or not self.b > 0:
            raise DomainError("semi-axes a, b must be positive")
        if not 0 < self.safety <= 0.5:
            raise DomainError("safety must lie in (0, 0.5]")
        if not 0 < self.stop_fraction <= 0.2:
            raise DomainError("stop_fraction must lie in (0, 0.2]")
        if self.record_every < 1 or self.max_steps < 1:
            raise DomainError("record_every and max_steps must be >= 1")

    def speed(self):
        return SpeedFunction(self.family, self.alpha)

    def initial_profile(self):
        return ellipsoid_support(self.a, self.b, self.n_nodes)


@dataclass
class FlowTrace:
    config: FlowConfig
    records: list
    status: str  # extinct_fraction | max_steps | convexity_loss
    steps: int
    t_final: float
    profile: SupportProfile
    initial_min_support: float
    # terminal fields, filled once the stop fraction is reached
    t_extinct: float = None
    extinction_center: float = None
    extinction_low_confidence: bool = None
    deviation: float = None

    def summary_dict(self):
        return {
            "config": {
                "family": self.config.family,
                "alpha": self.config.alpha,
                "a": self.config.a,
                "b": self.config.b,
                "n_nodes": self.config.n_nodes,
                "safety": self.config.safety,
                "stop_fraction": self.config.stop_fraction,
                "max_steps": self.config.max_steps,
                "record_every": self.config.record_every,
            },
            "status": self.status,
            "steps": self.steps,
            "t_final": self.t_final,
            "initial_min_support": self.initial_min_support,
            "t_extinct": self.t_extinct,
            "extinction_center": self.extinction_center,
            "extinction_low_confidence": self.extinction_low_confidence,
            "deviation": self.deviation,
        }

    def to_json_dict(self):
        out = self.summary_dict()
        out["records"] = [r.row() for r in self.records]
        out["columns"] = list(TRACE_COLUMNS)
        return out


def _record(records, n, t, dt, profile, alpha, speed):
    d = diagnostics(profile, alpha, speed=speed)
    records.append(
        FlowRecord(
            step=n,
            t=t,
            dt=dt,
            min_support=d["min_support"],
            max_support=d["max_support"],
            pinch_sup=d["pinch_sup"],
            min_radius=d["min_radius"],
            max_radius=d["max_radius"],
            max_ratio=d["max_ratio"],
            circumradius=d["circumradius"],
            inradius=d["inradius"],
            min_abs_speed=d["min_abs_speed"],
            center_z=d["center_z"],
        )
    )


def run(config: FlowConfig, profile=None) -> FlowTrace:
    """Integrate until the minimum support drops below stop_fraction of its
    initial value (or max_steps).  A convexity loss that survives eight dt
    halvings aborts with the partial trace attached to the exception.

    The loop works on bare arrays with a cached cotangent table — the
    per-step dataclass and trig rebuild costs dominate otherwise.
    """
    alpha = float(config.alpha)
    fam = config.family
    speed = config.speed()
    if profile is None:
        profile = config.initial_profile()
    theta = profile.theta
    cot = _cot_table(theta)
    d = profile.dtheta
    d2 = d * d
    safety = config.safety

    def radii(arr):
        sp = np.empty(arr.size + 2)
        sp[1:-1] = arr
        sp[0] = arr[1]
        sp[-1] = arr[-2]
        r1 = (sp[2:] - 2.0 * arr + sp[:-2]) / d2 + arr
        r2 = cot * (sp[2:] - sp[:-2]) / (2.0 * d) + arr
        r2[0] = r1[0]
        r2[-1] = r1[-1]
        return r1, r2

    records = []
    t = 0.0
    n = 0
    dt = 0.0
    s = profile.s.copy()
    s0_min = float(s.min())
    target = config.stop_fraction * s0_min
    r1, r2 = radii(s)
    status = None
    while True:
        if r1.min() <= 0 or r2.min() <= 0:
            err = ConvexityLossError(
                f"convexity lost at t={t:.6e}",
                node=int(np.argmin(np.minimum(r1, r2))),
            )
            err.trace = _partial(config, records, n, t, SupportProfile(theta, s, t))
            raise err
        if n == 0:
            _record(records, n, t, dt, profile, alpha, speed)
        kd = _k_derivs(fam, alpha, r1, r2)
        k = kd[0]
        a = k ** (-(1.0 + alpha))
        dt = safety * d2 / float(np.max(alpha * a * (kd[1] + kd[2])))
        rate0 = -(a * k)
        accepted = False
        for _ in range(8):
            s_mid = s + (0.5 * dt) * rate0
            rm1, rm2 = radii(s_mid)
            if rm1.min() <= 0 or rm2.min() <= 0:
                dt *= 0.5
                continue
            k_mid = _k_derivs(fam, alpha, rm1, rm2)[0]
            s_new = s + dt * (-(k_mid ** (-alpha)))
            rn1, rn2 = radii(s_new)
            if rn1.min() <= 0 or rn2.min() <= 0 or s_new.min() <= 0:
                dt *= 0.5
                continue
            accepted = True
            break
        if not accepted:
            err = ConvexityLossError(
                f"convexity lost at t={t:.6e} despite dt halving", node=-1
            )
            err.trace = _partial(config, records, n, t, SupportProfile(theta, s, t))
            raise err
        s, r1, r2 = s_new, rn1, rn2
        t += dt
        n += 1
        if n % config.record_every == 0:
            _record(records, n, t, dt, SupportProfile(theta, s.copy(), t), alpha, speed)
        if float(s.min()) <= target:
            status = "extinct_fraction"
            break
        if n >= config.max_steps:
            status = "max_steps"
            break
    final = SupportProfile(theta, s.copy(), t)
    if records[-1].step != n:
        _record(records, n, t, dt, final, alpha, speed)
    trace = FlowTrace(
        config=config,
        records=records,
        status=status,
        steps=n,
        t_final=t,
        profile=final,
        initial_min_support=s0_min,
    )
    if status == "extinct_fraction":
        est = extinction_estimate(trace)
        trace.t_extinct = est.t_extinct
        trace.extinction_center = est.center_z
        trace.extinction_low_confidence = est.low_confidence
        if t < est.t_extinct:
            trace.deviation = rescale_deviation(
                final, est.t_extinct, t, alpha, q=est.center_z
            )
    return trace


def _partial(config, records, n, t, profile):
    return FlowTrace(
        config=config,
        records=list(records),
        status="convexity_loss",
        steps=n,
        t_final=t,
        profile=profile,
        initial_min_support=records[0].min_support if records else float("nan"),
    )


def sphere_radius_law(rho0, alpha, t):
    """Exact shrinking-sphere radius: rho^(alpha+1) decreases linearly."""
    val = rho0 ** (alpha + 1.0) - (alpha + 1.0) * t
    if val <= 0:
        raise DomainError("time at or beyond extinction")
    return val ** (1.0 / (alpha + 1.0))


def sphere_extinction_time(rho0, alpha):
    return rho0 ** (alpha + 1.0) / (alpha + 1.0)


@dataclass(frozen=True)
class ExtinctionEstimate:
    t_extinct: float
    slope: float
    rows_used: int
    center_z: float
    low_confidence: bool

    def to_json_dict(self):
        return {
            "t_extinct": self.t_extinct,
            "slope": self.slope,
            "rows_used": self.rows_used,
            "center_z": self.center_z,
            "low_confidence": self.low_confidence,
        }


def extinction_estimate(trace: FlowTrace) -> ExtinctionEstimate:
    """Extrapolated extinction time from the tail of the recorded trace.

    min_support^(alpha+1) decays asymptotically linearly in t (exactly so
    for spheres), so a straight-line fit over the final tenth of the records
    extrapolates to zero.  The flag goes up when the tail is too short or
    the fitted slope fails to be negative.
    """
    alpha = float(trace.config.alpha)
    ts = np.array([r.t for r in trace.records])
    ms = np.array([r.min_support for r in trace.records])
    k = max(5, len(ts) // 10)
    tail_t, tail_y = ts[-k:], ms[-k:] ** (alpha + 1.0)
    low = len(ts) < 5
    if len(tail_t) >= 2 and np.ptp(tail_t) > 0:
        slope, intercept = np.polyfit(tail_t, tail_y, 1)
    else:
        slope, intercept = 0.0, float(tail_y[-1])
        low = True
    if slope >= 0:
        low = True
        t_ext = float(tail_t[-1])
    else:
        t_ext = float(-intercept / slope)
        if t_ext <= tail_t[-1]:
            low = True
    return ExtinctionEstimate(
        t_extinct=t_ext,
        slope=float(slope),
        rows_used=int(len(tail_t)),
        center_z=float(trace.records[-1].center_z),
        low_confidence=bool(low),
    )


def rescale_deviation(profile, t_extinct, t, alpha, q=0.0):
    """max |s~ - 1| of the profile recentered at the axial point q and
    rescaled by the exact shrinking-sphere radius with extinction at
    t_extinct."""
    if not t < t_extinct:
        raise DomainError(f"t={t} is at or beyond extinction {t_extinct}")
    rho = ((alpha + 1.0) * (t_extinct - t)) ** (1.0 / (alpha + 1.0))
    recentered = profile.s - q * np.cos(profile.theta)
    return float(np.max(np.abs(recentered / rho - 1.0)))


def pinching_drift(values):
    """Largest excursion of the sequence above its running minimum — zero
    for a monotonically nonincreasing sequence."""
    values = np.asarray(values, dtype=float)
    running = np.minimum.accumulate(values)
    return float(np.max(values - running))
