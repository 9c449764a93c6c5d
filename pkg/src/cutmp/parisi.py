"""Zero-temperature Parisi PDE solver and functional minimization.

The order parameter is a nondecreasing step function.  On each interval
where it is constant the PDE linearizes to the backward heat equation
through an exponential change of variables, so the solve propagates by
discrete Gaussian convolution: unconditionally stable and spectrally
accurate.  The first backward step from the |x| terminal condition is
done with the exact closed form to avoid sampling the kink.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

from . import rng

DEFAULT_M_T = 512
DEFAULT_M_X = 2049
DEFAULT_X_MAX = 8.0


class OptimizationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GammaStep:
    """Step function gamma(t) = values[j] on [breakpoints[j], breakpoints[j+1]),
    right-continuous, with an implicit final breakpoint at t = 1."""
    breakpoints: np.ndarray  # sorted, breakpoints[0] == 0.0
    values: np.ndarray       # nondecreasing, nonnegative

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if b.ndim != 1 or v.ndim != 1 or b.size != v.size or b.size == 0:
            raise ValueError("breakpoints and values must be 1d of equal length")
        if b[0] != 0.0 or np.any(np.diff(b) <= 0) or b[-1] > 1.0:
            raise ValueError("breakpoints must start at 0, increase, stay <= 1")
        if v[0] < 0 or np.any(np.diff(v) < 0):
            raise ValueError("values must be nonnegative and nondecreasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        idx = np.minimum(np.searchsorted(self.breakpoints, t, side="right") - 1,
                         self.values.size - 1)
        return self.values[idx]

    def correction_integral(self):
        """Closed form of (1/2) * int_0^1 t*gamma(t) dt."""
        b = np.append(self.breakpoints, 1.0)
        return 0.25 * float(np.sum(self.values * (b[1:] ** 2 - b[:-1] ** 2)))

    @staticmethod
    def constant(g):
        return GammaStep(np.array([0.0]), np.array([float(g)]))


@dataclass(frozen=True)
class ParisiSolution:
    gamma: GammaStep
    t_grid: np.ndarray = field(repr=False)
    x_grid: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    phi_x: np.ndarray = field(repr=False)
    phi_xx: np.ndarray = field(repr=False)

    @property
    def x_max(self):
        return float(self.x_grid[-1])

    @property
    def dx(self):
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def dt(self):
        return float(self.t_grid[1] - self.t_grid[0])

    def value_at_origin(self):
        return float(self.phi[0, (self.x_grid.size - 1) // 2])

    def interp(self, arr, t, x):
        """Bilinear interpolation of one of the phi arrays at (t, x);
        x is clamped to the grid (the caller counts clamps if it cares)."""
        ti = np.clip(t / self.dt, 0.0, self.t_grid.size - 1 - 1e-12)
        i0 = np.floor(ti).astype(int)
        ft = ti - i0
        xi = np.clip((np.asarray(x) + self.x_max) / self.dx, 0.0,
                     self.x_grid.size - 1 - 1e-12)
        j0 = np.floor(xi).astype(int)
        fx = xi - j0
        a = arr[i0, j0] * (1 - fx) + arr[i0, j0 + 1] * fx
        b = arr[i0 + 1, j0] * (1 - fx) + arr[i0 + 1, j0 + 1] * fx
        return a * (1 - ft) + b * ft


def _exact_step(g, x, s):
    """Closed-form one-step solution from the |x| terminal condition:
    Phi(1-s^2, x) for constant gamma = g over the step."""
    if g == 0.0:
        return (s * np.sqrt(2 / np.pi) * np.exp(-x ** 2 / (2 * s * s))
                + x * (1 - 2 * norm.cdf(-x / s)))
    la = g * x + 0.5 * g * g * s * s + norm.logcdf((x + g * s * s) / s)
    lb = -g * x + 0.5 * g * g * s * s + norm.logcdf((-x + g * s * s) / s)
    m = np.maximum(la, lb)
    return (m + np.log(np.exp(la - m) + np.exp(lb - m))) / g


def solve_pde(gamma, m_t=DEFAULT_M_T, m_x=DEFAULT_M_X, x_max=DEFAULT_X_MAX):
    """Solve the Parisi PDE backward from Phi(1, x) = |x| on a uniform grid.

    Returns a ParisiSolution with phi, phi_x, phi_xx on the full
    (m_t+1) x m_x grid.  Beyond x_max the solution is extended linearly
    with slope +-1, which is exact for the |x| terminal condition.
    """
    if m_t < 64 or m_x < 64:
        raise ValueError("need m_t, m_x >= 64")
    if x_max < 6:
        raise ValueError("need x_max >= 6")
    t = np.linspace(0.0, 1.0, m_t + 1)
    x = np.linspace(-x_max, x_max, m_x)
    dx = x[1] - x[0]
    dt = 1.0 / m_t
    sig = np.sqrt(dt)
    half = int(np.ceil(8 * sig / dx))
    offs = np.arange(-half, half + 1)
    kernel = np.exp(-0.5 * (offs * dx / sig) ** 2)
    kernel /= kernel.sum()
    lpad = dx * np.arange(half, 0, -1)   # linear tails, slope -1 left / +1 right
    rpad = dx * np.arange(1, half + 1)

    gmax = float(gamma.values[-1])
    if gmax * (2 * x_max + 2) > 600:
        raise FloatingPointError("gamma too large for log-domain convolution")

    phi = np.empty((m_t + 1, m_x))
    phi[m_t] = np.abs(x)
    phi[m_t - 1] = _exact_step(float(gamma(t[m_t - 1])), x, sig)
    for i in range(m_t - 2, -1, -1):
        g = float(gamma(t[i]))
        f = phi[i + 1]
        fp = np.concatenate([f[0] + lpad, f, f[-1] + rpad])
        if g == 0.0:
            phi[i] = np.convolve(fp, kernel, mode="valid")
        else:
            shift = fp.max()
            conv = np.convolve(np.exp(g * (fp - shift)), kernel, mode="valid")
            phi[i] = shift + np.log(conv) / g

    phi_x = np.empty_like(phi)
    phi_x[:, 1:-1] = (phi[:, 2:] - phi[:, :-2]) / (2 * dx)
    phi_x[:, 0] = -1.0
    phi_x[:, -1] = 1.0
    phi_xx = np.empty_like(phi)
    phi_xx[:, 1:-1] = (phi[:, 2:] - 2 * phi[:, 1:-1] + phi[:, :-2]) / dx ** 2
    phi_xx[:, 0] = phi_xx[:, 1]
    phi_xx[:, -1] = phi_xx[:, -2]
    return ParisiSolution(gamma=gamma, t_grid=t, x_grid=x,
                          phi=phi, phi_x=phi_x, phi_xx=phi_xx)


def parisi_value(sol):
    """P(gamma) = Phi(0,0) minus the closed-form correction integral."""
    return sol.value_at_origin() - sol.gamma.correction_integral()


def cole_hopf_reference(g, t, x):
    """Independent closed form for constant gamma:
    (1/g) log E exp(g |x + G sqrt(1-t)|), the g=0 limit being E|x + G sqrt(1-t)|."""
    s = np.sqrt(1.0 - t)
    return _exact_step(float(g), np.asarray(x, dtype=float), s)


def optimize_gamma(m, budget=5000, seed=0, m_t=256, m_x=1025, x_max=7.0,
                   n_restarts=3):
    """Minimize P over m-step gamma with uniform breakpoints.

    Values are parameterized as cumulative sums of squares, which keeps
    the Nelder-Mead search unconstrained while enforcing monotonicity.
    Returns (GammaStep, P value at the search grid).
    """
    if m < 1:
        raise ValueError("need m >= 1")
    breakpoints = np.arange(m) / m
    baseline = parisi_value(solve_pde(GammaStep.constant(0.0), m_t, m_x, x_max))
    nfev = 0

    def objective(c):
        nonlocal nfev
        nfev += 1
        vals = np.cumsum(c ** 2)
        if vals[-1] * (2 * x_max + 2) > 600:
            return 10.0 + vals[-1]
        sol = solve_pde(GammaStep(breakpoints, vals), m_t, m_x, x_max)
        return parisi_value(sol)

    gen = rng.stream(seed, rng.TAG_OPTIMIZER)
    x0 = np.sqrt(np.linspace(0.1, 0.5, m))
    best_x, best_f = x0, objective(x0)
    for _ in range(n_restarts):
        left = budget - nfev
        if left <= 2 * m:
            break
        res = minimize(objective, x0, method="Nelder-Mead",
                       options=dict(maxfev=left // max(1, n_restarts - _),
                                    xatol=1e-5, fatol=1e-7))
        if res.fun < best_f:
            best_x, best_f = res.x, res.fun
        x0 = best_x * (1 + 0.05 * gen.standard_normal(m))
    if best_f >= baseline:
        warnings.warn("search did not improve on gamma = 0",
                      OptimizationWarning)
    return GammaStep(breakpoints, np.cumsum(best_x ** 2)), float(best_f)


@dataclass(frozen=True)
class SdePaths:
    h: float
    t_grid: np.ndarray = field(repr=False)
    paths: np.ndarray = field(repr=False)       # (n_steps+1, n_paths)
    increments: np.ndarray = field(repr=False)  # Brownian increments, same t spacing
    clamped_fraction: float = 0.0


def simulate_sde(sol, n_paths, h=None, seed=0):
    """Euler-Maruyama for dX = gamma(t) phi_x(t, X) dt + dB, X_0 = 0."""
    if h is None:
        h = sol.dt
    if h > sol.dt + 1e-12:
        raise ValueError("step h must not exceed the PDE time step")
    n_steps = int(round(1.0 / h))
    gen = rng.stream(seed, rng.TAG_SDE)
    t = np.linspace(0.0, 1.0, n_steps + 1)
    X = np.zeros((n_steps + 1, n_paths))
    dB = np.sqrt(h) * gen.standard_normal((n_steps, n_paths))
    clamped = 0
    for i in range(n_steps):
        drift = sol.gamma(t[i]) * sol.interp(sol.phi_x, t[i], X[i])
        nxt = X[i] + drift * h + dB[i]
        out = np.abs(nxt) > sol.x_max
        clamped += int(out.sum())
        X[i + 1] = np.clip(nxt, -sol.x_max, sol.x_max)
    frac = clamped / (n_steps * n_paths)
    if frac > 0.01:
        warnings.warn(f"{100*frac:.2f}% of SDE increments clamped at the grid edge")
    return SdePaths(h=h, t_grid=t, paths=X, increments=dB, clamped_fraction=frac)


@dataclass(frozen=True)
class IdentityReport:
    t_grid: np.ndarray
    second_moment: np.ndarray       # E[phi_xx(t, X_t)^2] per t
    second_moment_se: np.ndarray
    first_moment: np.ndarray        # E[phi_xx(t, X_t)] per t
    first_moment_se: np.ndarray
    time_integral: float            # trapezoid of first_moment over [0, 1]
    time_integral_se: float
    parisi_value: float

    def at_time(self, tv):
        i = int(round(tv / (self.t_grid[1] - self.t_grid[0])))
        return self.second_moment[i], self.second_moment_se[i]


def check_identities(sol, paths):
    """Monte Carlo estimates of the two optimal-gamma identities:
    E[phi_xx(t,X_t)^2] per time and the time integral of E[phi_xx(t,X_t)]."""
    t = paths.t_grid
    n = paths.paths.shape[1]
    m1 = np.empty(t.size)
    s1 = np.empty(t.size)
    m2 = np.empty(t.size)
    s2 = np.empty(t.size)
    acc = np.zeros(n)  # per-path trapezoid accumulator for the SE of the integral
    h = t[1] - t[0]
    for i, tv in enumerate(t):
        a = sol.interp(sol.phi_xx, tv, paths.paths[i])
        m1[i] = a.mean()
        s1[i] = a.std(ddof=1) / np.sqrt(n)
        a2 = a * a
        m2[i] = a2.mean()
        s2[i] = a2.std(ddof=1) / np.sqrt(n)
        w = h if 0 < i < t.size - 1 else h / 2
        acc += w * a
    return IdentityReport(t_grid=t, second_moment=m2, second_moment_se=s2,
                          first_moment=m1, first_moment_se=s1,
                          time_integral=float(acc.mean()),
                          time_integral_se=float(acc.std(ddof=1) / np.sqrt(n)),
                          parisi_value=parisi_value(sol))


def save_solution(sol, path):
    """Serialize a ParisiSolution to .npz; bit-exact round trip."""
    np.savez(path, breakpoints=sol.gamma.breakpoints, values=sol.gamma.values,
             t_grid=sol.t_grid, x_grid=sol.x_grid, phi=sol.phi,
             phi_x=sol.phi_x, phi_xx=sol.phi_xx)


def load_solution(path):
    with np.load(path) as d:
        return ParisiSolution(gamma=GammaStep(d["breakpoints"], d["values"]),
                              t_grid=d["t_grid"], x_grid=d["x_grid"],
                              phi=d["phi"], phi_x=d["phi_x"], phi_xx=d["phi_xx"])
