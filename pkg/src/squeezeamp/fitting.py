"""Analysis pipeline: Fock-population extraction from sideband Rabi traces,
parameterized state fits, fringe fits, and projection-noise statistics.

All weighted fits use binomial shot-noise weights sigma^2 = P(1-P)/shots and
report stderr as the square root of the diagonal of (J^T W J)^{-1} at the
optimum.
"""

from dataclasses import dataclass, field
import io
import json
import math

import numpy as np
import scipy.optimize

from . import gaussian, spinmotion
from .errors import ConvergenceError, DimensionMismatchError

SCHEMA_VERSION = 1

MODEL_TAGS = ("unconstrained", "coherent", "squeezed", "displaced_squeezed", "sinusoid")

#: Probability floor when converting P(1-P)/shots into weights.
_P_FLOOR = 1e-3


@dataclass(frozen=True)
class RabiTrace:
    """Sideband Rabi record: times (s), measured P_down, shots per point."""

    times: np.ndarray
    pdown: np.ndarray
    shots_per_point: int

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        pdown = np.asarray(self.pdown, dtype=float)
        if times.shape != pdown.shape or times.ndim != 1:
            raise DimensionMismatchError("times and pdown must be equal-length vectors")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.shots_per_point < 1:
            raise ValueError("shots_per_point must be >= 1")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "pdown", pdown)

    def to_csv(self):
        """CSV with header t_us,p_down,shots."""
        buf = io.StringIO()
        buf.write("t_us,p_down,shots\n")
        for t, p in zip(self.times, self.pdown):
            buf.write(f"{t * 1e6:.12g},{p:.12g},{self.shots_per_point}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "t_us,p_down,shots":
            raise ValueError("trace CSV must start with header t_us,p_down,shots")
        times, pdown, shots = [], [], []
        for ln in lines[1:]:
            t_us, p, s = ln.split(",")
            times.append(float(t_us) * 1e-6)
            pdown.append(float(p))
            shots.append(int(s))
        if len(set(shots)) > 1:
            raise ValueError("trace CSV must use a single shots value")
        return cls(np.array(times), np.array(pdown), shots[0])


@dataclass(frozen=True)
class FitResult:
    """Fit output: named parameters, covariance, stderr, residual norm."""

    model_tag: str
    param_names: tuple
    params: np.ndarray
    covariance: np.ndarray
    residual_norm: float

    def __post_init__(self):
        if self.model_tag not in MODEL_TAGS:
            raise ValueError(f"unknown model_tag {self.model_tag!r}")
        params = np.asarray(self.params, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        k = params.size
        if cov.shape != (k, k) or len(self.param_names) != k:
            raise DimensionMismatchError("params, names, and covariance sizes disagree")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "param_names", tuple(self.param_names))

    @property
    def stderr(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def param(self, name):
        return float(self.params[self.param_names.index(name)])

    def error(self, name):
        return float(self.stderr[self.param_names.index(name)])

    def to_json(self):
        payload = {
            "schema_version": SCHEMA_VERSION,
            "model_tag": self.model_tag,
            "params": {n: float(v) for n, v in zip(self.param_names, self.params)},
            "stderr": {n: float(v) for n, v in zip(self.param_names, self.stderr)},
            "param_order": list(self.param_names),
            "covariance_row_major": [float(v) for v in self.covariance.ravel()],
            "residual_norm": float(self.residual_norm),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        if payload.get("schema_version") != SCHEMA_VERSION:
            raise ValueError("unsupported fit-result schema version")
        names = tuple(payload["param_order"])
        params = np.array([payload["params"][n] for n in names])
        k = len(names)
        cov = np.array(payload["covariance_row_major"], dtype=float).reshape(k, k)
        return cls(payload["model_tag"], names, params, cov, payload["residual_norm"])


def nyquist_check(times, omega, nmax):
    """Reject sampling too coarse for the fastest component Omega sqrt(nmax+1)."""
    dt = float(np.max(np.diff(np.asarray(times, dtype=float))))
    limit = math.pi / (omega * math.sqrt(nmax + 1.0))
    if dt > limit:
        raise ValueError(
            f"sampling interval {dt:.3e} s exceeds the Nyquist limit {limit:.3e} s "
            f"for n up to {nmax}"
        )


def _binomial_sigma(p, shots):
    p = np.clip(np.asarray(p, dtype=float), _P_FLOOR, 1.0 - _P_FLOOR)
    return np.sqrt(p * (1.0 - p) / shots)


def _design_matrix(times, omega, gamma, nmax):
    root = np.sqrt(np.arange(nmax) + 1.0)
    t = np.asarray(times)[:, None]
    return 0.5 * np.exp(-gamma * root * t) * np.cos(omega * root * t)


def _kkt_polish(A, b, x, max_iters=200):
    """Active-set polish of min ||Ax-b||^2 s.t. x >= 0, sum(x) <= 1.

    Returns (x, kkt_residual).  Stationarity: grad_i = -lam (free), >= -lam
    (at zero), with lam >= 0 the multiplier of the sum constraint (0 when
    inactive); grad = 2 A^T (Ax - b).  Moves along the line from the current
    feasible point to the subproblem optimum, stopping at the first bound
    (ratio test), which keeps the objective monotone and prevents cycling.
    """
    n = x.size
    ata = 2 * (A.T @ A)
    atb = 2 * (A.T @ b)
    # weighted design matrices can be huge; measure optimality relative to scale
    scale = max(2.0, float(np.max(np.abs(atb))))
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    if x.sum() > 1.0:
        x = x / x.sum()
    free = x > 1e-12
    sum_active = x.sum() >= 1.0 - 1e-10
    for _ in range(max_iters):
        idx = np.flatnonzero(free)
        lam = 0.0
        if idx.size == 0:
            xf = np.zeros(0)
        elif sum_active:
            # KKT system with equality sum(x_free) = 1
            k = idx.size
            mat = np.zeros((k + 1, k + 1))
            mat[:k, :k] = ata[np.ix_(idx, idx)]
            mat[:k, k] = 1.0
            mat[k, :k] = 1.0
            rhs = np.concatenate([atb[idx], [1.0]])
            sol = np.linalg.solve(mat, rhs)
            xf, lam = sol[:k], sol[k]
        else:
            xf = np.linalg.solve(ata[np.ix_(idx, idx)], atb[idx])
        if sum_active and lam < -1e-10 * scale:
            # negative multiplier: the sum constraint should not be active
            sum_active = False
            continue
        target = np.zeros(n)
        target[idx] = xf
        if np.any(xf < -1e-12) or (not sum_active and target.sum() > 1.0 + 1e-10):
            # partial step: stop at the first variable or budget bound hit
            d = target - x
            t = 1.0
            blocking = (d < 0) & (x > 0)
            if np.any(blocking):
                t = min(t, float(np.min(x[blocking] / -d[blocking])))
            if not sum_active and d.sum() > 0:
                t_sum = (1.0 - x.sum()) / d.sum()
                if t_sum < t:
                    t = t_sum
                    sum_active = True
            x = np.clip(x + t * d, 0.0, None)
            free = x > 1e-12
            continue
        x = target
        grad = ata @ x - atb
        # stationarity is grad = -lam on the free set, grad >= -lam at zero
        viol = (grad + lam) / scale
        zero = ~free
        worst = float(np.min(viol[zero])) if np.any(zero) else 0.0
        free_stat = float(np.max(np.abs(viol[free]))) if np.any(free) else 0.0
        kkt = max(free_stat, -min(worst, 0.0))
        if worst < -1e-10:
            # bring the most violating variable into the free set
            enter = int(np.argmin(np.where(zero, viol, np.inf)))
            free[enter] = True
            continue
        return x, kkt
    raise ConvergenceError("population active-set polish did not converge")


def extract_populations(trace, omega, gamma, nmax):
    """Nonnegative Fock populations from a sideband Rabi trace.

    Solves the linear model P_down(t) - 1/2 = sum_n p_n M_n(t) subject to
    p >= 0 and sum p <= 1, then polishes the active set until the KKT
    residual is below 1e-8.
    """
    nyquist_check(trace.times, omega, nmax)
    M = _design_matrix(trace.times, omega, gamma, nmax)
    sigma = _binomial_sigma(trace.pdown, trace.shots_per_point)
    A = M / sigma[:, None]
    b = (trace.pdown - 0.5) / sigma
    if np.linalg.matrix_rank(A) < min(A.shape) // 2:
        raise ValueError("design matrix is badly rank-deficient; add time points")
    x0, _ = scipy.optimize.nnls(A, b)
    if x0.sum() > 1.0:
        aug = np.vstack([A, 1e6 * np.ones((1, nmax))])
        x0, _ = scipy.optimize.nnls(aug, np.concatenate([b, [1e6]]))
    x, kkt = _kkt_polish(A, b, x0)
    if kkt > 1e-8:
        raise ConvergenceError(f"population fit KKT residual {kkt:.2e} > 1e-8")
    resid = A @ x - b
    cov = _pinv_covariance(A, free=x > 1e-12)
    names = tuple(f"p{n}" for n in range(nmax))
    return FitResult("unconstrained", names, x, cov, float(np.linalg.norm(resid)))


def _pinv_covariance(J, free=None):
    """(J^T J)^{-1} on the free columns, zero elsewhere (J already weighted)."""
    k = J.shape[1]
    cov = np.zeros((k, k))
    if free is None:
        free = np.ones(k, dtype=bool)
    idx = np.flatnonzero(free)
    if idx.size:
        block = J[:, idx]
        cov[np.ix_(idx, idx)] = np.linalg.pinv(block.T @ block)
    return cov


def model_populations(model, params, nmax):
    """Ideal Fock populations for the named state model."""
    if model == "coherent":
        (alpha,) = params
        return gaussian.displaced_squeezed_populations(
            gaussian.Displacement(abs(alpha)), gaussian.SqueezeParam(0.0), nmax
        )
    if model == "squeezed":
        (r,) = params
        return gaussian.displaced_squeezed_populations(
            gaussian.Displacement(0.0), gaussian.SqueezeParam(abs(r)), nmax
        )
    if model == "displaced_squeezed":
        alpha, r, theta = params
        return gaussian.displaced_squeezed_populations(
            gaussian.Displacement(abs(alpha)), gaussian.SqueezeParam(abs(r), theta), nmax
        )
    raise ValueError(f"unknown state model {model!r}")


_MODEL_PARAMS = {
    "coherent": ("alpha",),
    "squeezed": ("r",),
    "displaced_squeezed": ("alpha", "r", "theta"),
}


def fit_state_model(trace, model, init, nmax=None, fit_omega=True, fit_gamma=True,
                    n_starts=5, seed=0):
    """Nonlinear least-squares fit of a parameterized state to a Rabi trace.

    `init` maps parameter names to starting values and must include the
    state parameters plus omega and gamma (shared nuisance parameters,
    frozen unless fit_omega/fit_gamma).  Multi-start Levenberg-Marquardt;
    the lowest-residual converged start wins, index order breaking ties.
    """
    if model not in _MODEL_PARAMS:
        raise ValueError(f"unknown state model {model!r}")
    state_names = _MODEL_PARAMS[model]
    names = list(state_names)
    if fit_omega:
        names.append("omega")
    if fit_gamma:
        names.append("gamma")
    missing = [n for n in list(state_names) + ["omega", "gamma"] if n not in init]
    if missing:
        raise ValueError(f"init missing parameters: {missing}")
    if nmax is None:
        nmax = _default_nmax(model, init)
    nyquist_check(trace.times, init["omega"] * 1.2, nmax)
    sigma = _binomial_sigma(trace.pdown, trace.shots_per_point)

    def unpack(vec):
        vals = dict(zip(names, vec))
        omega = vals.get("omega", init["omega"])
        gamma = abs(vals.get("gamma", init["gamma"]))
        state = [vals[n] for n in state_names]
        return state, omega, gamma

    def residuals(vec):
        state, omega, gamma = unpack(vec)
        pops = model_populations(model, state, nmax)
        signal = spinmotion.bsb_signal(pops, omega, gamma, trace.times)
        return (signal - trace.pdown) / sigma

    rng = np.random.default_rng(seed)
    x0 = np.array([init[n] for n in names], dtype=float)
    scales = np.where(np.abs(x0) > 1e-9, np.abs(x0), 1.0)
    best = None
    for start in range(max(n_starts, 1)):
        if start == 0:
            guess = x0.copy()
        else:
            guess = x0 * (1.0 + 0.2 * rng.uniform(-1, 1, size=x0.size))
        try:
            sol = scipy.optimize.least_squares(
                residuals, guess, method="lm", x_scale=scales, xtol=1e-14, ftol=1e-14,
                max_nfev=4000,
            )
        except Exception:
            continue
        if not sol.success:
            continue
        if best is None or sol.cost < best.cost - 1e-15:
            best = sol
    if best is None:
        raise ConvergenceError(f"{model} fit failed to converge from {n_starts} starts")
    params = best.x.copy()
    # report magnitudes for sign-symmetric parameters
    for i, n in enumerate(names):
        if n in ("alpha", "r", "gamma"):
            params[i] = abs(params[i])
    cov = _pinv_covariance(best.jac)
    return FitResult(model, tuple(names), params, cov, float(np.linalg.norm(best.fun)))


def _default_nmax(model, init):
    alpha = abs(init.get("alpha", 0.0))
    r = abs(init.get("r", 0.0))
    need = 10.0 * math.sinh(r) ** 2 + 4.0 * alpha**2 + 8 * alpha + 25.0
    return int(math.ceil(need))


def fit_sinusoid(phis, pdown, shots):
    """Weighted linear fit of P_down(phi) = b + a cos(phi).

    The sign of `a` follows the data; |a| is the half-contrast.
    """
    phis = np.asarray(phis, dtype=float)
    pdown = np.asarray(pdown, dtype=float)
    if phis.size < 3 or np.unique(np.round(phis % math.pi, 12)).size < 2:
        raise ValueError("need at least 3 phases not all equal modulo pi")
    X = np.column_stack([np.ones_like(phis), np.cos(phis)])
    sigma = _binomial_sigma(pdown, shots)
    Xw = X / sigma[:, None]
    yw = pdown / sigma
    if np.linalg.matrix_rank(Xw) < 2:
        raise ValueError("phase design is rank-deficient (cos(phi) constant)")
    coef, *_ = np.linalg.lstsq(Xw, yw, rcond=None)
    cov = np.linalg.inv(Xw.T @ Xw)
    resid = Xw @ coef - yw
    return FitResult("sinusoid", ("b", "a"), coef, cov, float(np.linalg.norm(resid)))


def contrast_and_noise(pmax, pmin, shots):
    """Fringe contrast C = pmax - pmin and its projection-noise uncertainty."""
    for p in (pmax, pmin):
        if not 0.0 <= p <= 1.0:
            raise ValueError("fringe probabilities must lie in [0, 1]")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    c = pmax - pmin
    var = (pmax * (1 - pmax) + pmin * (1 - pmin)) / shots
    return c, math.sqrt(var)


def snr_and_enhancement(c_amp, c_ref, shots, p_center=0.5):
    """Signal-to-noise ratios of two contrasts and their ratio in dB.

    SNR uses the projection noise of a fringe centered at p_center; the
    enhancement 20 log10(C_amp / C_ref) is the linear-regime sensitivity
    gain bound.
    """
    if c_ref <= 0:
        raise ValueError("reference contrast must be positive")
    pmax_a, pmin_a = p_center + c_amp / 2, p_center - c_amp / 2
    pmax_r, pmin_r = p_center + c_ref / 2, p_center - c_ref / 2
    _, sig_a = contrast_and_noise(pmax_a, pmin_a, shots)
    _, sig_r = contrast_and_noise(pmax_r, pmin_r, shots)
    s_amp = c_amp / sig_a
    s_ref = c_ref / sig_r
    return s_amp, s_ref, 20.0 * math.log10(c_amp / c_ref)


HBAR = 1.054571817e-34
AMU = 1.66053906892e-27
BOHR_RADIUS = 5.29177210544e-11


def zero_point_extent(mass_amu, omega_r):
    """Ground-state position spread x0 = sqrt(hbar / (2 m omega_r)) in meters."""
    if mass_amu <= 0 or omega_r <= 0:
        raise ValueError("mass and frequency must be positive")
    return math.sqrt(HBAR / (2.0 * mass_amu * AMU * omega_r))


def alpha_to_length(alpha_abs, mass_amu, omega_r):
    """Physical displacement 2 x0 |alpha| in meters."""
    if alpha_abs < 0:
        raise ValueError("alpha_abs must be >= 0")
    return 2.0 * zero_point_extent(mass_amu, omega_r) * alpha_abs
