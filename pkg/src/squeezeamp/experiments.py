"""Scripted experiments reproducing the amplification protocol's figures:
gain curves, fringe scans, contrast and sensitivity sweeps, unitarity and
rotating-wave checks, with seeded projection-noise sampling and
deterministic CSV/JSON output.
"""

from dataclasses import dataclass, field
import hashlib
import io
import json
import math
import os

import numpy as np

from . import __version__, fock, gaussian, spinmotion
from .drive import DriveParams, simulate_full_vs_rwa
from .errors import ConfigError
from .fitting import (
    FitResult,
    RabiTrace,
    contrast_and_noise,
    fit_sinusoid,
    fit_state_model,
    snr_and_enhancement,
)
from .frame import amplification_sequence, amplify_with_noise, run_gaussian_sequence_frame
from .lindblad import NoiseParams

#: Stable per-experiment stream identifiers for counter-based sampling.
EXPERIMENT_IDS = {
    "gain_curve": 1,
    "phase_scan": 2,
    "squeeze_phase_scan": 3,
    "contrast_alpha": 4,
    "sensitivity": 5,
    "unitarity": 6,
    "rwa_check": 7,
    "simulate": 8,
}

#: Flat config keys with units encoded in the names.
CONFIG_DEFAULTS = {
    "omega_r_mhz": 6.3,
    "g_khz": 50.2,
    "omega_sb_khz": 1.1,
    "heating_quanta_per_s": 20.0,
    "dephasing_per_s": 18.0,
    "displace_duration_us": 5.0,
    "bsb_decay_per_s": 60.0,
    "shots": 0,
    "seed": 0,
    "frame_truncation": 48,
    "lab_truncation": 96,
    "alpha_i": 0.2,
    "squeeze_r_list": (0.5, 1.0, 1.5, 2.0, 2.26, 2.54),
    "squeeze_durations_us": (2.0, 4.0, 6.0, 8.0, 10.0, 12.0),
    "alpha_list": (0.002, 0.005, 0.008, 0.011, 0.014, 0.017, 0.02),
    "phi_points": 16,
    "theta_points": 16,
    "trace_points": 150,
    "trace_dt_us": 20.0,
    "preparation_background": 0.02,
    "contrast_threshold": 0.25,
    "sensitivity_alpha": 0.005,
    "rwa_ratio_list": (0.008, 0.05, 0.2),
    "rwa_gt": 0.63,
}

_INT_KEYS = {"shots", "seed", "frame_truncation", "lab_truncation", "phi_points",
             "theta_points", "trace_points"}
_LIST_KEYS = {"squeeze_r_list", "squeeze_durations_us", "alpha_list", "rwa_ratio_list"}


def _format_value(value):
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat key=value experiment settings; unknown keys are rejected."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = dict(CONFIG_DEFAULTS)
        for key, val in self.values.items():
            if key not in CONFIG_DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}", key=key)
            merged[key] = val
        for key in _INT_KEYS:
            merged[key] = int(merged[key])
            if merged[key] < 0:
                raise ConfigError(f"config key {key!r} must be >= 0", key=key)
        for key in ("omega_r_mhz", "g_khz", "omega_sb_khz", "heating_quanta_per_s",
                    "dephasing_per_s", "displace_duration_us", "bsb_decay_per_s"):
            if float(merged[key]) < 0:
                raise ConfigError(f"config key {key!r} must be >= 0", key=key)
        object.__setattr__(self, "values", merged)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def g(self):
        return 2 * math.pi * self["g_khz"] * 1e3

    @property
    def omega_r(self):
        return 2 * math.pi * self["omega_r_mhz"] * 1e6

    @property
    def omega_sb(self):
        return 2 * math.pi * self["omega_sb_khz"] * 1e3

    @property
    def noise(self):
        return NoiseParams(self["heating_quanta_per_s"], self["dephasing_per_s"])

    @property
    def noiseless(self):
        return self.noise.is_zero

    def to_text(self):
        lines = [f"{k} = {_format_value(self.values[k])}" for k in sorted(self.values)]
        return "\n".join(lines) + "\n"

    @property
    def hash(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    @classmethod
    def from_text(cls, text):
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(
                    f"line {lineno}: expected 'key = value'", line=lineno
                )
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in CONFIG_DEFAULTS:
                raise ConfigError(
                    f"line {lineno}: unknown config key {key!r}", key=key, line=lineno
                )
            try:
                if key in _LIST_KEYS:
                    values[key] = tuple(float(v) for v in val.split(",") if v.strip())
                elif key in _INT_KEYS:
                    values[key] = int(val)
                else:
                    values[key] = float(val)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: bad value for {key!r}: {val!r}", key=key, line=lineno
                ) from None
        return cls(values)


def sample_probability(p, shots, seed, experiment, index):
    """Binomial projection-noise sample of a probability.

    Counter-based: the Philox stream is keyed by (seed, experiment id,
    point index), so results are independent of sweep order.  shots = 0
    returns the exact probability with zero error.
    """
    p = min(max(float(p), 0.0), 1.0)
    if shots == 0:
        return p, 0.0
    exp_id = EXPERIMENT_IDS[experiment]
    bitgen = np.random.Philox(seed=np.random.SeedSequence([int(seed), exp_id, int(index)]))
    rng = np.random.Generator(bitgen)
    phat = rng.binomial(int(shots), p) / shots
    err = math.sqrt(max(phat * (1 - phat), 1e-6) / shots)
    return float(phat), float(err)


@dataclass(frozen=True)
class SweepResult:
    """Tabular sweep output plus traceability metadata."""

    name: str
    columns: tuple
    rows: tuple
    config: ExperimentConfig
    summary: dict = field(default_factory=dict)

    def to_csv(self):
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_format_value(row[c]) for c in self.columns) + "\n")
        return buf.getvalue()

    def to_json(self):
        payload = {
            "schema_version": 1,
            "experiment": self.name,
            "code_version": __version__,
            "config_hash": self.config.hash,
            "columns": list(self.columns),
            "rows": [{c: row[c] for c in self.columns} for row in self.rows],
            "summary": self.summary,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, outdir):
        """Write <name>.csv, <name>.json, and the resolved config echo."""
        os.makedirs(outdir, exist_ok=True)
        base = os.path.join(outdir, self.name)
        with open(base + ".csv", "w") as fh:
            fh.write(self.to_csv())
        with open(base + ".json", "w") as fh:
            fh.write(self.to_json())
        with open(os.path.join(outdir, "config.txt"), "w") as fh:
            fh.write(f"# sha256 {self.config.hash}\n")
            fh.write(self.config.to_text())
        return base


def _amplified_density(cfg, alpha_i, r, theta=0.0):
    """Lab-frame density operator after noisy squeeze-displace-antisqueeze."""
    res = amplify_with_noise(
        alpha_i, r, cfg.noise, cfg.g,
        displace_duration=cfg["displace_duration_us"] * 1e-6,
        theta=theta, frame_space=fock.FockSpace(cfg["frame_truncation"]),
    )
    return res, res.lab_density(fock.FockSpace(cfg["lab_truncation"]))


def _fringe_amplitude(rho):
    """Full PSRSB fringe contrast 2|tr rho_ud| of a motional density operator."""
    d = rho.space.dim
    joint = np.zeros((2 * d, 2 * d), dtype=complex)
    joint[:d, :d] = rho.matrix
    U = spinmotion.u_sideband(
        spinmotion.RSB, spinmotion.SidebandPulse.pi_pulse(spinmotion.RSB, 1.0), rho.space
    )
    joint = U @ joint @ U.conj().T
    return 2.0 * abs(complex(np.trace(joint[d:, :d])))


def _noiseless_contrast(alpha_f_abs):
    return 2.0 * alpha_f_abs * spinmotion.f_alpha(alpha_f_abs)


def _trace_times(cfg):
    return np.arange(1, cfg["trace_points"] + 1) * cfg["trace_dt_us"] * 1e-6


def _synthetic_trace(cfg, populations, experiment, block_index):
    """Forward BSB signal, sampled with the configured shot count."""
    times = _trace_times(cfg)
    ideal = spinmotion.bsb_signal(populations, cfg.omega_sb, cfg["bsb_decay_per_s"], times)
    shots = cfg["shots"]
    if shots == 0:
        return RabiTrace(times, ideal, 300), True
    sampled = np.empty_like(ideal)
    for i, p in enumerate(ideal):
        sampled[i], _ = sample_probability(
            p, shots, cfg["seed"], experiment, block_index * 100_000 + i
        )
    return RabiTrace(times, sampled, shots), False


def run_gain_curve(cfg):
    """Gain G = alpha_f / alpha_i versus squeezing parameter r = g t."""
    alpha_i = cfg["alpha_i"]
    rows = []
    for idx, r in enumerate(cfg["squeeze_r_list"]):
        alpha_f_ideal = abs(gaussian.amplify_displacement(alpha_i, gaussian.SqueezeParam(r)))
        if cfg.noiseless:
            nmax = int(math.ceil(alpha_f_ideal**2 + 8 * alpha_f_ideal + 20))
            pops = gaussian.displaced_squeezed_populations(
                gaussian.Displacement(alpha_f_ideal), gaussian.SqueezeParam(0.0), nmax
            )
        else:
            _, lab = _amplified_density(cfg, alpha_i, r)
            pops = np.clip(lab.motional_populations(), 0.0, None)
            nmax = min(lab.space.dim, int(math.ceil(alpha_f_ideal**2 + 8 * alpha_f_ideal + 20)))
            pops = pops[:nmax]
        trace, _ = _synthetic_trace(cfg, pops, "gain_curve", idx)
        row = {
            "t_us": r / cfg.g * 1e6,
            "r_ideal": r,
            "alpha_f_ideal": alpha_f_ideal,
        }
        try:
            fit = fit_state_model(
                trace, "coherent",
                {"alpha": alpha_f_ideal, "omega": cfg.omega_sb,
                 "gamma": cfg["bsb_decay_per_s"]},
                nmax=len(pops),
            )
            alpha_fit = fit.param("alpha")
            alpha_err = fit.error("alpha")
            row.update(
                alpha_f_fit=alpha_fit, alpha_f_err=alpha_err,
                gain=alpha_fit / alpha_i, gain_err=alpha_err / alpha_i, fit_ok=1,
            )
        except Exception:
            row.update(alpha_f_fit=float("nan"), alpha_f_err=float("nan"),
                       gain=float("nan"), gain_err=float("nan"), fit_ok=0)
        rows.append(row)
    rows.sort(key=lambda r: r["r_ideal"])
    columns = ("t_us", "r_ideal", "alpha_f_ideal", "alpha_f_fit", "alpha_f_err",
               "gain", "gain_err", "fit_ok")
    return SweepResult("gain_curve", columns, tuple(rows), cfg,
                       {"alpha_i": alpha_i, "noiseless": cfg.noiseless})


def run_phase_scan(cfg, r=0.0):
    """PSRSB fringe P_down(phi) for a displacement, optionally amplified."""
    phis = np.linspace(0.0, 2 * math.pi, cfg["phi_points"], endpoint=False)
    if len(phis) < 8:
        raise ConfigError("phase scan needs phi_points >= 8", key="phi_points")
    alpha_i = cfg["alpha_i"]
    if cfg.noiseless or (r == 0.0 and alpha_i == 0.0):
        alpha_f = abs(gaussian.amplify_displacement(alpha_i, gaussian.SqueezeParam(r)))
        ideal = np.array([spinmotion.psrsb_pdown_series(alpha_f, phi) for phi in phis])
    else:
        _, lab = _amplified_density(cfg, alpha_i, r)
        ideal = spinmotion.psrsb_fringe_density(lab, phis)
    rows = []
    sampled = []
    for i, (phi, p) in enumerate(zip(phis, ideal)):
        phat, err = sample_probability(p, cfg["shots"], cfg["seed"], "phase_scan", i)
        sampled.append(phat)
        rows.append({"phi_rad": float(phi), "p_down": phat, "p_down_err": err})
    fit = fit_sinusoid(phis, np.array(sampled), cfg["shots"] if cfg["shots"] else 10**9)
    summary = {
        "b": fit.param("b"), "b_err": fit.error("b"),
        "a": fit.param("a"), "a_err": fit.error("a"),
        "half_contrast": abs(fit.param("a")), "r": r,
    }
    return SweepResult("phase_scan", ("phi_rad", "p_down", "p_down_err"),
                       tuple(rows), cfg, summary)


def run_squeeze_phase_scan(cfg, r=None):
    """Fringe contrast versus the squeezing phase theta at fixed displacement."""
    thetas = np.linspace(0.0, 2 * math.pi, cfg["theta_points"], endpoint=False)
    if r is None:
        r = cfg["squeeze_r_list"][-1]
    alpha_i = cfg["alpha_i"]
    rows = []
    for i, theta in enumerate(thetas):
        alpha_f = abs(
            gaussian.amplify_displacement(alpha_i, gaussian.SqueezeParam(r, theta))
        )
        if cfg.noiseless:
            contrast = _noiseless_contrast(alpha_f)
        else:
            _, lab = _amplified_density(cfg, alpha_i, r, theta=theta)
            contrast = _fringe_amplitude(lab)
        shots = cfg["shots"]
        if shots:
            pmax, _ = sample_probability(
                0.5 + contrast / 2, shots, cfg["seed"], "squeeze_phase_scan", 2 * i
            )
            pmin, _ = sample_probability(
                0.5 - contrast / 2, shots, cfg["seed"], "squeeze_phase_scan", 2 * i + 1
            )
            contrast_meas, err = contrast_and_noise(pmax, pmin, shots)
        else:
            contrast_meas, err = contrast, 0.0
        rows.append({
            "theta_rad": float(theta), "alpha_f_ideal": alpha_f,
            "contrast": contrast_meas, "contrast_err": err,
        })
    cs = [row["contrast"] for row in rows]
    summary = {
        "r": r,
        "theta_at_max": rows[int(np.argmax(cs))]["theta_rad"],
        "theta_at_min": rows[int(np.argmin(cs))]["theta_rad"],
        "max_over_min": float(max(cs) / max(min(cs), 1e-12)),
    }
    return SweepResult(
        "squeeze_phase_scan",
        ("theta_rad", "alpha_f_ideal", "contrast", "contrast_err"),
        tuple(rows), cfg, summary,
    )


def _linear_slope(alphas, contrasts, errors, threshold):
    """Weighted zero-intercept slope of C(alpha) over the linear regime."""
    alphas = np.asarray(alphas, dtype=float)
    contrasts = np.asarray(contrasts, dtype=float)
    keep = contrasts <= threshold
    if keep.sum() < 2:
        raise ValueError("not enough contrast points below the linear-regime threshold")
    x, y = alphas[keep], contrasts[keep]
    w = 1.0 / np.clip(np.asarray(errors, dtype=float)[keep], 1e-6, None) ** 2
    slope = float(np.sum(w * x * y) / np.sum(w * x * x))
    slope_err = float(1.0 / math.sqrt(np.sum(w * x * x)))
    return slope, slope_err


def run_contrast_vs_alpha(cfg):
    """Contrast versus displacement amplitude per squeeze duration."""
    rows = []
    slopes = {}
    for duration_us in cfg["squeeze_durations_us"]:
        r = cfg.g * duration_us * 1e-6
        alphas, contrasts, errors = [], [], []
        for j, alpha in enumerate(cfg["alpha_list"]):
            alpha_f = abs(gaussian.amplify_displacement(alpha, gaussian.SqueezeParam(r)))
            if cfg.noiseless:
                contrast = _noiseless_contrast(alpha_f)
            else:
                _, lab = _amplified_density(cfg, alpha, r)
                contrast = _fringe_amplitude(lab)
            shots = cfg["shots"]
            idx = int(duration_us * 1000) * 1000 + j
            if shots:
                pmax, _ = sample_probability(
                    0.5 + contrast / 2, shots, cfg["seed"], "contrast_alpha", 2 * idx
                )
                pmin, _ = sample_probability(
                    0.5 - contrast / 2, shots, cfg["seed"], "contrast_alpha", 2 * idx + 1
                )
                contrast_meas, err = contrast_and_noise(pmax, pmin, shots)
            else:
                contrast_meas, err = contrast, 1e-6
            alphas.append(alpha)
            contrasts.append(contrast_meas)
            errors.append(err)
            rows.append({
                "t_us": duration_us, "alpha_i": alpha,
                "contrast": contrast_meas, "contrast_err": err,
            })
        slope, slope_err = _linear_slope(
            alphas, contrasts, errors, cfg["contrast_threshold"]
        )
        slopes[f"{duration_us:g}"] = {
            "slope": slope, "slope_err": slope_err, "contrast_gain": slope / 2.0,
        }
    return SweepResult(
        "contrast_alpha", ("t_us", "alpha_i", "contrast", "contrast_err"),
        tuple(rows), cfg, {"slopes": slopes},
    )


def run_sensitivity_curve(cfg):
    """Sensitivity enhancement in dB versus squeeze duration."""
    alpha = cfg["sensitivity_alpha"]
    if cfg.noiseless:
        c_ref = _noiseless_contrast(alpha)
    else:
        _, lab_ref = _amplified_density(cfg, alpha, 0.0)
        c_ref = _fringe_amplitude(lab_ref)
    rows = []
    for duration_us in cfg["squeeze_durations_us"]:
        r = cfg.g * duration_us * 1e-6
        gain_ideal = math.exp(r)
        if cfg.noiseless:
            c_amp = _noiseless_contrast(
                abs(gaussian.amplify_displacement(alpha, gaussian.SqueezeParam(r)))
            )
        else:
            _, lab = _amplified_density(cfg, alpha, r)
            c_amp = _fringe_amplitude(lab)
        shots = cfg["shots"] if cfg["shots"] else 10**9
        s_amp, s_ref, enh = snr_and_enhancement(max(c_amp, 1e-12), c_ref, shots)
        rows.append({
            "t_us": duration_us, "r_ideal": r, "gain_ideal": gain_ideal,
            "contrast": c_amp, "enhancement_db": enh,
            "ideal_enhancement_db": 20 * math.log10(gain_ideal),
        })
    enhs = [row["enhancement_db"] for row in rows]
    best = int(np.argmax(enhs))
    summary = {
        "alpha": alpha,
        "best_duration_us": rows[best]["t_us"],
        "interior_maximum": bool(0 < best < len(rows) - 1),
    }
    columns = ("t_us", "r_ideal", "gain_ideal", "contrast", "enhancement_db",
               "ideal_enhancement_db")
    return SweepResult("sensitivity", columns, tuple(rows), cfg, summary)


def run_unitarity_check(cfg):
    """Ground-state return after squeeze then anti-squeeze, with and without noise."""
    background = cfg["preparation_background"]
    rows = []
    for duration_us in cfg["squeeze_durations_us"]:
        r = cfg.g * duration_us * 1e-6
        p_down_ideal = 1.0 - background
        seq = amplification_sequence(0.0, r, cfg.g)
        if cfg.noiseless or r == 0:
            p0 = 1.0
            p_down_noisy = p_down_ideal
        else:
            res = run_gaussian_sequence_frame(
                seq, cfg.noise, fock.FockSpace(cfg["frame_truncation"])
            )
            rho = res.lab_density(res.space)
            p0 = float(rho.motional_populations()[0])
            d = rho.space.dim
            joint = np.zeros((2 * d, 2 * d), dtype=complex)
            joint[:d, :d] = rho.matrix
            U = spinmotion.u_sideband(
                spinmotion.RSB,
                spinmotion.SidebandPulse.pi_pulse(spinmotion.RSB, 1.0), rho.space,
            )
            joint = U @ joint @ U.conj().T
            p_down_noisy = (1.0 - background) * float(np.trace(joint[:d, :d]).real)
        rows.append({
            "t_us": duration_us, "r_ideal": r,
            "p_down_noiseless": p_down_ideal, "p_down_noisy": p_down_noisy,
            "ground_population": p0,
        })
    columns = ("t_us", "r_ideal", "p_down_noiseless", "p_down_noisy",
               "ground_population")
    return SweepResult("unitarity", columns, tuple(rows), cfg,
                       {"background": background})


def run_rwa_check(cfg):
    """Lab-frame versus rotating-wave fidelity per drive-strength ratio."""
    rows = []
    for ratio in cfg["rwa_ratio_list"]:
        g = ratio * cfg.omega_r
        gt = cfg["rwa_gt"]
        params = DriveParams(
            omega_r=cfg.omega_r, omega_p=2 * cfg.omega_r, g=g, duration=gt / g
        )
        spp = max(64, int(math.ceil(2560 * ratio)))
        fid, r_eff = simulate_full_vs_rwa(
            params, fock.FockSpace(64), steps_per_period=spp
        )
        rows.append({
            "g_over_omega_r": ratio, "gt": gt, "fidelity": fid,
            "r_effective": r_eff, "steps_per_period": spp,
        })
    fids = [row["fidelity"] for row in rows]
    summary = {"monotone_decreasing": bool(all(a > b for a, b in zip(fids, fids[1:])))}
    columns = ("g_over_omega_r", "gt", "fidelity", "r_effective", "steps_per_period")
    return SweepResult("rwa_check", columns, tuple(rows), cfg, summary)
