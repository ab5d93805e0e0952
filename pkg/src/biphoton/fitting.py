"""Least-squares fit of the far-field phase-matching envelope A·f(4α|q|² + ζ).

The fitter is a small Levenberg-damped Gauss-Newton loop with an analytic
Jacobian.  Images can be binned radially first; the model is then averaged
over exactly the same pixel sets as the data, so binning does not bias α.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, SingularFitError
from .spdc import PM_MODELS, CoincidenceImage, PhaseMatchingParams, add_poisson_noise, sinc

__all__ = [
    "LAMBDA_P_MM", "LAMBDA_SPDC_MM", "RadialProfile", "FitResult", "BootstrapFit",
    "radial_profile", "pm_model", "pm_jacobian", "fit_phase_matching",
    "derive_crystal_length", "alpha_from_crystal_length", "fit_uncertainty_bootstrap",
]

LAMBDA_P_MM = 405e-6
LAMBDA_SPDC_MM = 810e-6

MAX_ITER = 200
REL_TOL = 1e-10
COND_LIMIT = 1e12
_PARAMS = ("A", "alpha", "zeta")


def _dsinc(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-3
    xs = x[small]
    out[small] = -xs / 3 + xs ** 3 / 30
    xl = x[~small]
    out[~small] = (np.cos(xl) - np.sin(xl) / xl) / xl
    return out


def _shape(x, model):
    s = sinc(x)
    if model == "sinc2":
        return s * s, 2 * s * _dsinc(x)
    return s, _dsinc(x)


def pm_model(q2, params, model: str = "sinc2"):
    """A·f(4α q² + ζ) for squared radii ``q2``; ``params`` is (A, α, ζ)."""
    A, alpha, zeta = params
    f, _ = _shape(4 * alpha * np.asarray(q2) + zeta, model)
    return A * f


def pm_jacobian(q2, params, model: str = "sinc2"):
    """Columns d/dA, d/dα, d/dζ of :func:`pm_model`."""
    A, alpha, zeta = params
    q2 = np.asarray(q2, dtype=float)
    f, df = _shape(4 * alpha * q2 + zeta, model)
    return np.stack([f, A * df * 4 * q2, A * df], axis=-1)


@dataclass
class RadialProfile:
    """Azimuthal average of an image over rings of width ``dq``.

    ``labels`` and ``q2_pixels`` keep the pixel membership of each bin so a
    model can be averaged over the same sets.
    """

    q: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    labels: np.ndarray = field(repr=False)
    q2_pixels: np.ndarray = field(repr=False)


def radial_profile(image: CoincidenceImage, dq: float | None = None) -> RadialProfile:
    qx, qy = image.grid.coords()
    q = np.hypot(qx, qy).ravel()
    dq = dq or image.grid.pitch
    raw = np.rint(q / dq).astype(np.int64)
    used, labels = np.unique(raw, return_inverse=True)
    counts = np.bincount(labels)
    vals = np.bincount(labels, weights=np.asarray(image.counts, dtype=float).ravel()) / counts
    qmean = np.bincount(labels, weights=q) / counts
    return RadialProfile(qmean, vals, counts, labels, q.ravel() ** 2)


@dataclass
class FitResult:
    params: PhaseMatchingParams
    stderr: dict
    rms: float
    model: str
    iterations: int
    converged: bool
    grad_norm: float = 0.0
    cov: np.ndarray | None = field(default=None, repr=False)
    history: list = field(default_factory=list, repr=False)

    def crystal_length(self, lambda_p: float = LAMBDA_P_MM) -> float:
        return derive_crystal_length(self.params.alpha, lambda_p)

    def to_dict(self, lambda_p: float = LAMBDA_P_MM) -> dict:
        p = self.params
        return {
            "model": self.model,
            "A": p.A,
            "alpha_mm2": p.alpha,
            "zeta": p.zeta,
            "stderr": {"A": self.stderr["A"], "alpha_mm2": self.stderr["alpha"],
                       "zeta": self.stderr["zeta"]},
            "L_mm": self.crystal_length(lambda_p),
            "L_stderr_mm": derive_crystal_length(self.stderr["alpha"], lambda_p)
            if self.stderr["alpha"] > 0 else 0.0,
            "rms": self.rms,
            "converged": self.converged,
            "iterations": self.iterations,
        }


class _Problem:
    """Weighted residuals sqrt(n_b)·(d_b - <model>_b) over pixel groups."""

    def __init__(self, q2, data, labels=None, counts=None, model="sinc2"):
        self.q2 = np.asarray(q2, dtype=float)
        self.data = np.asarray(data, dtype=float)
        self.labels = labels
        self.counts = counts if counts is not None else np.ones_like(self.data)
        self.sw = np.sqrt(self.counts)
        self.model = model

    def _avg(self, v):
        if self.labels is None:
            return v
        n = self.counts.size
        if v.ndim == 1:
            return np.bincount(self.labels, weights=v, minlength=n) / self.counts
        return np.stack([self._avg(v[:, k]) for k in range(v.shape[1])], axis=1)

    def residual(self, p):
        return self.sw * (self.data - self._avg(pm_model(self.q2, p, self.model)))

    def jacobian(self, p):
        # Jacobian of the residual r = sw·(d - m)
        return -self.sw[:, None] * self._avg(pm_jacobian(self.q2, p, self.model))


def _first_zero_radius(q, values, model):
    """Zero of the central lobe, estimated from where the profile falls to half.

    The half-level crossing is far less noise-sensitive than locating the
    minimum itself; f(x) = 1/2 at x_h and f(π) = 0 fix the ratio of radii.
    """
    order = np.argsort(q)
    q, v = q[order], values[order]
    peak = v[: max(3, len(v) // 10)].max()
    if not peak > 0:
        return None
    below = np.flatnonzero(v < 0.5 * peak)
    if below.size == 0 or below[0] == 0:
        return None
    k = below[0]
    # linear interpolation of the crossing
    q_half = q[k - 1] + (0.5 * peak - v[k - 1]) * (q[k] - q[k - 1]) / (v[k] - v[k - 1])
    x_half = 1.3915573 if model == "sinc2" else 1.8954943
    return q_half * np.sqrt(np.pi / x_half)


def _levenberg(prob: _Problem, p0, max_iter=MAX_ITER):
    p = np.asarray(p0, dtype=float)
    r = prob.residual(p)
    obj = float(r @ r)
    lam = 1e-3
    it = 0
    converged = False
    history = [obj]
    for it in range(1, max_iter + 1):
        J = prob.jacobian(p)
        JTJ = J.T @ J
        g = J.T @ r
        d = np.sqrt(np.diag(JTJ))
        if np.any(d == 0) or np.linalg.cond(JTJ / np.outer(d, d)) > COND_LIMIT:
            raise SingularFitError(
                "normal matrix is singular: the data do not constrain (A, alpha, zeta); "
                "is the image flat or limited to the central lobe?")
        accepted = False
        while lam < 1e16:
            step = np.linalg.solve(JTJ + lam * np.diag(np.diag(JTJ)), -g)
            trial = p + step
            if trial[0] > 0 and trial[1] > 0:
                rt = prob.residual(trial)
                obj_t = float(rt @ rt)
                if obj_t <= obj:
                    accepted = True
                    break
            lam *= 10
        if not accepted:
            converged = True  # no descent direction left at machine precision
            break
        rel = (obj - obj_t) / max(obj, np.finfo(float).tiny)
        p, r, obj = trial, rt, obj_t
        history.append(obj)
        lam = max(lam / 10, 1e-12)
        if rel < REL_TOL:
            converged = True
            break
    J = prob.jacobian(p)
    return p, r, obj, J, it, converged, history


def fit_phase_matching(data, q=None, model: str = "sinc2", guess=None, *,
                       binned: bool = True, max_iter: int = MAX_ITER) -> FitResult:
    """Fit A·f(4α|q|² + ζ) to a far-field image or a radial profile.

    Parameters
    ----------
    data : CoincidenceImage or array
        A far-field image (its grid supplies q) or samples at radii ``q``.
    q : array, optional
        Radii in rad/mm when ``data`` is an array.
    model : {"sinc2", "sinc"}
    guess : PhaseMatchingParams or (A, alpha, zeta), optional
        Start point; otherwise initialized from the first zero of the lobe.
    binned : bool
        Azimuthally bin images before fitting (pixel counts as weights).
    """
    if model not in PM_MODELS:
        raise ValueError(f"model must be one of {PM_MODELS}")
    if isinstance(data, CoincidenceImage):
        vals = np.asarray(data.counts, dtype=float)
        if binned:
            prof = radial_profile(data)
            prob = _Problem(prof.q2_pixels, prof.values, prof.labels, prof.counts, model)
            q_init, v_init = prof.q, prof.values
        else:
            qx, qy = data.grid.coords()
            q2 = (qx ** 2 + qy ** 2).ravel()
            prob = _Problem(q2, vals.ravel(), model=model)
            prof = radial_profile(data)
            q_init, v_init = prof.q, prof.values
    else:
        if q is None:
            raise ValueError("radii q are required for array data")
        vals = np.asarray(data, dtype=float).ravel()
        q_init = np.abs(np.asarray(q, dtype=float)).ravel()
        if q_init.shape != vals.shape:
            raise ValueError("data and q have different lengths")
        v_init = vals
        prob = _Problem(q_init ** 2, vals, model=model)
    if not np.all(np.isfinite(vals)):
        raise ValueError("data must be finite")
    if model == "sinc2" and np.any(vals < 0):
        raise ValueError("sinc² data must be nonnegative")
    if prob.data.size < 10:
        raise ValueError("need at least 10 samples to fit three parameters")

    if guess is not None:
        g = guess
        starts = [np.array([g.A, g.alpha, g.zeta] if isinstance(g, PhaseMatchingParams)
                           else g, dtype=float)]
    else:
        q0 = _first_zero_radius(q_init, v_init, model)
        if q0 is None or not q0 > 0:
            raise SingularFitError(
                "singular: no falling edge of the central lobe in the data, "
                "so alpha cannot be identified")
        peak = float(np.max(v_init))
        starts = [np.array([peak, (np.pi - z) / (4 * q0 ** 2), z]) for z in (0.0, 0.5, -0.5)]

    best = None
    errors = []
    for p0 in starts:
        try:
            out = _levenberg(prob, p0, max_iter)
        except SingularFitError as exc:
            errors.append(exc)
            continue
        if best is None or out[2] < best[2]:
            best = out
    if best is None:
        raise errors[0]
    p, r, obj, J, it, converged, history = best

    dof = max(prob.data.size - 3, 1)
    sigma2 = obj / dof
    JTJ = J.T @ J
    try:
        cov = sigma2 * np.linalg.inv(JTJ)
    except np.linalg.LinAlgError as exc:
        raise SingularFitError("singular normal matrix at the solution") from exc
    se = np.sqrt(np.clip(np.diag(cov), 0, None))
    # gradient per unit-norm Jacobian column, relative to the weighted data norm
    grad = J.T @ r
    scale = np.linalg.norm(prob.sw * prob.data)
    grad_norm = float(np.max(np.abs(grad) / np.sqrt(np.diag(JTJ))) / scale) if scale > 0 else 0.0
    rms = float(np.sqrt(np.sum(r ** 2) / np.sum(prob.counts)))
    res = FitResult(PhaseMatchingParams(*p), dict(zip(_PARAMS, se.tolist())), rms, model,
                    it, bool(converged), grad_norm, cov, history)
    if not converged:
        raise ConvergenceError(f"fit did not converge in {max_iter} iterations "
                               f"(last params A={p[0]:.4g}, alpha={p[1]:.4g}, "
                               f"zeta={p[2]:.4g})", result=res)
    return res


def derive_crystal_length(alpha: float, lambda_p: float = LAMBDA_P_MM) -> float:
    """L = 8π α / λ_p (mm), with the vacuum pump wavenumber."""
    if not alpha > 0 or not lambda_p > 0:
        raise ValueError("alpha and lambda_p must be positive")
    return 8 * np.pi * alpha / lambda_p


def alpha_from_crystal_length(L: float, lambda_p: float = LAMBDA_P_MM) -> float:
    if not L > 0 or not lambda_p > 0:
        raise ValueError("L and lambda_p must be positive")
    return L * lambda_p / (8 * np.pi)


@dataclass
class BootstrapFit:
    mean: dict
    std: dict
    n_failed: int
    values: np.ndarray = field(repr=False)


def fit_uncertainty_bootstrap(data: CoincidenceImage, n_resamples: int = 20, seed: int = 0,
                              model: str = "sinc2", guess=None,
                              binned: bool = True) -> BootstrapFit:
    """Refit Poisson re-draws of ``data``; failed fits are counted, not averaged."""
    if n_resamples < 2:
        raise ValueError("need at least two resamples")
    if guess is None:
        guess = fit_phase_matching(data, model=model, binned=binned).params
    vals, failed = [], 0
    for child in np.random.SeedSequence(seed).spawn(n_resamples):
        img = add_poisson_noise(data, int(child.generate_state(1)[0]))
        try:
            r = fit_phase_matching(img, model=model, guess=guess, binned=binned)
        except (SingularFitError, ConvergenceError):
            failed += 1
            continue
        vals.append([r.params.A, r.params.alpha, r.params.zeta])
    vals = np.asarray(vals).reshape(-1, 3)
    if len(vals) < 2:
        raise ConvergenceError(f"{failed} of {n_resamples} bootstrap fits failed")
    mean = dict(zip(_PARAMS, vals.mean(axis=0).tolist()))
    std = dict(zip(_PARAMS, vals.std(axis=0, ddof=1).tolist()))
    return BootstrapFit(mean, std, failed, vals)
