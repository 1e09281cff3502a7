"""Least-squares fitting of closed-form angle surfaces and period curves.

The fitter is a plain Levenberg-Marquardt iteration with Marquardt's
diagonal scaling.  Only steps that lower the residual are accepted.
"""

import csv
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .exceptions import InsufficientData, SingularJacobian
from .model import PeriodPoly

MAX_ITER = 200
STEP_TOL = 1e-10


def _trig(x, c):
    a, b, k, d = c
    return a + b * np.cos(k * x) + d * np.sin(k * x)


def _trig_jac(x, c):
    a, b, k, d = c
    cs, sn = np.cos(k * x), np.sin(k * x)
    return np.stack([np.ones_like(x), cs, -b * x * sn + d * x * cs, sn], axis=-1)


def _exp2(x, c):
    a, b, cc, d = c
    return a * np.exp(b * x) + cc * np.exp(d * x)


def _exp2_jac(x, c):
    a, b, cc, d = c
    eb, ed = np.exp(b * x), np.exp(d * x)
    return np.stack([eb, a * x * eb, ed, cc * x * ed], axis=-1)


def _cubic(x, c):
    return np.polyval(c, x)


def _cubic_jac(x, c):
    return np.stack([x ** 3, x ** 2, x, np.ones_like(x)], axis=-1)


FORMS = {
    "trig_gamma": (_trig, _trig_jac, ex.trig_gamma),
    "exp2": (_exp2, _exp2_jac, ex.exp2),
    "cubic": (_cubic, _cubic_jac, ex.cubic),
}


def default_guess(form, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if form == "trig_gamma":
        # frequency fixed at 1 makes the model linear in a, b, d
        basis = np.stack([np.ones_like(x), np.cos(x), np.sin(x)], axis=-1)
        (a, b, d), *_ = np.linalg.lstsq(basis, y, rcond=None)
        return (float(a), float(b), 1.0, float(d))
    if form == "exp2":
        logy = np.log(np.maximum(np.abs(y), 1e-12))
        k, log_a = np.polyfit(x, logy, 1) if np.ptp(x) > 0 else (0.0, logy.mean())
        amp = math.copysign(math.exp(log_a), float(np.sum(y))) / 2
        return (amp, 2 * k - 0.5, amp, k / 2)
    if form == "cubic":
        return (0.0, 0.0, 0.0, float(y.mean()))
    raise ValueError(f"unknown form {form!r}")


@dataclass(frozen=True)
class FitModel:
    """Functional form plus an optional starting point (defaults are data-driven)."""

    form: str
    initial_guess: tuple = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown form {self.form!r}; choose from {sorted(FORMS)}")
        if self.initial_guess is not None and len(self.initial_guess) != 4:
            raise ValueError("every form has 4 coefficients")

    @property
    def arity(self):
        return 4

    def __call__(self, x, coefficients):
        return FORMS[self.form][0](np.asarray(x, dtype=float), coefficients)

    def jacobian(self, x, coefficients):
        return FORMS[self.form][1](np.asarray(x, dtype=float), coefficients)

    def expression(self, coefficients):
        return FORMS[self.form][2](*(float(c) for c in coefficients))


@dataclass(frozen=True)
class FitResult:
    form: str
    coefficients: tuple
    rms_residual: float
    iterations: int
    converged: bool
    rms_history: tuple = ()

    def expression(self):
        return FitModel(self.form).expression(self.coefficients)

    def __call__(self, x):
        return FitModel(self.form)(x, self.coefficients)


def _canonical(form, c):
    c = list(c)
    if form == "exp2" and c[1] > c[3]:
        c = [c[2], c[3], c[0], c[1]]
    if form == "trig_gamma" and c[2] < 0:
        c[2], c[3] = -c[2], -c[3]
    return tuple(float(v) for v in c)


def fit(model, x, y, max_iter=MAX_ITER, step_tol=STEP_TOL):
    """Damped least squares from ``model.initial_guess`` (or the default guess).

    Converges when an accepted step is smaller than ``step_tol`` relative to
    the coefficient norm.  The residual never increases between accepted
    iterates.

    Raises
    ------
    InsufficientData
        Fewer samples than coefficients.
    SingularJacobian
        Rank-deficient Jacobian; ``exc.result`` holds the best iterate.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if len(x) < model.arity:
        raise InsufficientData(f"{len(x)} samples for {model.arity} coefficients")
    c = np.array(model.initial_guess if model.initial_guess is not None
                 else default_guess(model.form, x, y), dtype=float)
    r = y - model(x, c)
    cost = float(r @ r)
    lam = 1e-3
    history = [math.sqrt(cost / len(x))]
    converged = False
    it = 0

    def result(done):
        return FitResult(model.form, _canonical(model.form, c), math.sqrt(cost / len(x)),
                         it, done, tuple(history))

    while it < max_iter:
        it += 1
        jac = model.jacobian(x, c)
        sv = np.linalg.svd(jac, compute_uv=False)
        if sv[-1] <= 1e-13 * max(sv[0], 1e-300):
            if cost == 0.0:
                converged = True
                break
            raise SingularJacobian(f"rank-deficient Jacobian at iteration {it}", result(False))
        a = jac.T @ jac
        g = jac.T @ r
        accepted = False
        while lam < 1e16:
            step = np.linalg.solve(a + lam * np.diag(np.diag(a)), g)
            trial = c + step
            r_trial = y - model(x, trial)
            cost_trial = float(r_trial @ r_trial)
            if np.isfinite(cost_trial) and cost_trial <= cost:
                accepted = True
                break
            lam *= 10
        if not accepted:
            converged = True      # no descent direction left at working precision
            break
        small = np.linalg.norm(step) <= step_tol * (np.linalg.norm(c) + step_tol)
        c, r, cost = trial, r_trial, cost_trial
        history.append(math.sqrt(cost / len(x)))
        lam = max(lam / 10, 1e-12)
        if small or cost == 0.0:
            converged = True
            break
    return result(converged)


def fit_period_cubic(gammas, periods):
    """Cubic in gamma fitted to sampled periods."""
    res = fit(FitModel("cubic"), gammas, periods)
    return PeriodPoly(*res.coefficients), res


@dataclass(frozen=True)
class SlotModel:
    """Angle slot shape: ``intercept(gamma) + slope(gamma) * tau``; either part may be absent."""

    slope: FitModel = None
    intercept: FitModel = None


#: Slot shapes of the reference decomposition-A surfaces.
SLOTS_A = {
    "theta1": SlotModel(slope=FitModel("trig_gamma")),
    "theta2": SlotModel(intercept=FitModel("exp2")),
}


@dataclass(frozen=True)
class SurfaceFit:
    slot: str
    expression: ex.Expr
    slope: FitResult = None
    intercept: FitResult = None
    rms: float = 0.0       # surface vs table angles


def _unwrap_row(taus, angles, period):
    """Shift each angle by multiples of ``period`` towards the linear extrapolation."""
    out = np.array(angles, dtype=float)
    for j in range(2, len(out)):
        w = (taus[j] - taus[j - 1]) / (taus[j - 1] - taus[j - 2])
        pred = out[j - 1] + w * (out[j - 1] - out[j - 2])
        out[j] += period * round((pred - out[j]) / period)
    return out


def fit_angle_surfaces(table, slot_models=None, period=2 * math.pi):
    """Fit closed-form surfaces to pointwise angles.

    Parameters
    ----------
    table : iterable of (gamma, tau, slot, angle)
    slot_models : dict slot -> SlotModel, default :data:`SLOTS_A`
    period : float
        Angle period used when unwrapping along tau.

    Returns
    -------
    dict slot -> SurfaceFit
    """
    slot_models = SLOTS_A if slot_models is None else slot_models
    rows = defaultdict(lambda: defaultdict(list))
    for gamma, tau, slot, angle in table:
        rows[slot][float(gamma)].append((float(tau), float(angle)))
    fits = {}
    for slot, model in slot_models.items():
        if slot not in rows:
            raise InsufficientData(f"no samples for slot {slot!r}")
        by_gamma = rows[slot]
        gammas = sorted(by_gamma)
        n_tau = len({t for g in gammas for t, _ in by_gamma[g]})
        if len(gammas) < 4 or n_tau < 4:
            raise InsufficientData(f"slot {slot!r} needs >= 4 gamma and >= 4 tau values, "
                                   f"got {len(gammas)} and {n_tau}")
        slopes, intercepts, samples = [], [], []
        for g in gammas:
            pts = sorted(by_gamma[g])
            t = np.array([p[0] for p in pts])
            a = _unwrap_row(t, [p[1] for p in pts], period)
            samples.extend((g, ti, ai) for ti, ai in zip(t, a))
            if model.slope is not None and model.intercept is not None:
                s, b = np.polyfit(t, a, 1)
            elif model.slope is not None:
                s, b = float(t @ a / (t @ t)), 0.0
            else:
                s, b = 0.0, float(a.mean())
            slopes.append(s)
            intercepts.append(b)
        terms = []
        slope_fit = intercept_fit = None
        if model.slope is not None:
            slope_fit = fit(model.slope, gammas, slopes)
            terms.append(ex.linear_tau(slope_fit.expression()))
        if model.intercept is not None:
            intercept_fit = fit(model.intercept, gammas, intercepts)
            terms.append(intercept_fit.expression())
        expression = terms[0] if len(terms) == 1 else ex.Add(tuple(terms))
        s = np.array(samples)
        resid = ex.evaluate(expression, s[:, 0], s[:, 1]) - s[:, 2]
        fits[slot] = SurfaceFit(slot, expression, slope_fit, intercept_fit,
                                float(np.sqrt(np.mean(resid ** 2))))
    return fits


def table_from_nodes(results, skeleton):
    """(gamma, tau, slot, angle) rows from canonical pointwise results, free slots dropped."""
    rows = []
    for r in results:
        free = r.free or (False,) * skeleton.gene_count
        for k, slot in enumerate(skeleton.slots):
            if not free[k]:
                rows.append((r.gamma, r.tau, slot, float(r.genes[k])))
    return rows


def write_angle_table(path, results, skeleton):
    """CSV ``gamma,tau,slot,angle,fidelity,converged``; the last two are informational."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma", "tau", "slot", "angle", "fidelity", "converged"])
        for r in results:
            free = r.free or (False,) * skeleton.gene_count
            for k, slot in enumerate(skeleton.slots):
                if not free[k]:
                    w.writerow([repr(r.gamma), repr(r.tau), slot, repr(float(r.genes[k])),
                                repr(r.fidelity), int(r.converged)])


def read_angle_table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"gamma", "tau", "slot", "angle"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"angle table {path} lacks columns {sorted(missing)}")
        return [(float(r["gamma"]), float(r["tau"]), r["slot"], float(r["angle"])) for r in reader]


def write_surface_table(path, fits):
    """CSV ``slot,form,c1,c2,c3,c4,rms``; a ``*tau`` suffix marks the slope part."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["slot", "form", "c1", "c2", "c3", "c4", "rms"])
        for slot, f in fits.items():
            for part, suffix in ((f.slope, "*tau"), (f.intercept, "")):
                if part is not None:
                    w.writerow([slot, part.form + suffix, *(repr(c) for c in part.coefficients),
                                repr(part.rms_residual)])


def read_surface_table(path):
    """Slot expressions from a surface CSV (parts of the same slot are summed)."""
    parts = defaultdict(list)
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            form = r["form"]
            coeffs = [float(r[f"c{i}"]) for i in range(1, 5)]
            if form.endswith("*tau"):
                parts[r["slot"]].append(ex.linear_tau(FitModel(form[:-4]).expression(coeffs)))
            else:
                parts[r["slot"]].append(FitModel(form).expression(coeffs))
    return {s: p[0] if len(p) == 1 else ex.Add(tuple(p)) for s, p in parts.items()}
