import math

import numpy as np
import pytest
from scipy.optimize import least_squares

from dmfpo import expr as ex
from dmfpo import fitting, fpo
from dmfpo.exceptions import InsufficientData, SingularJacobian
from dmfpo.model import REFERENCE_PERIOD_POLY
from dmfpo.sequence import structure_a
from oracles import exact_angles_a


def test_exp2_exact_recovery():
    x = np.linspace(0, 1, 11)
    y = 1.3 * np.exp(-0.9 * x) + 3.4 * np.exp(-0.01 * x)
    res = fitting.fit(fitting.FitModel("exp2"), x, y)
    assert res.converged
    assert np.allclose(res.coefficients, (1.3, -0.9, 3.4, -0.01), atol=1e-6)


def test_trig_recovery():
    x = np.linspace(0, 1, 9)
    c = (0.8423, -0.3455, 1.117, 0.01806)
    y = c[0] + c[1] * np.cos(c[2] * x) + c[3] * np.sin(c[2] * x)
    res = fitting.fit(fitting.FitModel("trig_gamma"), x, y)
    assert res.converged and res.rms_residual < 1e-9


@pytest.mark.parametrize("form,guess,f", [
    ("exp2", (1.0, -1.0, 1.0, 0.5), lambda x: np.pi - np.arctan(x)),
    ("trig_gamma", None, lambda x: 0.5 * np.sqrt(1 + x * x)),
    ("cubic", None, lambda x: 4 * np.pi / np.sqrt(1 + x * x)),
])
def test_agrees_with_scipy_least_squares(form, guess, f):
    x = np.linspace(0, 1, 15)
    y = f(x)
    model = fitting.FitModel(form, guess)
    ours = fitting.fit(model, x, y)
    start = guess if guess is not None else fitting.default_guess(form, x, y)
    ref = least_squares(lambda c: model(x, c) - y, start, method="lm", xtol=1e-15, ftol=1e-15)
    ref_rms = math.sqrt(np.mean(ref.fun ** 2))
    assert ours.rms_residual <= ref_rms * (1 + 1e-6) + 1e-12


def test_cubic_matches_polyfit():
    x = np.linspace(0, 1, 21)
    y = 4 * np.pi / np.sqrt(1 + x ** 2)
    poly, res = fitting.fit_period_cubic(x, y)
    assert np.allclose(poly.coefficients, np.polyfit(x, y, 3), atol=1e-8)
    # the fitted curve tracks the reference cubic to within 1%
    assert np.all(np.abs(poly(x) - REFERENCE_PERIOD_POLY(x)) / REFERENCE_PERIOD_POLY(x) < 0.01)


def test_constant_data_cubic():
    x = np.linspace(0, 1, 8)
    res = fitting.fit(fitting.FitModel("cubic"), x, np.full(8, 2.5))
    assert np.allclose(res.coefficients, (0, 0, 0, 2.5), atol=1e-12)


def test_rms_history_never_increases():
    x = np.linspace(0, 1, 12)
    y = 3.0 * np.exp(-0.4 * x) + 0.1 * np.exp(0.9 * x)
    res = fitting.fit(fitting.FitModel("exp2"), x, y)
    h = np.array(res.rms_history)
    assert np.all(np.diff(h) <= 1e-15)
    assert res.iterations == len(h) - 1


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        fitting.fit(fitting.FitModel("cubic"), [0.0, 1.0, 2.0], [1.0, 2.0, 3.0])


def test_singular_jacobian_carries_best_iterate():
    x = np.linspace(0, 1, 6)
    y = 2 * np.exp(0.5 * x) + 0.1 * x
    with pytest.raises(SingularJacobian) as info:
        fitting.fit(fitting.FitModel("exp2", (1.0, 0.5, 1.0, 0.5)), x, y)
    assert info.value.result is not None and not info.value.result.converged


def test_bad_model():
    with pytest.raises(ValueError):
        fitting.FitModel("spline")
    with pytest.raises(ValueError):
        fitting.FitModel("exp2", (1.0, 2.0))


def test_canonical_ordering():
    x = np.linspace(0, 1, 11)
    y = 3.4 * np.exp(-0.01 * x) + 1.3 * np.exp(-0.9 * x)
    res = fitting.fit(fitting.FitModel("exp2", (3.0, 0.0, 1.0, -1.0)), x, y)
    assert res.coefficients[1] <= res.coefficients[3]


def exact_table():
    """Angle table along the closed-form branch on a 5x5 node grid."""
    rows = []
    for g in np.linspace(0, 1, 5):
        for t in np.linspace(0, 15, 5):
            t1, t2 = exact_angles_a(g, t)
            rows.append((g, t, "theta1", t1))
            rows.append((g, t, "theta2", t2))
    return rows


def test_surface_fit_from_exact_branch():
    fits = fitting.fit_angle_surfaces(exact_table())
    seq = structure_a(fits["theta1"].expression, fits["theta2"].expression)
    prof = fpo.profile(seq, *fpo.grid_axes())
    assert prof.min >= 0.9999
    # sqrt(1+g^2)/2 is not exactly a trig form; tau up to 15 magnifies the slope error
    assert fits["theta1"].rms < 5e-3


def test_surface_fit_unwraps_shifted_angles():
    rows = [(g, t, s, a + (2 * math.pi if (s == "theta2" and t > 7) else 0.0))
            for g, t, s, a in exact_table()]
    fits = fitting.fit_angle_surfaces(rows)
    assert fits["theta2"].rms < 1e-2


def test_surface_fit_needs_enough_nodes():
    rows = [r for r in exact_table() if r[0] <= 0.5]
    with pytest.raises(InsufficientData):
        fitting.fit_angle_surfaces(rows)


def test_table_csv_round_trips(tmp_path):
    skel = fpo.skeleton_a()
    res = fpo.optimize_pointwise(skel, [(0.0, 0.0), (0.5, 6.0)], fpo.GAConfig(max_generations=30))
    path = tmp_path / "angles.csv"
    fitting.write_angle_table(path, res, skel)
    rows = fitting.read_angle_table(path)
    assert rows == fitting.table_from_nodes(res, skel)
    assert len(rows) == 3          # theta2 is free at tau = 0


def test_surface_csv_round_trips(tmp_path):
    fits = fitting.fit_angle_surfaces(exact_table())
    path = tmp_path / "surf.csv"
    fitting.write_surface_table(path, fits)
    back = fitting.read_surface_table(path)
    g, t = np.meshgrid(np.linspace(0, 1, 5), np.linspace(0, 15, 5))
    for slot in ("theta1", "theta2"):
        assert np.array_equal(ex.evaluate(back[slot], g, t),
                              ex.evaluate(fits[slot].expression, g, t))


def test_read_angle_table_requires_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("gamma,angle\n0,1\n")
    with pytest.raises(ValueError):
        fitting.read_angle_table(path)
