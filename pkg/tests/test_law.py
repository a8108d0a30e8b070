import dataclasses

import numpy as np
import pytest

from anneal_law import (
    AreaConfig,
    ChinchillaParams,
    LawParams,
    ScheduleSpec,
    compute_areas,
    crossover_s1,
    eval_chinchilla,
    eval_curve,
    eval_curve_n,
    materialize,
    partials,
    predict_loss_curve,
)
from anneal_law.areas import AreaSeries


def areas_for(spec: ScheduleSpec, lambda_=0.999) -> AreaSeries:
    return compute_areas(materialize(spec), AreaConfig(lambda_=lambda_))


def test_constant_curve_arithmetic(fig2_params):
    spec = ScheduleSpec(kind="constant", total_steps=20_000, eta_max=2e-4)
    loss = eval_curve(fig2_params, areas_for(spec))
    # S1 at the final step is 4.0; no annealing term.
    assert loss[-1] == pytest.approx(2.628 + 0.429 * 4.0**-0.550, rel=1e-12)
    assert loss[-1] == pytest.approx(2.828, abs=2e-3)


def test_constant_reduces_to_chinchilla(fig2_params):
    eta_max = 2e-4
    spec = ScheduleSpec(kind="constant", total_steps=5000, warmup_steps=500, eta_max=eta_max)
    loss = eval_curve(fig2_params, areas_for(spec))
    chin = ChinchillaParams(
        L0=fig2_params.L0,
        A=fig2_params.A * eta_max**-fig2_params.alpha,
        alpha=fig2_params.alpha,
    )
    steps = np.arange(1, 5001)
    assert np.allclose(loss, eval_chinchilla(chin, steps), rtol=1e-12, atol=0)


def test_zeta_default_identity(fig2_params):
    spec = ScheduleSpec(kind="cosine", total_steps=2000, eta_max=2e-4)
    areas = areas_for(spec)
    explicit = dataclasses.replace(fig2_params, zeta=1.0)
    assert np.array_equal(eval_curve(fig2_params, areas), eval_curve(explicit, areas))


def test_zeta_rejects_negative_s2(fig2_params):
    # A rising LR ramp drives S2 negative.
    spec = ScheduleSpec(
        kind="piecewise_linear",
        total_steps=2000,
        eta_max=2e-4,
        points=((1, 1e-5), (1000, 1e-5), (2000, 2e-4)),
    )
    areas = areas_for(spec)
    assert np.min(areas.s2) < 0
    zeta = dataclasses.replace(fig2_params, zeta=1.2)
    with pytest.raises(ValueError, match="negative S2"):
        eval_curve(zeta, areas)


def test_eval_curve_n_degenerate_limit(fig2_params):
    spec = ScheduleSpec(kind="cosine", total_steps=1000, eta_max=2e-4)
    areas = areas_for(spec)
    ext = dataclasses.replace(fig2_params, B=1e-12, beta=0.3, gamma=1e-12)
    base = eval_curve(fig2_params, areas)
    assert np.allclose(eval_curve_n(ext, areas, n=3e8), base, atol=1e-9)


def test_eval_curve_n_annealing_scales_with_size(fig2_params):
    spec = ScheduleSpec(
        kind="wsd", total_steps=2000, eta_max=2e-4, stable_end=1600, anneal_fn="cosine"
    )
    areas = areas_for(spec)
    ext = dataclasses.replace(fig2_params, B=400.0, beta=0.34, gamma=0.1)
    small = eval_curve_n(ext, areas, n=1e8)
    large = eval_curve_n(ext, areas, n=1e9)
    drop = lambda loss: loss[1599] - loss[-1]  # loss drop over the annealing window
    assert drop(large) > drop(small)


def test_eval_curve_n_at_unit_size(fig2_params):
    spec = ScheduleSpec(kind="constant", total_steps=100, eta_max=2e-4)
    areas = areas_for(spec)
    ext = dataclasses.replace(fig2_params, B=0.5, beta=0.3, gamma=0.2)
    expected = eval_curve(fig2_params, areas) + 0.5
    assert np.allclose(eval_curve_n(ext, areas, n=1.0), expected, rtol=1e-12)


def test_eval_curve_n_requires_extension(fig2_params):
    spec = ScheduleSpec(kind="constant", total_steps=10, eta_max=2e-4)
    with pytest.raises(ValueError, match="requires B, beta, gamma"):
        eval_curve_n(fig2_params, areas_for(spec), n=1e8)


def test_chinchilla_asymptote_and_arithmetic():
    params = ChinchillaParams(L0=2.0, A=0.5, alpha=0.5, B=0.3, beta=0.3)
    assert eval_chinchilla(params, 1e30, 1e30) == pytest.approx(2.0, abs=1e-9)
    simple = ChinchillaParams(L0=0.0, A=1.0, alpha=1.0)
    assert eval_chinchilla(simple, 2.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        eval_chinchilla(simple, -1.0)
    with pytest.raises(ValueError):
        eval_chinchilla(simple, 1.0, n=0.0)


def test_partials_signs_and_values(fig2_params):
    d1, d2 = partials(fig2_params, 4.0)
    assert d1 < 0 and d2 < 0
    assert d2 == -fig2_params.C
    unit = LawParams(L0=1.0, A=1.0, C=0.5, alpha=1.0)
    d1, _ = partials(unit, 1.0)
    assert d1 == pytest.approx(-1.0)


def test_partials_match_finite_differences(fig2_params):
    rng = np.random.default_rng(0)
    for _ in range(20):
        s1 = rng.uniform(0.5, 20.0)
        s2 = rng.uniform(-0.1, 0.3)
        h = 1e-6 * s1
        up = fig2_params.L0 + fig2_params.A * (s1 + h) ** -fig2_params.alpha - fig2_params.C * s2
        dn = fig2_params.L0 + fig2_params.A * (s1 - h) ** -fig2_params.alpha - fig2_params.C * s2
        fd = (up - dn) / (2 * h)
        d1, d2 = partials(fig2_params, s1)
        assert d1 == pytest.approx(fd, rel=1e-6)
        assert d2 == pytest.approx(-fig2_params.C)


def test_crossover_area(fig2_params):
    s1_star = crossover_s1(fig2_params)
    d1, _ = partials(fig2_params, s1_star)
    assert abs(d1) == pytest.approx(fig2_params.C, rel=1e-12)


def test_monotonicity_in_areas(fig2_params):
    s1 = np.linspace(0.5, 10, 50)
    s2 = np.zeros(50)
    cfg = AreaConfig()
    areas = AreaSeries(s1=s1, s2=s2, momentum=s2, config=cfg)
    loss = eval_curve(fig2_params, areas)
    assert np.all(np.diff(loss) < 0)
    areas2 = AreaSeries(s1=np.full(50, 4.0), s2=np.linspace(0, 0.2, 50), momentum=s2, config=cfg)
    loss2 = eval_curve(fig2_params, areas2)
    assert np.all(np.diff(loss2) < 0)


def test_params_validation():
    with pytest.raises(ValueError):
        LawParams(L0=0.0, A=0.4, C=0.4, alpha=0.5)
    with pytest.raises(ValueError):
        LawParams(L0=2.0, A=0.4, C=0.4, alpha=0.5, B=-1.0)
    with pytest.raises(ValueError):
        LawParams.from_dict({"L0": 2.0, "A": 0.4, "C": 0.4, "alpha": 0.5, "junk": 1})
    p = LawParams.from_dict({"L0": 2.0, "A": 0.4, "C": 0.4, "alpha": 0.5})
    assert p.zeta == 1.0


def test_predict_loss_curve_matches_manual(fig2_params):
    spec = ScheduleSpec(kind="cosine", total_steps=500, eta_max=2e-4)
    manual = eval_curve(fig2_params, areas_for(spec, lambda_=0.99))
    assert np.array_equal(predict_loss_curve(fig2_params, spec, lambda_=0.99), manual)
