import numpy as np
import pytest

from sppm.config import ProblemSpec
from sppm.errors import ValidationError
from sppm.generate import generate_problem
from sppm.problems import evaluate_phi
from sppm.regularizers import prox_map
from sppm.rng import RngStream


def spec(kind="quadratic-ball", **kw):
    base = dict(kind=kind, dim=4, mu=1.0, L=2.0, instance_seed=3)
    if kind == "quadratic-ball" or kind == "logreg-ridge-ball":
        base["radius"] = 1.0
    else:
        base["box_halfwidth"] = 1.0
        base["components"] = 30
    base.update(kw)
    return ProblemSpec(**base)


def test_quadratic_spectrum_attains_mu_and_L():
    p = generate_problem(spec(dim=2), 3)
    eigs = np.linalg.eigvalsh(p.meta["hessian"])
    assert np.allclose(sorted(eigs), [1.0, 2.0], atol=1e-9)


def test_quadratic_spectrum_inside_range():
    p = generate_problem(spec(dim=9, L=5.0), 4)
    eigs = np.linalg.eigvalsh(p.meta["hessian"])
    assert eigs.min() == pytest.approx(1.0, abs=1e-9)
    assert eigs.max() == pytest.approx(5.0, abs=1e-9)
    assert np.all(eigs > 1.0 - 1e-9) and np.all(eigs < 5.0 + 1e-9)


@pytest.mark.parametrize("kind", ["quadratic-ball", "ridge-l1-box", "logreg-ridge-ball"])
def test_same_seed_same_instance(kind):
    a = generate_problem(spec(kind), 17)
    b = generate_problem(spec(kind), 17)
    assert np.array_equal(a.x_star, b.x_star)
    assert np.array_equal(a.start, b.start)
    x = a.h.interior_point(a.dim)
    assert np.array_equal(a.grad_f(x), b.grad_f(x))
    c = generate_problem(spec(kind), 18)
    assert not np.array_equal(a.start, c.start)


@pytest.mark.parametrize("kind", ["quadratic-ball", "ridge-l1-box", "logreg-ridge-ball"])
def test_curvature_envelope_all_kinds(kind):
    p = generate_problem(spec(kind), 5)
    gen = RngStream(71).child(kind).generator(shared=False)
    for _ in range(300):
        x = p.h.prox(0.8 * gen.standard_normal(p.dim), 1.0)
        y = p.h.prox(0.8 * gen.standard_normal(p.dim), 1.0)
        gap = p.f(y) - p.f(x) - float(p.grad_f(x) @ (y - x))
        dd = float(np.sum((y - x) ** 2))
        assert p.mu / 2.0 * dd - 1e-9 <= gap <= p.L / 2.0 * dd + 1e-9


@pytest.mark.parametrize("kind", ["quadratic-ball", "ridge-l1-box", "logreg-ridge-ball"])
def test_optimum_is_prox_fixpoint(kind):
    p = generate_problem(spec(kind), 6)
    t = 1.0 / p.L
    step = prox_map(p.h, p.x_star - t * p.grad_f(p.x_star), t)
    assert np.linalg.norm(step - p.x_star) <= 1e-7
    assert p.phi_star == pytest.approx(evaluate_phi(p, p.x_star), abs=1e-12)


def test_cold_start_on_ball_boundary():
    p = generate_problem(spec(dim=7), 9)
    assert np.linalg.norm(p.start) == pytest.approx(1.0, abs=1e-12)
    assert p.h.contains(p.start)


def test_cold_start_on_box_corner():
    p = generate_problem(spec("ridge-l1-box", dim=6), 9)
    assert np.allclose(np.abs(p.start), 1.0)
    assert p.h.contains(p.start)


def test_finite_sum_oracle_wiring():
    p = generate_problem(spec("ridge-l1-box"), 12)
    oracle = p.meta["oracle"]
    assert oracle.count == 30
    assert oracle.sigma > 0.0
    assert p.sigma == oracle.sigma
    # mean component gradient equals the full gradient
    x = p.h.interior_point(p.dim)
    full = oracle.component_grad(x, np.arange(30)).mean(axis=0)
    assert np.allclose(full, p.grad_f(x), atol=1e-10)


def test_validation_errors():
    with pytest.raises(ValidationError):
        generate_problem(spec(mu=3.0), 1)  # mu > L
    with pytest.raises(ValidationError):
        generate_problem(spec(radius=0.0), 1)
    with pytest.raises(ValidationError):
        generate_problem(spec("ridge-l1-box", components=2), 1)  # pool < dim
