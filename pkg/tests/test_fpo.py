import math

import numpy as np
import pytest

from dmfpo import fpo
from dmfpo.core import gate_fidelity
from dmfpo.exceptions import ConfigError
from dmfpo.sequence import compile, decomposition_a
from oracles import block_propagator, exact_angles_a


def test_config_defaults_and_json_round_trip():
    cfg = fpo.GAConfig()
    assert cfg.population == 60 and cfg.max_generations == 500
    assert fpo.GAConfig.from_json(cfg.to_json()) == cfg
    assert fpo.GAConfig.from_dict({"population": 30}).population == 30


@pytest.mark.parametrize("data", [
    {"population": 1},
    {"elitism": 60},
    {"mutation_rate": 1.5},
    {"tournament_k": 0},
    {"population": 10.5},
    {"population": "60"},
    {"seed": 3},
])
def test_config_validation(data):
    with pytest.raises(ConfigError):
        fpo.GAConfig.from_dict(data)


def test_config_rejects_bad_json():
    with pytest.raises(ConfigError):
        fpo.GAConfig.from_json("[1, 2]")
    with pytest.raises(ConfigError):
        fpo.GAConfig.from_json("{not json")


def test_profile_matches_pointwise_loop():
    ga, ta = fpo.grid_axes(4, 5)
    prof = fpo.profile(decomposition_a(), ga, ta)
    for i, g in enumerate(ga):
        for j, t in enumerate(ta):
            want = gate_fidelity(compile(decomposition_a(), g, t), block_propagator(g, t / 4))
            assert prof.values[i, j] == pytest.approx(want, abs=1e-13)
    rows = list(prof.rows())
    assert len(rows) == 20 and rows[0][:2] == (0.0, 0.0)
    assert prof.min == min(r[2] for r in rows)


def test_fitness_of_exact_angles_is_one():
    skel = fpo.skeleton_a()
    g, t = 0.6, 9.0
    genes = np.array(exact_angles_a(g, t))
    assert fpo.fitness(genes, skel, [g], [t]) == pytest.approx(1.0, abs=1e-12)
    pop = np.stack([genes, genes + 0.3])
    f = fpo.fitness(pop, skel, [g], [t])
    assert f.shape == (2,) and f[0] > f[1]


def test_flip_symmetry_preserves_fidelity():
    skel = fpo.skeleton_a()
    rng = np.random.default_rng(0)
    for _ in range(10):
        genes = rng.uniform(0, 4 * math.pi, 2)
        g, t = rng.uniform(0, 1), rng.uniform(0, 15)
        for flip in skel.flips:
            a = fpo.fitness(genes, skel, [g], [t])
            b = fpo.fitness(flip(genes), skel, [g], [t])
            assert a == pytest.approx(b, abs=1e-12)


def test_evolve_is_deterministic_and_monotone():
    skel = fpo.skeleton_a()
    cfg = fpo.GAConfig(max_generations=40, rng_seed=5)
    r1 = fpo.evolve(skel, [0.5], [6.0], cfg)
    r2 = fpo.evolve(skel, [0.5], [6.0], cfg)
    assert np.array_equal(r1.best, r2.best) and r1.history == r2.history
    best = [h[0] for h in r1.history]
    assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
    r3 = fpo.evolve(skel, [0.5], [6.0], fpo.GAConfig(max_generations=40, rng_seed=6))
    assert not np.array_equal(r1.best, r3.best)


def test_evolve_reaches_target_at_one_node():
    skel = fpo.skeleton_a()
    res = fpo.evolve(skel, [0.3], [4.0])
    assert res.converged and res.stop_reason == "target"
    assert res.best_fitness >= fpo.GAConfig().target_fitness


def test_pointwise_branch_is_continuous():
    skel = fpo.skeleton_a()
    nodes = [(g, t) for g in (0.0, 0.5, 1.0) for t in (0.0, 5.0, 10.0, 15.0)]
    res = fpo.optimize_pointwise(skel, nodes)
    assert all(r.converged and r.fidelity >= 0.9999 for r in res)
    assert [(r.gamma, r.tau) for r in res] == sorted(nodes)
    # canonical genes follow the closed-form branch
    for r in res:
        t1, t2 = exact_angles_a(r.gamma, r.tau)
        assert abs(r.genes[0] - t1) < 0.02
        if not r.free[1]:
            assert abs(r.genes[1] - t2) < 0.02
    # at tau = 0 the second angle does not matter
    assert res[0].free == (False, True)


def test_pointwise_workers_match_serial():
    skel = fpo.skeleton_a()
    nodes = [(0.2, 3.0), (0.8, 12.0)]
    cfg = fpo.GAConfig(max_generations=60)
    a = fpo.optimize_pointwise(skel, nodes, cfg, workers=1)
    b = fpo.optimize_pointwise(skel, nodes, cfg, workers=2)
    assert all(np.array_equal(x.genes, y.genes) for x, y in zip(a, b))


def test_realised_skeleton_is_concrete():
    skel = fpo.skeleton_a()
    genes = exact_angles_a(0.2, 2.0)
    seq = skel.realise(genes, name="node")
    assert seq.genes() == frozenset() and seq.name == "node"
    assert gate_fidelity(compile(seq, 0.2, 2.0), block_propagator(0.2, 0.5)) > 1 - 1e-12


def test_surface_skeleton_accepts_reference_surfaces():
    skel = fpo.surface_skeleton_a()
    genes = np.array([0.8423, -0.3455, 1.117, 0.01806, 1.345, -0.8731, 1.796, 0.0])
    ga, ta = fpo.grid_axes(11, 11)
    prof = fpo.profile(skel, ga, ta, genes=genes)
    assert prof.min >= 0.999
