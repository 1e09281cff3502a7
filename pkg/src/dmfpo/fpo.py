"""Fidelity profile optimisation with a real-coded genetic algorithm.

A :class:`Skeleton` is a pulse sequence whose free angles are
:class:`~dmfpo.expr.Gene` nodes.  The GA searches gene values that make
the compiled sequence match the exact propagator, either at one (gamma,
tau) node at a time (pointwise mode) or over a whole grid when the genes
are surface coefficients (surface mode).

Operators: k-tournament selection, BLX-alpha crossover, per-gene Gaussian
mutation with a geometrically decaying width, and elitism.  Generation
``g`` of node ``n`` draws from ``numpy.random.default_rng([seed, n, g])``
so runs are reproducible and independent of execution order.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import expr as ex
from .core import gate_fidelity
from .exceptions import ConfigError
from .sequence import compile as compile_sequence
from .sequence import structure_a, structure_b, substitute_genes, target_a, target_b

TWO_PI = 2 * math.pi
FOUR_PI = 4 * math.pi
SIGMA_DECAY = 0.99
MIN_FIDELITY_TARGET = 0.9999
PENALTY_WEIGHT = 10.0

TARGETS = {"dm_xy": target_a, "dm_xy_primed": target_b}


@dataclass(frozen=True)
class GAConfig:
    population: int = 60
    max_generations: int = 500
    tournament_k: int = 3
    crossover_rate: float = 0.9
    blx_alpha: float = 0.5
    mutation_rate: float = 0.2
    mutation_sigma: float = 0.3
    elitism: int = 2
    target_fitness: float = 0.999999
    stagnation_limit: int = 100
    rng_seed: int = 20120301

    def __post_init__(self):
        if self.population < 2:
            raise ConfigError(f"population must be >= 2, got {self.population}")
        if not 0 <= self.elitism < self.population:
            raise ConfigError("elitism must satisfy 0 <= elitism < population")
        if self.max_generations < 1:
            raise ConfigError("max_generations must be >= 1")
        if not 1 <= self.tournament_k <= self.population:
            raise ConfigError("tournament_k must be in [1, population]")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.blx_alpha < 0 or self.mutation_sigma < 0:
            raise ConfigError("blx_alpha and mutation_sigma must be non-negative")
        if self.stagnation_limit < 1:
            raise ConfigError("stagnation_limit must be >= 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, data):
        # field types are classes, or strings under postponed annotations
        known = {f.name: getattr(f.type, "__name__", f.type) for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown GA config fields: {unknown}")
        kwargs = {}
        for k, v in data.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"GA config field {k!r} must be a number")
            if known[k] == "int" and not float(v).is_integer():
                raise ConfigError(f"GA config field {k!r} must be an integer")
            kwargs[k] = int(v) if known[k] == "int" else float(v)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"GA config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("GA config must be a JSON object")
        return cls.from_dict(data)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _flip_a(genes):
    """(theta1, theta2) -> (-theta1, theta2 + pi): same unitary for skeleton A."""
    g = np.array(genes, dtype=float)
    g[..., 0] = -g[..., 0]
    g[..., 1] = g[..., 1] + math.pi
    return g


@dataclass(frozen=True)
class Skeleton:
    """Pulse-sequence template with gene slots.

    Attributes
    ----------
    sequence : PulseSequence
        Template whose free angles are ``Gene`` nodes.
    target : str
        ``"dm_xy"`` or ``"dm_xy_primed"`` (both in spin time units).
    slots : tuple of str
        Gene names, in gene-index order.
    wrap : bool
        Angle genes live in ``[0, 4 pi)``; surface coefficients are unbounded.
    init_low, init_high : tuple of float
        Range of the uniform initial population.
    periods : tuple of float
        Shift of each gene that leaves the fidelity unchanged.
    flips : tuple
        Extra gene maps (module-level callables) that leave the compiled
        unitary unchanged up to global phase.
    anchor : tuple of float
        Reference genes used to choose a branch at the first node.
    """

    sequence: object
    target: str
    slots: tuple
    wrap: bool = True
    init_low: tuple = None
    init_high: tuple = None
    periods: tuple = None
    flips: tuple = ()
    anchor: tuple = None

    def __post_init__(self):
        n = self.gene_count
        if sorted(self.sequence.genes()) != list(range(n)):
            raise ValueError(f"skeleton genes {sorted(self.sequence.genes())} do not match "
                             f"{n} slots {self.slots}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.init_low is None:
            object.__setattr__(self, "init_low", (0.0,) * n)
        if self.init_high is None:
            object.__setattr__(self, "init_high", (FOUR_PI,) * n)
        if self.periods is None:
            object.__setattr__(self, "periods", (TWO_PI,) * n)
        if self.anchor is None:
            object.__setattr__(self, "anchor", (0.0,) * n)

    @property
    def gene_count(self):
        return len(self.slots)

    def compile(self, gamma, tau, genes):
        return compile_sequence(self.sequence, gamma, tau, genes)

    def target_unitary(self, gamma, tau):
        return TARGETS[self.target](gamma, tau)

    def realise(self, genes, name=None):
        """Concrete sequence with the genes substituted."""
        seq = substitute_genes(self.sequence, genes)
        return replace(seq, name=name) if name else seq


def skeleton_a():
    """Decomposition-A structure with theta1, theta2 free (pointwise mode)."""
    seq = structure_a(ex.Gene(0), ex.Gene(1), name="skeleton_A", source="ga-derived")
    return Skeleton(seq, "dm_xy", ("theta1", "theta2"), flips=(_flip_a,),
                    anchor=(0.0, math.pi))


def skeleton_b():
    """Decomposition-B structure with theta1..theta4 free (pointwise mode)."""
    seq = structure_b(ex.Gene(0), ex.Gene(1), ex.Gene(2), ex.Gene(3),
                      name="skeleton_B", source="ga-derived")
    return Skeleton(seq, "dm_xy_primed", ("theta1", "theta2", "theta3", "theta4"),
                    anchor=(math.pi, 0.0, 0.0, 0.0))


def surface_skeleton_a():
    """Decomposition-A structure whose genes are surface coefficients.

    theta1 = (g0 + g1 cos(g2 gamma) + g3 sin(g2 gamma)) tau,
    theta2 = g4 exp(g5 gamma) + g6 exp(g7 gamma).
    """
    g = [ex.Gene(i) for i in range(8)]
    theta1 = ex.linear_tau(ex.trig_gamma(g[0], g[1], g[2], g[3]))
    theta2 = ex.exp2(g[4], g[5], g[6], g[7])
    seq = structure_a(theta1, theta2, name="surface_A", source="ga-derived")
    slots = ("theta1.a", "theta1.b", "theta1.c", "theta1.d",
             "theta2.a", "theta2.b", "theta2.c", "theta2.d")
    return Skeleton(seq, "dm_xy", slots, wrap=False,
                    init_low=(0.0, -1.0, 0.5, -0.5, 0.0, -2.0, 0.0, -2.0),
                    init_high=(1.5, 1.0, 2.0, 0.5, 4.0, 0.5, 4.0, 0.5),
                    periods=(math.inf,) * 8)


@dataclass(frozen=True)
class FidelityProfile:
    gamma_axis: np.ndarray
    tau_axis: np.ndarray
    values: np.ndarray      # values[i, j] at (gamma_axis[i], tau_axis[j])

    @property
    def min(self):
        return float(self.values.min())

    @property
    def mean(self):
        return float(self.values.mean())

    @property
    def argmin(self):
        i, j = np.unravel_index(np.argmin(self.values), self.values.shape)
        return float(self.gamma_axis[i]), float(self.tau_axis[j])

    def rows(self):
        """(gamma, tau, fidelity) triples in gamma-major order."""
        for i, g in enumerate(self.gamma_axis):
            for j, t in enumerate(self.tau_axis):
                yield float(g), float(t), float(self.values[i, j])


def grid_axes(n_gamma=31, n_tau=31, gamma_range=(0.0, 1.0), tau_range=(0.0, 15.0)):
    return (np.linspace(*gamma_range, n_gamma), np.linspace(*tau_range, n_tau))


def profile(seq, gamma_axis, tau_axis, target="dm_xy", genes=None):
    """Fidelity of ``seq`` against the exact target on the grid ``gamma x tau``.

    ``seq`` may be a PulseSequence, or a Skeleton together with ``genes``.
    ``target`` is a key of ``TARGETS`` or a callable ``(gamma, tau) -> U``.
    """
    gamma_axis = np.atleast_1d(np.asarray(gamma_axis, dtype=float))
    tau_axis = np.atleast_1d(np.asarray(tau_axis, dtype=float))
    if gamma_axis.size == 0 or tau_axis.size == 0:
        raise ValueError("profile grid must be non-empty")
    if isinstance(seq, Skeleton):
        target = seq.target
        seq = seq.sequence
    g, t = np.meshgrid(gamma_axis, tau_axis, indexing="ij")
    u = compile_sequence(seq, g, t, genes)
    v = TARGETS[target](g, t) if isinstance(target, str) else target(g, t)
    return FidelityProfile(gamma_axis, tau_axis, np.asarray(gate_fidelity(u, v)))


def _aggregate(fid):
    """Mean fidelity minus a penalty when the worst node drops below 0.9999."""
    return fid.mean(axis=-1) - PENALTY_WEIGHT * np.maximum(0.0, MIN_FIDELITY_TARGET - fid.min(axis=-1))


class _Evaluator:
    """Fitness over a fixed node set, with targets computed once."""

    def __init__(self, skeleton, gammas, taus):
        self.skeleton = skeleton
        self.gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
        self.taus = np.atleast_1d(np.asarray(taus, dtype=float))
        self.targets = skeleton.target_unitary(self.gammas, self.taus)

    def fidelities(self, population):
        pop = np.atleast_2d(population)
        u = self.skeleton.compile(self.gammas[None, :], self.taus[None, :], pop[:, None, :])
        return np.asarray(gate_fidelity(u, self.targets[None]))

    def __call__(self, population):
        return _aggregate(self.fidelities(population))


def fitness(genes, skeleton, gammas, taus):
    """Mean fidelity over the nodes minus ``10 * max(0, 0.9999 - min fidelity)``.

    ``genes`` may be one chromosome or a population (rows); the result has
    one value per chromosome.
    """
    genes = np.asarray(genes, dtype=float)
    if genes.shape[-1] != skeleton.gene_count:
        raise ValueError(f"expected {skeleton.gene_count} genes, got {genes.shape[-1]}")
    f = _Evaluator(skeleton, gammas, taus)(genes)
    return float(f[0]) if genes.ndim == 1 else f


@dataclass
class EvolveResult:
    best: np.ndarray
    best_fitness: float
    history: list = field(default_factory=list)   # (best, mean) per generation
    generations: int = 0
    converged: bool = False
    stop_reason: str = ""


def _tournament(rng, fit, k, n):
    picks = rng.integers(0, len(fit), size=(n, k))
    winners = np.argmax(fit[picks], axis=1)
    return picks[np.arange(n), winners]


def evolve(skeleton, gammas, taus, config=None, node_index=0, initial_population=None):
    """Run the GA on one node set.

    Stops when the best fitness reaches ``config.target_fitness``, when it
    has not improved for ``stagnation_limit`` generations, or after
    ``max_generations``.  The history has one ``(best, mean)`` pair per
    evaluated generation and its best column never decreases.
    """
    config = config or GAConfig()
    n = skeleton.gene_count
    low = np.asarray(skeleton.init_low, dtype=float)
    high = np.asarray(skeleton.init_high, dtype=float)
    evaluate = _Evaluator(skeleton, gammas, taus)

    if initial_population is None:
        rng0 = np.random.default_rng([config.rng_seed, node_index, 0])
        pop = rng0.uniform(low, high, size=(config.population, n))
    else:
        pop = np.array(initial_population, dtype=float).reshape(config.population, n)

    history = []
    best_so_far = -math.inf
    stale = 0
    reason = "max_generations"
    for gen in range(config.max_generations):
        fit = evaluate(pop)
        order = np.argsort(-fit, kind="stable")
        best = float(fit[order[0]])
        history.append((best, float(fit.mean())))
        if best > best_so_far:
            best_so_far = best
            stale = 0
        else:
            stale += 1
        if best >= config.target_fitness:
            reason = "target"
            break
        if stale >= config.stagnation_limit:
            reason = "stagnation"
            break
        if gen == config.max_generations - 1:
            break

        rng = np.random.default_rng([config.rng_seed, node_index, gen + 1])
        n_child = config.population - config.elitism
        pa = pop[_tournament(rng, fit, config.tournament_k, n_child)]
        pb = pop[_tournament(rng, fit, config.tournament_k, n_child)]
        lo = np.minimum(pa, pb)
        span = np.abs(pa - pb)
        blend = rng.uniform(lo - config.blx_alpha * span, lo + span + config.blx_alpha * span)
        cross = rng.random(n_child) < config.crossover_rate
        children = np.where(cross[:, None], blend, pa)
        sigma = config.mutation_sigma * SIGMA_DECAY ** gen
        mutate = rng.random(children.shape) < config.mutation_rate
        children = children + mutate * rng.normal(0.0, 1.0, children.shape) * sigma
        if skeleton.wrap:
            children = np.mod(children, FOUR_PI)
        pop = np.concatenate([pop[order[:config.elitism]], children])

    fit = evaluate(pop)
    i = int(np.argmax(fit))
    return EvolveResult(best=pop[i].copy(), best_fitness=float(fit[i]), history=history,
                        generations=len(history), converged=float(fit[i]) >= config.target_fitness,
                        stop_reason=reason)


@dataclass
class NodeResult:
    gamma: float
    tau: float
    genes: np.ndarray
    fidelity: float
    converged: bool
    generations: int
    free: tuple = ()     # per slot: True if the slot does not affect the fidelity here


def _run_node(args):
    skeleton, index, gamma, tau, config = args
    res = evolve(skeleton, [gamma], [tau], config, node_index=index)
    fid = float(_Evaluator(skeleton, [gamma], [tau]).fidelities(res.best)[0, 0])
    return NodeResult(gamma, tau, res.best, fid, res.converged, res.generations)


def optimize_pointwise(skeleton, nodes, config=None, workers=1, canonical=True):
    """Independent GA run at every (gamma, tau) node.

    Nodes are returned sorted by (gamma, tau).  With ``canonical`` the gene
    sets are moved onto one continuous branch (see :func:`canonicalize`).
    """
    config = config or GAConfig()
    nodes = sorted((float(g), float(t)) for g, t in nodes)
    if not nodes:
        raise ValueError("no nodes given")
    jobs = [(skeleton, i, g, t, config) for i, (g, t) in enumerate(nodes)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_node, jobs))
    else:
        results = [_run_node(j) for j in jobs]
    return canonicalize(results, skeleton) if canonical else results


def _nearest_representative(skeleton, genes, reference):
    """Member of the gene orbit closest to ``reference``."""
    periods = np.asarray(skeleton.periods, dtype=float)
    best, best_d = None, math.inf
    for f in (None,) + tuple(skeleton.flips):
        c = np.asarray(genes, dtype=float) if f is None else f(genes)
        finite = np.isfinite(periods)
        shift = np.zeros_like(c)
        shift[finite] = periods[finite] * np.round((reference[finite] - c[finite]) / periods[finite])
        c = c + shift
        d = float(np.linalg.norm(c - reference))
        if d < best_d - 1e-12:
            best, best_d = c, d
    return best


def canonicalize(results, skeleton, tol=1e-10):
    """Choose, node by node, the equivalent gene set that continues the branch.

    Nodes are visited gamma-major.  The reference for a node is the linear
    extrapolation of the two previous nodes of its gamma row, else the same
    tau node of the previous row, else the previous node of the row, else
    the skeleton anchor.  Slots that do not influence the fidelity at a
    node are set to the reference value and flagged in ``free``.
    """
    by_gamma = {}
    for r in sorted(results, key=lambda r: (r.gamma, r.tau)):
        by_gamma.setdefault(r.gamma, []).append(r)
    out = []
    prev_row = None
    for gamma in sorted(by_gamma):
        row = []
        for j, r in enumerate(by_gamma[gamma]):
            if j >= 2:
                t0, t1, t2 = row[-2].tau, row[-1].tau, r.tau
                w = (t2 - t1) / (t1 - t0)
                ref = row[-1].genes + w * (row[-1].genes - row[-2].genes)
            elif prev_row is not None and j < len(prev_row):
                ref = prev_row[j].genes
            elif j == 1:
                ref = row[-1].genes
            else:
                ref = np.asarray(skeleton.anchor, dtype=float)
            genes = _nearest_representative(skeleton, r.genes, ref)
            ev = _Evaluator(skeleton, [r.gamma], [r.tau])
            fid = float(ev.fidelities(genes)[0, 0])
            free = []
            for k in range(skeleton.gene_count):
                trial = genes.copy()
                trial[k] = ref[k]
                probe = genes.copy()
                probe[k] += 0.5
                f_trial = float(ev.fidelities(trial)[0, 0])
                f_probe = float(ev.fidelities(probe)[0, 0])
                is_free = abs(f_probe - fid) <= tol and f_trial >= fid - tol
                if is_free:
                    genes = trial
                free.append(is_free)
            row.append(replace(r, genes=genes, fidelity=float(ev.fidelities(genes)[0, 0]),
                               free=tuple(free)))
        out.extend(row)
        prev_row = row
    return out


def optimize_surface(skeleton, gammas, taus, config=None, initial_population=None):
    """GA directly over surface coefficients on the full node set."""
    g, t = np.meshgrid(np.asarray(gammas, float), np.asarray(taus, float), indexing="ij")
    return evolve(skeleton, g.ravel(), t.ravel(), config, initial_population=initial_population)
