"""Real-coded elitist genetic algorithm over the six membership-shape genes.

Tournament selection, blend crossover, Gaussian mutation clipped to the gene
bounds, elites carried unchanged (with their cached fitness, so the recorded
best never regresses even when the objective is noisy).  Each individual's
simulation noise comes from a seed derived from (run seed, generation, slot),
so evaluation order cannot change the outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .fuzzy import DC_BOUNDS, GENE_NAMES, SF_BOUNDS, SfDcGenes, build_memberships
from .ilc import DivergenceError, TrialSetup, run_learning

GENE_LO = np.array([SF_BOUNDS[0]] * 3 + [DC_BOUNDS[0]] * 3)
GENE_HI = np.array([SF_BOUNDS[1]] * 3 + [DC_BOUNDS[1]] * 3)


@dataclass(frozen=True)
class Chromosome:
    """Gene vector in the fixed order S_I1, S_I2, S_O1, D_I1, D_I2, D_O1."""

    genes: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.genes, dtype=float)
        object.__setattr__(self, "genes", g)
        if g.shape != (6,):
            raise ValueError("chromosome must hold exactly six genes")

    def validate(self) -> "Chromosome":
        SfDcGenes.from_array(self.genes)
        return self

    def to_sfdc(self) -> SfDcGenes:
        return SfDcGenes.from_array(self.genes)


def clip_to_bounds(c: Chromosome) -> Chromosome:
    return Chromosome(np.clip(c.genes, GENE_LO, GENE_HI))


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    generations: int = 5
    crossover_rate: float = 0.9
    blend_alpha: float = 0.5
    mutation_rate: float = 0.1
    mutation_std: float = 0.1        # per gene, fraction of the gene range
    elitism_count: int = 1
    tournament_size: int = 3
    seed: int = 0
    fitness_iterations: int = 3      # learning trials per evaluation
    early_stop_fitness: Optional[float] = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population must have at least two individuals")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.elitism_count < 1 or self.elitism_count >= self.population_size:
            raise ValueError("elitism_count must be in [1, population_size)")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")


@dataclass
class GaHistory:
    best_fitness: list = field(default_factory=list)
    mean_fitness: list = field(default_factory=list)
    best_genes: list = field(default_factory=list)

    def append(self, population, fitnesses):
        order = int(np.argmin(fitnesses))
        self.best_fitness.append(float(fitnesses[order]))
        self.mean_fitness.append(float(np.mean(fitnesses)))
        self.best_genes.append(population[order].genes.copy())


def universes_of(setup: TrialSetup):
    fb = setup.feedback
    if not hasattr(fb, "input_e"):
        raise TypeError("tuning needs a fuzzy feedback config to supply the "
                        "membership universes")
    return (fb.input_e.universe_bound, fb.input_de.universe_bound,
            fb.output.universe_bound)


def fitness(c: Chromosome, base_setup: TrialSetup, k: int,
            noise_seed: int = 0) -> float:
    """Best per-trial rms over a k-iteration learning run with this genome.

    Iteration 1 runs under the bootstrap PID so every candidate starts from
    the same error level.  A diverged run scores the guard ceiling instead of
    raising, keeping the objective finite everywhere.
    """
    genes = c.validate().to_sfdc()
    U_e, U_de, U_out = universes_of(base_setup)
    candidate = build_memberships(genes, U_e, U_de, U_out)
    setup = replace(
        base_setup,
        feedback=candidate,
        iterations=k,
        use_pid_bootstrap=base_setup.bootstrap_pid is not None,
        disturbance=replace(base_setup.disturbance, seed=noise_seed))
    try:
        curve = run_learning(setup)
    except DivergenceError as err:
        return err.threshold
    return curve.best_rms()


def _derived_seed(run_seed: int, generation: int, index: int) -> int:
    ss = np.random.SeedSequence([run_seed, generation, index])
    return int(ss.generate_state(1)[0])


def _tournament(rng, fitnesses: np.ndarray, size: int) -> int:
    picks = rng.integers(0, len(fitnesses), size=size)
    return int(picks[np.argmin(fitnesses[picks])])


def _blend(rng, p1: np.ndarray, p2: np.ndarray, alpha: float) -> np.ndarray:
    u = rng.uniform(-alpha, 1.0 + alpha, size=p1.shape)
    return p1 + u * (p2 - p1)


def evolve(cfg: GaConfig, base_setup: Optional[TrialSetup] = None,
           fitness_fn: Optional[Callable[[Chromosome, int], float]] = None):
    """Run the generational loop; returns (best chromosome, history).

    ``fitness_fn(chromosome, derived_seed)`` overrides the simulator-backed
    objective (surrogate objectives for fast self-tests).
    """
    if fitness_fn is None:
        if base_setup is None:
            raise ValueError("need a base setup or an explicit fitness function")

        def fitness_fn(c, seed):
            return fitness(c, base_setup, cfg.fitness_iterations, noise_seed=seed)

    rng = np.random.default_rng(cfg.seed)
    span = GENE_HI - GENE_LO
    pop = [Chromosome(rng.uniform(GENE_LO, GENE_HI)) for _ in range(cfg.population_size)]
    fits = np.array([fitness_fn(ind, _derived_seed(cfg.seed, 0, i))
                     for i, ind in enumerate(pop)])

    history = GaHistory()
    history.append(pop, fits)

    for gen in range(1, cfg.generations + 1):
        if (cfg.early_stop_fitness is not None
                and history.best_fitness[-1] <= cfg.early_stop_fitness):
            break
        order = np.argsort(fits, kind="stable")
        elites = [pop[i] for i in order[:cfg.elitism_count]]
        elite_fits = [float(fits[i]) for i in order[:cfg.elitism_count]]

        children = []
        while len(children) < cfg.population_size - cfg.elitism_count:
            i1 = _tournament(rng, fits, cfg.tournament_size)
            i2 = _tournament(rng, fits, cfg.tournament_size)
            g1, g2 = pop[i1].genes, pop[i2].genes
            if rng.random() < cfg.crossover_rate:
                child = _blend(rng, g1, g2, cfg.blend_alpha)
            else:
                child = g1.copy()
            mask = rng.random(6) < cfg.mutation_rate
            if mask.any():
                child = child + mask * rng.normal(0.0, cfg.mutation_std * span)
            children.append(clip_to_bounds(Chromosome(child)))

        child_fits = [fitness_fn(ind, _derived_seed(cfg.seed, gen, i))
                      for i, ind in enumerate(children)]
        pop = elites + children
        fits = np.array(elite_fits + child_fits)
        history.append(pop, fits)

    best = int(np.argmin(fits))
    return pop[best], history
