"""Genetic search over (k, feature weights), minimizing the error rate.

Fitness runs the full segmentation pipeline against ground truth, so any
result it produces is oracle-tuned and reported as such. The algorithm is
fully pinned: tournament selection of size 3, uniform crossover, per-gene
mutation (k reseeds uniformly in range, weight genes get Gaussian noise with
sigma 0.1 clamped to [0, 1]), elitism, and a seeded generator, so a seed
reproduces the whole history bit for bit.
"""

from __future__ import annotations

import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import pipeline
from .features import N_FEATURES
from .seeds import SeedMap

MUTATION_SIGMA = 0.1


@dataclass
class GaConfig:
    population_size: int = 50
    generations: int = 30
    crossover_rate: float = 0.8
    mutation_rate: float = 0.05
    elitism: int = 2
    k_min: int = 1
    k_max: int = 100
    rng_seed: int = 0
    tournament_size: int = 3

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError("need 1 <= k_min <= k_max")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must be in [0, population_size)")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")


@dataclass
class Genome:
    k: int
    lam: np.ndarray
    fitness: float | None = None

    def key(self) -> tuple[int, bytes]:
        return (int(self.k), self.lam.tobytes())

    def copy(self) -> "Genome":
        return Genome(k=int(self.k), lam=self.lam.copy(), fitness=self.fitness)


def evaluate(
    genome: Genome,
    image: np.ndarray,
    seeds: SeedMap,
    gt_codes: np.ndarray,
    cache: dict | None = None,
    lock: threading.Lock | None = None,
) -> float:
    """Error rate of the genome's segmentation; pipeline failures score 1.0."""
    key = genome.key()
    if cache is not None:
        if lock:
            with lock:
                hit = cache.get(key)
        else:
            hit = cache.get(key)
        if hit is not None:
            genome.fitness = hit
            return hit
    try:
        params = pipeline.SegParams(k=genome.k, lam=genome.lam)
        result = pipeline.segment(image, seeds, params)
        fitness = pipeline.error_rate(result, gt_codes, seeds)
    except (ValueError, RuntimeError) as exc:
        warnings.warn(f"genome k={genome.k} failed evaluation: {exc}", stacklevel=2)
        fitness = 1.0
    genome.fitness = fitness
    if cache is not None:
        if lock:
            with lock:
                cache[key] = fitness
        else:
            cache[key] = fitness
    return fitness


@dataclass
class OptimizeOutcome:
    best: Genome
    history: list[tuple[int, float, float]] = field(default_factory=list)


def optimize(
    image: np.ndarray,
    seeds: SeedMap,
    gt_codes: np.ndarray,
    config: GaConfig | None = None,
    jobs: int = 1,
) -> OptimizeOutcome:
    """Run the GA; returns the best-ever genome and (gen, best, mean) rows.

    Generation 0 is the evaluated random initial population; with
    ``generations=0`` the search reduces to its best member.
    """
    config = config or GaConfig()
    rng = np.random.default_rng(config.rng_seed)
    cache: dict = {}
    lock = threading.Lock() if jobs > 1 else None

    def random_genome() -> Genome:
        k = int(rng.integers(config.k_min, config.k_max + 1))
        lam = rng.random(N_FEATURES)
        return Genome(k=k, lam=lam)

    def evaluate_all(pop: list[Genome]) -> None:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [
                    pool.submit(evaluate, g, image, seeds, gt_codes, cache, lock)
                    for g in pop
                ]
                for fut in futures:
                    fut.result()
        else:
            for g in pop:
                evaluate(g, image, seeds, gt_codes, cache, lock)

    def tournament(pop: list[Genome]) -> Genome:
        picks = rng.integers(0, len(pop), size=config.tournament_size)
        fits = np.array([pop[i].fitness for i in picks])
        return pop[picks[int(np.argmin(fits))]]

    def make_child(pop: list[Genome]) -> Genome:
        p1 = tournament(pop)
        p2 = tournament(pop)
        if rng.random() < config.crossover_rate:
            take_first = rng.random(N_FEATURES + 1) < 0.5
            k = p1.k if take_first[0] else p2.k
            lam = np.where(take_first[1:], p1.lam, p2.lam)
            child = Genome(k=int(k), lam=lam)
        else:
            child = p1.copy()
            child.fitness = None
        if rng.random() < config.mutation_rate:
            child.k = int(rng.integers(config.k_min, config.k_max + 1))
        mutate = rng.random(N_FEATURES) < config.mutation_rate
        if mutate.any():
            noise = rng.normal(0.0, MUTATION_SIGMA, size=int(mutate.sum()))
            lam = child.lam.copy()
            lam[mutate] = np.clip(lam[mutate] + noise, 0.0, 1.0)
            child.lam = lam
        return child

    population = [random_genome() for _ in range(config.population_size)]
    evaluate_all(population)
    history: list[tuple[int, float, float]] = []
    fits = np.array([g.fitness for g in population])
    history.append((0, float(fits.min()), float(fits.mean())))
    best = population[int(np.argmin(fits))].copy()

    for gen in range(1, config.generations + 1):
        order = np.argsort([g.fitness for g in population], kind="stable")
        elites = [population[i].copy() for i in order[: config.elitism]]
        children = [make_child(population) for _ in range(config.population_size - len(elites))]
        population = elites + children
        evaluate_all(population)
        fits = np.array([g.fitness for g in population])
        history.append((gen, float(fits.min()), float(fits.mean())))
        gen_best = population[int(np.argmin(fits))]
        if gen_best.fitness < best.fitness:
            best = gen_best.copy()
    return OptimizeOutcome(best=best, history=history)
