"""Real-coded genetic algorithm over the bounded Chebyshev design box."""
from dataclasses import dataclass
import time

import numpy as np

from .chebyshev import coefficient_bounds
from .optimize import make_result


@dataclass(frozen=True)
class GAOptions:
    """Hyperparameters; ``None`` entries are derived from the problem size.

    population : 20 * dof, at least 60
    mutation_rate : 1 / dof (per gene)
    mutation_sigma : initial step, 0.1 * box width

    The mutation step grows by ``sigma_grow`` (capped at its initial value)
    after a generation that improves the best individual and shrinks by
    ``sigma_shrink`` otherwise, so the search refines as it converges.
    """

    population: int = None
    max_generations: int = 300
    stall_generations: int = 50
    tournament_size: int = 3
    crossover_rate: float = 0.9
    blend_alpha: float = 0.5
    mutation_rate: float = None
    mutation_sigma: float = None
    elite: int = 2
    init_perturbation: float = 0.01
    perturbed_fraction: float = 0.5
    sigma_grow: float = 1.5
    sigma_shrink: float = 0.7


def design_box(task):
    """Per-coefficient bounds of the free coefficients (``p_6..`` or ``p_8..``)."""
    return coefficient_bounds(task.degree)[task.n_constraints:]


def _tournament(rng, fitness, count, size):
    picks = rng.integers(0, fitness.size, size=(count, size))
    winners = np.argmin(fitness[picks], axis=1)
    return picks[np.arange(count), winners]


def solve_ga(ctx, seed=0, on_generation=None, **options):
    """Minimise the RMS torque with a bounded real-coded GA.

    The population starts with ``o = 0``, small perturbations of it and
    uniform samples of the box. Each generation keeps the ``elite`` best,
    then fills up with tournament-selected parents, blend (BLX-alpha)
    crossover and per-gene Gaussian mutation with an adaptive step, clipped
    to the box. Stops after
    ``max_generations`` or ``stall_generations`` without improvement.

    ``on_generation(gen, population, fitness)`` is called once per
    generation, if given. Results are identical for identical ``seed``.
    """
    opts = GAOptions(**options)
    started = time.perf_counter()
    n = ctx.dof
    if n == 0:
        return make_result(ctx, [], "ga", 0, 1, started, True, "no free coefficients")
    rng = np.random.default_rng(seed)
    upper = design_box(ctx.task)
    lower = -upper
    width = upper - lower
    pop_size = opts.population or max(60, 20 * n)
    mut_rate = opts.mutation_rate if opts.mutation_rate is not None else 1.0 / n
    sigma0 = (opts.mutation_sigma if opts.mutation_sigma is not None else 0.1) * width
    sigma = sigma0

    n_pert = int(round(opts.perturbed_fraction * (pop_size - 1)))
    pop = np.vstack([
        np.zeros((1, n)),
        rng.normal(0.0, opts.init_perturbation * width, size=(n_pert, n)),
        rng.uniform(lower, upper, size=(pop_size - 1 - n_pert, n)),
    ])
    pop = np.clip(pop, lower, upper)
    fitness = ctx.rms_batch(pop)
    evals = pop_size
    best_idx = int(np.argmin(fitness))
    best, best_val = pop[best_idx].copy(), float(fitness[best_idx])
    stall = 0
    gen = 0
    message = "maximum generations reached"
    if on_generation is not None:
        on_generation(0, pop, fitness)
    while gen < opts.max_generations:
        gen += 1
        order = np.argsort(fitness, kind="stable")
        elite = pop[order[:opts.elite]]
        n_children = pop_size - elite.shape[0]
        n_pairs = (n_children + 1) // 2
        parents = _tournament(rng, fitness, 2 * n_pairs, opts.tournament_size)
        pa, pb = pop[parents[:n_pairs]], pop[parents[n_pairs:]]
        lo, hi = np.minimum(pa, pb), np.maximum(pa, pb)
        span = hi - lo
        cross = rng.random(n_pairs) < opts.crossover_rate
        u1 = rng.uniform(lo - opts.blend_alpha * span, hi + opts.blend_alpha * span)
        u2 = rng.uniform(lo - opts.blend_alpha * span, hi + opts.blend_alpha * span)
        c1 = np.where(cross[:, None], u1, pa)
        c2 = np.where(cross[:, None], u2, pb)
        children = np.vstack([c1, c2])[:n_children]
        mutate = rng.random(children.shape) < mut_rate
        children = children + mutate * rng.normal(0.0, 1.0, size=children.shape) * sigma
        children = np.clip(children, lower, upper)
        child_fit = ctx.rms_batch(children)
        evals += children.shape[0]
        pop = np.vstack([elite, children])
        fitness = np.concatenate([fitness[order[:opts.elite]], child_fit])
        if on_generation is not None:
            on_generation(gen, pop, fitness)
        k = int(np.argmin(fitness))
        if fitness[k] < best_val:
            best, best_val = pop[k].copy(), float(fitness[k])
            stall = 0
            sigma = np.minimum(sigma * opts.sigma_grow, sigma0)
        else:
            sigma = sigma * opts.sigma_shrink
            stall += 1
            if stall >= opts.stall_generations:
                message = "stalled"
                break
    return make_result(ctx, best, "ga", gen, evals, started, True, message)
