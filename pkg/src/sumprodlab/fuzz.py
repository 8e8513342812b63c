"""Seeded randomised trials for the entropy inequalities.

Each check draws measures from a deliberately diverse generator (flat, iid
uniform, Dirichlet-spiky, atom-plus-flat, two-scale) so that concentration
contrasts actually occur; a harness that only ever produces near-uniform
weights would vacuously pass bounds that are false in general.  Two of the
checks below probe exactly such bounds:

* collision-entropy concavity fails already for a 0.9/0.1 mixture of a point
  mass with a flat measure (Renyi entropy of order 2 is not concave), and
* the proof-direction restriction bound col(X) >= (1 - eps) col(X | E) fails
  whenever an atom of mass eps coexists with a much flatter conditional part.

They are kept in the suite as specified checks; their violation counts are
reported, not hidden.  The remaining checks (submodular slack, monotonicity,
Shannon concavity, the Frostman entropy bound, and the always-true
restriction scaling col(X|E) >= col(X) + 2 log2 mu(E)) hold by theorem and
must come back clean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .gridmeasure import (CellSet1D, GridMeasure, collision_entropy, condition,
                          mix, shannon_entropy)
from .inequalities import JointTable, check_submodular, frostman_entropy_bound
from .regularity import _ball_masses

TOL = 1e-9


@dataclass(frozen=True)
class FuzzReport:
    check: str
    trials: int
    violations: int
    worst_slack: float
    first_counterexample: str = ""

    @property
    def ok(self) -> bool:
        return self.violations == 0


def random_grid_measure(rng: np.random.Generator, max_level: int = 10,
                        max_cells: int = 400, level: int | None = None) -> GridMeasure:
    """A random measure with a randomly chosen concentration profile."""
    if level is None:
        level = int(rng.integers(0, max_level + 1))
    n = int(rng.integers(1, max_cells + 1))
    offset = int(rng.integers(-64, 65))
    style = rng.choice(["flat", "iid", "spiky", "atomflat", "twoscale"])
    if style == "flat":
        w = np.ones(n)
    elif style == "iid":
        w = rng.random(n)
    elif style == "spiky":
        w = rng.dirichlet(np.full(n, 0.15)) if n > 1 else np.ones(1)
    elif style == "atomflat":
        w = np.full(n, rng.uniform(0.05, 1.0) / n)
        w[rng.integers(0, n)] += rng.uniform(0.2, 5.0)
    else:
        w = np.where(rng.random(n) < 0.3, rng.uniform(1.0, 2.0, n),
                     rng.uniform(1e-6, 1e-3, n))
    if w.sum() <= 0:
        w = np.ones(n)
    return GridMeasure.from_weights(level, offset, w)


def random_submodular_table(rng: np.random.Generator) -> JointTable:
    """Joint table whose support respects Z -> X, W -> X, (Z, W) -> Y.

    Draw (Z, W) labels on a random sample space, define X on the connected
    components of the Z/W co-occurrence graph (so both Z and W determine it)
    and Y as a random function of the (Z, W) pair.
    """
    n = int(rng.integers(2, 13))
    zs = rng.integers(0, rng.integers(1, 5) + 1, size=n)
    ws = rng.integers(0, rng.integers(1, 5) + 1, size=n)
    parent = {}

    def find(a):
        while parent.get(a, a) != a:
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for z, w in zip(zs.tolist(), ws.tolist()):
        union(("z", z), ("w", w))
    comp_label = {}
    y_of_pair = {}
    probs = rng.dirichlet(np.ones(n)) if n > 1 else np.ones(1)
    outcomes = []
    for z, w, p in zip(zs.tolist(), ws.tolist(), probs.tolist()):
        root = find(("z", z))
        x = comp_label.setdefault(root, len(comp_label))
        y = y_of_pair.setdefault((z, w), int(rng.integers(0, 6)))
        outcomes.append((x, y, z, w, p))
    return JointTable(tuple(outcomes))


def _report(check: str, trials: int, failures: list[tuple[float, str]]) -> FuzzReport:
    worst = min((s for s, _ in failures), default=math.inf)
    first = failures[0][1] if failures else ""
    return FuzzReport(check, trials, len(failures), worst, first)


def fuzz_submodularity(seed: int, trials: int) -> FuzzReport:
    rng = np.random.default_rng(seed)
    failures = []
    for t in range(trials):
        table = random_submodular_table(rng)
        slack = check_submodular(table)
        if slack < -TOL:
            failures.append((slack, f"trial {t}: slack {slack}"))
    return _report("submodularity", trials, failures)


def fuzz_monotonicity(seed: int, trials: int) -> FuzzReport:
    rng = np.random.default_rng(seed + 1)
    failures = []
    for t in range(trials):
        m = random_grid_measure(rng)
        j = int(rng.integers(0, m.level + 1))
        slack = shannon_entropy(m, j) - collision_entropy(m, j)
        if slack < -TOL:
            failures.append((slack, f"trial {t}: col exceeds H by {-slack}"))
    return _report("monotonicity_col_le_H", trials, failures)


def _concavity_trial(rng, entropy_fn):
    level = int(rng.integers(0, 9))
    m1 = random_grid_measure(rng, level=level)
    m2 = random_grid_measure(rng, level=level)
    lam = float(rng.random())
    j = int(rng.integers(0, level + 1))
    mixed = mix(m1, m2, lam)
    lhs = entropy_fn(mixed, j)
    rhs = lam * entropy_fn(m1, j) + (1 - lam) * entropy_fn(m2, j)
    return lhs - rhs, lam, m1, m2


def fuzz_concavity_shannon(seed: int, trials: int) -> FuzzReport:
    rng = np.random.default_rng(seed + 2)
    failures = []
    for t in range(trials):
        slack, lam, _, _ = _concavity_trial(rng, shannon_entropy)
        if slack < -TOL:
            failures.append((slack, f"trial {t}: lambda={lam:.3f} slack={slack}"))
    return _report("concavity_shannon", trials, failures)


def fuzz_concavity_collision(seed: int, trials: int) -> FuzzReport:
    rng = np.random.default_rng(seed + 3)
    failures = []
    for t in range(trials):
        slack, lam, m1, m2 = _concavity_trial(rng, collision_entropy)
        if slack < -TOL:
            failures.append((slack,
                             f"trial {t}: lambda={lam:.3f} slack={slack:.4f} "
                             f"(sizes {m1.n_cells}/{m2.n_cells})"))
    return _report("concavity_collision", trials, failures)


def fuzz_frostman_margin(seed: int, trials: int) -> FuzzReport:
    rng = np.random.default_rng(seed + 4)
    failures = []
    for t in range(trials):
        m = random_grid_measure(rng)
        s = float(rng.uniform(0.05, 1.0))
        j = int(rng.integers(1, m.level + 1)) if m.level else 0
        r = 2.0 ** -j
        # claim the measured ball constant; it dominates the cell constant
        measured = float((_ball_masses(m, m.cell_centers(), r) / r ** s).max())
        margin = frostman_entropy_bound(m, s, measured * (1 + 1e-12), j)
        if margin < -TOL:
            failures.append((margin, f"trial {t}: margin {margin}"))
    return _report("frostman_entropy_bound", trials, failures)


def _random_event(rng, m: GridMeasure) -> CellSet1D:
    g = m.occupied_indices()
    keep = rng.random(g.size) < rng.uniform(0.3, 0.95)
    if not keep.any():
        keep[rng.integers(0, g.size)] = True
    return CellSet1D(m.level, g[keep])


def fuzz_restriction_proof_direction(seed: int, trials: int) -> FuzzReport:
    """The claim col(X) >= mu(E) col(X conditioned on E); false in general."""
    rng = np.random.default_rng(seed + 5)
    failures = []
    for t in range(trials):
        m = random_grid_measure(rng)
        event = _random_event(rng, m)
        mass = m.mass_of(event.indices)
        if mass <= 0:
            continue
        restricted = condition(m, event)
        slack = collision_entropy(m, m.level) \
            - mass * collision_entropy(restricted, m.level)
        if slack < -TOL:
            failures.append((slack,
                             f"trial {t}: mu(E)={mass:.3f} slack={slack:.4f}"))
    return _report("restriction_proof_direction", trials, failures)


def fuzz_restriction_scaling(seed: int, trials: int) -> FuzzReport:
    """The always-true form col(X|E) >= col(X) + 2 log2 mu(E)."""
    rng = np.random.default_rng(seed + 6)
    failures = []
    for t in range(trials):
        m = random_grid_measure(rng)
        event = _random_event(rng, m)
        mass = m.mass_of(event.indices)
        if mass <= 0:
            continue
        restricted = condition(m, event)
        slack = collision_entropy(restricted, m.level) \
            - collision_entropy(m, m.level) - 2.0 * math.log2(mass)
        if slack < -TOL:
            failures.append((slack, f"trial {t}: mu(E)={mass:.3f} slack={slack}"))
    return _report("restriction_scaling", trials, failures)


ALL_CHECKS = (
    fuzz_submodularity,
    fuzz_monotonicity,
    fuzz_concavity_shannon,
    fuzz_concavity_collision,
    fuzz_frostman_margin,
    fuzz_restriction_proof_direction,
    fuzz_restriction_scaling,
)


def run_all_fuzz(seed: int, trials: int) -> list[FuzzReport]:
    if trials < 1:
        raise DomainError("trials must be >= 1")
    return [check(seed, trials) for check in ALL_CHECKS]
