"""Monte Carlo DoF upper bound, gap ratio against the closed-form 2M, and sweeps.

Each run draws a random configuration from its own RNG stream keyed by
``(seed, run index)``, so results do not depend on scheduling and a longer
run extends a shorter one with the same seed.
"""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from ._seeding import derive_seed
from .exceptions import ConfigError, EmptyResultError, UnseparableTailError
from .feasibility import check_theorem3, screen_infeasible, upsilon
from .model import compute_k_iac, sample_dof_tuple, total_dof

__all__ = [
    "MonteCarloResult",
    "GapPoint",
    "SweepCell",
    "run_upper_bound_mc",
    "gap_ratio",
    "sweep",
    "write_cdf_csv",
    "write_gap_csv",
    "gnuplot_script",
]

AUDIT_EVERY = 100


@dataclass(frozen=True)
class MonteCarloResult:
    """Accepted DoF totals of one ``(K, M)`` cell.

    ``values`` is sorted; ``cdf`` holds ``(dof, F(dof))`` at each distinct
    value.  ``upper_star`` is ``None`` when no run was accepted.
    """

    K: int
    M: int
    runs: int
    accepted: int
    values: tuple
    cdf: tuple
    upper_star: object
    seed: int

    @property
    def empty(self):
        return self.accepted == 0


@dataclass(frozen=True)
class GapPoint:
    K: int
    M: int
    dof_cs: int
    upper_star: int
    gap: Fraction

    @property
    def attainment(self):
        """Closed-form DoF as a fraction of the bound."""
        return 1 - self.gap


@dataclass(frozen=True)
class SweepCell:
    mc: MonteCarloResult
    gap: object  # GapPoint, or None for an empty cell


def _empirical_cdf(values):
    n = len(values)
    points = []
    for i, v in enumerate(values):
        if i + 1 == n or values[i + 1] != v:
            points.append((v, (i + 1) / n))
    return tuple(points)


def _audit(config):
    # the full-set subset check must reject exactly what the screen rejects
    t = compute_k_iac(config).value
    if t == 0:
        return
    if not check_theorem3(config, [upsilon(config, t)]).thm3_eq21[0].holds:
        raise AssertionError(f"accepted {config} violates the full-set subset condition")


def run_upper_bound_mc(K, M, runs, seed):
    """Sample ``runs`` random configurations and keep the ones the screen accepts.

    A run is rejected when its tail of MACs cannot be separated by antennas
    alone or the full-set screen flags it as infeasible; otherwise its total
    DoF is recorded.
    """
    if K < 3:
        raise ConfigError(f"K must be at least 3, got {K}")
    if M < 1:
        raise ConfigError(f"M must be at least 1, got {M}")
    if runs < 0:
        raise ConfigError(f"runs must be nonnegative, got {runs}")
    values = []
    for r in range(runs):
        config = sample_dof_tuple(K, M, derive_seed(seed, "mc-run", r))
        try:
            compute_k_iac(config)
        except UnseparableTailError:
            continue
        if screen_infeasible(config):
            continue
        if r % AUDIT_EVERY == 0:
            _audit(config)
        values.append(total_dof(config))
    values.sort()
    return MonteCarloResult(
        K=K,
        M=M,
        runs=runs,
        accepted=len(values),
        values=tuple(values),
        cdf=_empirical_cdf(values),
        upper_star=values[-1] if values else None,
        seed=seed,
    )


def gap_ratio(K, M, mc):
    """Relative shortfall ``(upper_star - 2M) / upper_star`` of the closed form."""
    if mc.empty:
        raise EmptyResultError(f"no accepted runs for K={K}, M={M}")
    dof_cs = 2 * M
    return GapPoint(K, M, dof_cs, mc.upper_star, Fraction(mc.upper_star - dof_cs, mc.upper_star))


def _cell(args):
    K, M, runs, seed = args
    mc = run_upper_bound_mc(K, M, runs, derive_seed(seed, "cell", K, M))
    return SweepCell(mc, None if mc.empty else gap_ratio(K, M, mc))


def sweep(K_range, M_list, runs, seed, jobs=1):
    """Every ``(K, M)`` cell of the grid, in ``K``-major order.

    Cells with no accepted run carry ``gap=None``.  ``jobs > 1`` runs cells
    in worker processes; results are identical either way.
    """
    Ks, Ms = list(K_range), list(M_list)
    if not Ks or not Ms:
        raise ConfigError("sweep needs at least one K and one M")
    tasks = [(K, M, runs, seed) for K in Ks for M in Ms]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_cell, tasks))
    return [_cell(t) for t in tasks]


def write_cdf_csv(cells, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["K", "M", "dof", "cdf"])
    for cell in cells:
        mc = cell.mc if isinstance(cell, SweepCell) else cell
        if mc.empty:
            writer.writerow([mc.K, mc.M, "NA", "NA"])
        for dof, p in mc.cdf:
            writer.writerow([mc.K, mc.M, dof, repr(p)])


def write_gap_csv(cells, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["K", "M", "upper_star", "dof_cs", "gap", "accepted", "runs"])
    for cell in cells:
        mc, g = cell.mc, cell.gap
        if g is None:
            writer.writerow([mc.K, mc.M, "NA", 2 * mc.M, "NA", mc.accepted, mc.runs])
        else:
            writer.writerow([mc.K, mc.M, g.upper_star, g.dof_cs, repr(float(g.gap)),
                             mc.accepted, mc.runs])


def gnuplot_script(cdf_path="cdf.csv", gap_path="gap.csv"):
    """A gnuplot script drawing the CDF curves and the gap ratio from the CSV files."""
    return f"""set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 900,600
set output 'cdf.png'
set xlabel 'DoF upper bound'
set ylabel 'CDF'
plot for [k=3:7] '{cdf_path}' using (column(1)==k ? column(3) : NaN):4 with steps title sprintf('K=%d', k)
set output 'gap.png'
set xlabel 'K'
set ylabel 'gap ratio'
plot for [m in "2 4 6 8"] '{gap_path}' using (column(2)==m+0 ? column(1) : NaN):5 with linespoints title sprintf('M=%s', m)
"""
