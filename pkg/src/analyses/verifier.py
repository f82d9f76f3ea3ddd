"""
Agente de certificación de equilibrios: indiferencia analítica y oráculo Monte Carlo
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from numpy.random import SFC64, Generator, SeedSequence

from core.config import settings
from core.equilibrium import (
    Equilibrium,
    Regime,
    build_equilibrium,
    fixed_point_residual,
    posterior,
)
from core.exceptions import DomainError, RegimeError, VerificationError
from core.news import NEVER
from core.payoff_engine import ArrivalKernel, agent_payoff, principal_payoff
from core.quadrature import piecewise_quad
from core.strategies import MASS_TOL

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    check: str
    residual: float
    tolerance: float
    passed: bool


@dataclass
class VerificationReport:
    """Reporte de certificación: residuos analíticos y comparaciones Monte Carlo"""

    checks: List[CheckResult] = field(default_factory=list)
    max_indifference_residual_P: float = math.nan
    max_indifference_residual_A: float = math.nan
    max_deviation_gain_P: float = math.nan
    max_deviation_gain_A: float = math.nan
    mc_value_P: float = math.nan
    mc_se_P: float = math.nan
    mc_value_A: float = math.nan
    mc_se_A: float = math.nan
    mc_posterior_bins: List[Dict[str, float]] = field(default_factory=list)
    mc_martingale: List[Dict[str, float]] = field(default_factory=list)
    n_draws: int = 0
    seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.checks)

    @property
    def failures(self) -> List[str]:
        return [item.check for item in self.checks if not item.passed]

    def add(self, check: str, residual: float, tolerance: float, passed: Optional[bool] = None) -> None:
        ok = residual <= tolerance if passed is None else passed
        self.checks.append(CheckResult(check, float(residual), float(tolerance), bool(ok)))

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        """Combinar la parte analítica (self) con la de Monte Carlo (other)"""
        merged = VerificationReport(**{**asdict(self), "checks": list(self.checks)})
        merged.checks.extend(other.checks)
        for name in (
            "mc_value_P", "mc_se_P", "mc_value_A", "mc_se_A",
            "mc_posterior_bins", "mc_martingale", "n_draws", "seed",
        ):
            setattr(merged, name, getattr(other, name))
        return merged

    def table(self) -> List[Dict[str, Any]]:
        return [asdict(item) for item in self.checks]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        data["failures"] = self.failures
        return data


@dataclass
class _Tally:
    """Sumas de un bloque de simulación; la fusión es una suma en orden fijo"""

    n: int = 0
    sum_P: float = 0.0
    sumsq_P: float = 0.0
    n_A: int = 0
    sum_A: float = 0.0
    sumsq_A: float = 0.0
    bin_count: Optional[np.ndarray] = None
    bin_omega: Optional[np.ndarray] = None
    alive_count: Optional[np.ndarray] = None
    alive_omega: Optional[np.ndarray] = None

    def __add__(self, other: "_Tally") -> "_Tally":
        return _Tally(
            n=self.n + other.n,
            sum_P=self.sum_P + other.sum_P,
            sumsq_P=self.sumsq_P + other.sumsq_P,
            n_A=self.n_A + other.n_A,
            sum_A=self.sum_A + other.sum_A,
            sumsq_A=self.sumsq_A + other.sumsq_A,
            bin_count=self.bin_count + other.bin_count,
            bin_omega=self.bin_omega + other.bin_omega,
            alive_count=self.alive_count + other.alive_count,
            alive_omega=self.alive_omega + other.alive_omega,
        )


def _mean_se(total: float, total_sq: float, n: int) -> Tuple[float, float]:
    if n == 0:
        return math.nan, math.nan
    mean = total / n
    if n == 1:
        return mean, 0.0
    variance = max(0.0, (total_sq - n * mean * mean) / (n - 1))
    return mean, math.sqrt(variance / n)


def bin_posterior(equilibrium: Equilibrium, lo: float, hi: float) -> float:
    """Pr(omega = 1 | noticia tipo 1 observada en [lo, hi]) exacta, antes de cualquier detención"""
    eq = equilibrium
    kernel = ArrivalKernel(eq.params, eq.news, faking=eq.faking, stopping=eq.stopping)
    cuts = eq.faking.breakpoints() + eq.stopping.breakpoints()

    def numerator(s: float) -> float:
        return kernel.w1_mu1_P(s) * (1.0 - eq.stopping.cdf(s))

    def denominator(s: float) -> float:
        return kernel.w1_P(s) * (1.0 - eq.stopping.cdf(s))

    den = piecewise_quad(denominator, lo, hi, cuts)
    if den <= 0:
        return math.nan
    return piecewise_quad(numerator, lo, hi, cuts) / den


def corrupt_soft_deadline(equilibrium: Equilibrium, factor: float = 1.05) -> Equilibrium:
    """Control negativo: reconstruir el equilibrio con tau_M desplazado por ``factor``

    Solo se admite factor > 1: adelantar tau_M deja F_A(tau_P) > 1 y la
    construcción falla con InconsistencyError en lugar de producir un candidato.
    El desplazamiento se acota al punto medio de [tau_M, tau_P].
    """
    if not factor > 1.0:
        raise DomainError(f"El control negativo requiere factor > 1, recibido {factor:.6g}")
    if equilibrium.regime is not Regime.BENEFICIAL or equilibrium.tau_M >= equilibrium.tau_P:
        raise RegimeError("El control negativo requiere un equilibrio beneficioso con soporte no vacío")
    tau_M = min(equilibrium.tau_M * factor, 0.5 * (equilibrium.tau_M + equilibrium.tau_P))
    logger.info(f"Control negativo: tau_M {equilibrium.tau_M:.6g} -> {tau_M:.6g}")
    return build_equilibrium(equilibrium.params, equilibrium.news, tau_M=tau_M, first_best=equilibrium.first_best)


class EquilibriumVerifier:
    """Agente que certifica un equilibrio candidato"""

    def __init__(
        self,
        tolerance: Optional[float] = None,
        grid_points: int = 200,
        horizon_factor: float = 3.0,
        chunk_size: Optional[int] = None,
        threads: int = 1,
        bins: int = 10,
    ):
        self.tolerance = settings.ANALYTIC_TOL if tolerance is None else tolerance
        self.grid_points = grid_points
        self.horizon_factor = horizon_factor
        self.chunk_size = chunk_size or settings.MC_CHUNK_SIZE
        self.threads = max(1, threads)
        self.bins = bins

    # ------------------------------------------------------------------
    # Parte analítica
    # ------------------------------------------------------------------

    def check_indifference(self, equilibrium: Equilibrium) -> VerificationReport:
        """Indiferencia en el soporte y ausencia de desvíos rentables fuera de él"""
        if equilibrium.regime is Regime.BENEFICIAL:
            report = self._check_beneficial(equilibrium)
        else:
            report = self._check_non_beneficial(equilibrium)

        if report.passed:
            logger.info(f"Certificación analítica exitosa ({equilibrium.regime.value})")
        else:
            logger.warning(f"Certificación analítica fallida: {report.failures}")
        return report

    def _u_P(self, eq: Equilibrium, t: float) -> float:
        return principal_payoff(t, eq.faking, eq.action, eq.params, eq.news)

    def _u_A(self, eq: Equilibrium, t: float) -> float:
        return agent_payoff(t, eq.stopping, eq.action, eq.params, eq.news)

    def _off_support(self, eq: Equilibrium) -> List[float]:
        n = self.grid_points
        before = np.linspace(0.0, eq.tau_M, n, endpoint=False).tolist() if eq.tau_M > 0 else []
        after = np.linspace(eq.tau_P, self.horizon_factor * eq.tau_P, n + 1)[1:].tolist()
        return before + after

    def _check_beneficial(self, eq: Equilibrium) -> VerificationReport:
        report = VerificationReport()
        tol = self.tolerance
        p = eq.params
        n = self.grid_points

        support = np.linspace(eq.tau_M, eq.tau_P, n).tolist()
        residual_P = max(abs(self._u_P(eq, t) - eq.value_P) for t in support)

        residual_A, gain_A = 0.0, 0.0
        if p.sigma > 0:
            delta = 1e-4 * eq.tau_P
            agent_top = max(eq.tau_M, eq.tau_P - delta)
            agent_support = np.linspace(eq.tau_M, agent_top, n).tolist()
            residual_A = max(abs(self._u_A(eq, t) - eq.value_A) for t in agent_support)

            # Con masa en "nunca", no falsificar también debe dar value_A
            u_A_never = self._u_A(eq, NEVER)
            never_on_support = eq.faking.never_mass > MASS_TOL
            if never_on_support:
                residual_A = max(residual_A, abs(u_A_never - eq.value_A))

            agent_off = [t for t in self._off_support(eq) if t < eq.tau_M or t > eq.tau_P]
            gains_A = [self._u_A(eq, t) - eq.value_A for t in agent_off]
            if not never_on_support:
                gains_A.append(u_A_never - eq.value_A)
            gain_A = max(gains_A)

        gain_P = max(self._u_P(eq, t) - eq.value_P for t in self._off_support(eq) + [NEVER])

        report.max_indifference_residual_P = residual_P
        report.max_indifference_residual_A = residual_A
        report.max_deviation_gain_P = gain_P
        report.max_deviation_gain_A = gain_A
        report.add("indifference_P", residual_P, tol)
        report.add("indifference_A", residual_A, tol)
        report.add("deviation_gain_P", max(0.0, gain_P), tol)
        report.add("deviation_gain_A", max(0.0, gain_A), tol)

        if p.sigma > 0:
            jump = self._u_A(eq, eq.tau_P) - eq.value_A
            expected = -math.exp(-p.rho * eq.tau_P) * eq.news.survival(eq.tau_P) * eq.stopping_atom * (
                p.mu - p.beta
            )
            report.add(
                "agent_jump_at_tau_P",
                abs(jump - expected),
                tol,
                passed=jump < 0 and abs(jump - expected) <= tol,
            )

        report.add("fixed_point", fixed_point_residual(eq), 1e-8)

        if eq.tau_M < eq.tau_P:
            beliefs = np.array([posterior(t, eq) for t in support])
            report.add("belief_at_tau_P", abs(posterior(eq.tau_P, eq) - 1.0), 1e-6)
            steps = np.diff(beliefs[:-1])
            report.add("belief_increasing", max(0.0, -float(steps.min())) if steps.size else 0.0, 0.0,
                       passed=bool(np.all(steps > 0)))
            floor_gap = float(beliefs.min() - p.theta - eq.belief_floor)
            report.add("belief_floor", max(0.0, -floor_gap), 1e-9)
        return report

    def _check_non_beneficial(self, eq: Equilibrium) -> VerificationReport:
        report = VerificationReport()
        tol = self.tolerance
        p = eq.params
        n = self.grid_points

        grid = np.linspace(0.0, self.horizon_factor * eq.tau_P, n).tolist()
        payoffs_P = [self._u_P(eq, t) for t in grid]
        support = [u for t, u in zip(grid, payoffs_P) if t <= eq.tau_P]
        residual_P = max(abs(u - p.theta) for u in support)
        gain_P = max(max(payoffs_P), self._u_P(eq, NEVER)) - p.theta

        residual_A = max(abs(self._u_A(eq, t) - p.beta) for t in grid + [NEVER])

        report.max_indifference_residual_P = residual_P
        report.max_indifference_residual_A = residual_A
        report.max_deviation_gain_P = gain_P
        report.max_deviation_gain_A = 0.0
        report.add("indifference_P", residual_P, tol)
        report.add("principal_cap", max(0.0, gain_P), settings.NONBENEFICIAL_TOL)
        report.add("agent_flat", residual_A, tol)
        report.add("faking_mass_at_tau_P", abs(eq.faking.cdf(eq.tau_P) - eq.sigma_bar / p.sigma), 1e-9)
        return report

    # ------------------------------------------------------------------
    # Oráculo Monte Carlo
    # ------------------------------------------------------------------

    def _bin_edges(self, eq: Equilibrium) -> np.ndarray:
        return np.linspace(eq.tau_M, eq.tau_P, self.bins + 1)

    def _cdf_times(self, eq: Equilibrium) -> np.ndarray:
        return np.linspace(0.0, eq.tau_P, self.bins + 2)[1:-1]

    def _simulate_chunk(self, eq: Equilibrium, size: int, stream: SeedSequence) -> _Tally:
        rng = Generator(SFC64(stream))
        p = eq.params

        omega = rng.random(size) < p.mu
        faker = rng.random(size) < p.sigma
        t_real = eq.news.sample_arrivals(rng, size)
        t_fake = np.where(faker, eq.faking.sample(rng, size), NEVER)
        t_stop = eq.stopping.sample(rng, size)
        u_action = rng.random(size)

        t_news = np.minimum(t_real, t_fake)
        is_fake = t_fake < t_real
        # La detención gana ante una noticia simultánea
        stopped = t_stop <= t_news
        event_time = np.where(stopped, t_stop, t_news)
        type1 = ~stopped & (is_fake | omega)

        action = np.zeros(size)
        idx = np.flatnonzero(type1)
        action[idx] = np.fromiter((eq.action(t) for t in event_time[idx]), dtype=float, count=idx.size)
        risky = type1 & (u_action < action)

        finite = np.isfinite(event_time)
        discount = np.exp(-p.rho * np.where(finite, event_time, 0.0))
        discount[~finite] = 0.0
        omega_f = omega.astype(float)
        pay_P = discount * np.where(risky, omega_f, p.theta)
        pay_A = discount * np.where(risky, omega_f, p.beta)
        pay_A_faker = pay_A[faker]

        edges = self._bin_edges(eq)
        bins = self.bins
        if edges[-1] > edges[0]:
            in_window = type1 & (event_time >= edges[0]) & (event_time <= edges[-1])
            which = np.clip(np.searchsorted(edges, event_time[in_window], side="right") - 1, 0, bins - 1)
            bin_count = np.bincount(which, minlength=bins).astype(float)
            bin_omega = np.bincount(which, weights=omega_f[in_window], minlength=bins)
        else:
            bin_count = np.zeros(bins)
            bin_omega = np.zeros(bins)

        marks = self._cdf_times(eq)
        alive = event_time[None, :] > marks[:, None]
        alive_count = alive.sum(axis=1).astype(float)
        alive_omega = (alive * omega_f[None, :]).sum(axis=1)

        return _Tally(
            n=size,
            sum_P=float(pay_P.sum()),
            sumsq_P=float(np.square(pay_P).sum()),
            n_A=int(pay_A_faker.size),
            sum_A=float(pay_A_faker.sum()),
            sumsq_A=float(np.square(pay_A_faker).sum()),
            bin_count=bin_count,
            bin_omega=bin_omega,
            alive_count=alive_count,
            alive_omega=alive_omega,
        )

    def simulate(self, equilibrium: Equilibrium, n: int, seed: int) -> VerificationReport:
        """Simular el juego con flujos derivados por bloque y fusión determinística"""
        if n < 1:
            raise ValueError("n debe ser >= 1")
        eq = equilibrium
        sizes = [self.chunk_size] * (n // self.chunk_size)
        if n % self.chunk_size:
            sizes.append(n % self.chunk_size)
        streams = SeedSequence(seed).spawn(len(sizes))

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            tallies = list(pool.map(lambda job: self._simulate_chunk(eq, *job), zip(sizes, streams)))
        total = tallies[0]
        for tally in tallies[1:]:
            total = total + tally

        report = VerificationReport(n_draws=n, seed=seed)
        band = settings.MC_SIGMA_BAND
        report.mc_value_P, report.mc_se_P = _mean_se(total.sum_P, total.sumsq_P, total.n)
        report.mc_value_A, report.mc_se_A = _mean_se(total.sum_A, total.sumsq_A, total.n_A)

        gap_P = abs(report.mc_value_P - eq.value_P)
        report.add("mc_value_P", gap_P, band * report.mc_se_P + 1e-12)
        if total.n_A > 0:
            gap_A = abs(report.mc_value_A - eq.value_A)
            report.add("mc_value_A", gap_A, band * report.mc_se_A + 1e-12)

        edges = self._bin_edges(eq)
        for k in range(self.bins):
            count = total.bin_count[k]
            if count == 0:
                continue
            target = bin_posterior(eq, edges[k], edges[k + 1])
            empirical = total.bin_omega[k] / count
            se = math.sqrt(target * (1.0 - target) / count) if 0 < target < 1 else 0.0
            ok = bool(abs(empirical - target) <= band * se + 1e-12)
            report.mc_posterior_bins.append(
                {
                    "lo": float(edges[k]),
                    "hi": float(edges[k + 1]),
                    "count": float(count),
                    "empirical": float(empirical),
                    "target": float(target),
                    "mu1_center": posterior(0.5 * (edges[k] + edges[k + 1]), eq),
                    "se": se,
                    "pass": ok,
                }
            )
            report.add(f"mc_posterior_bin_{k}", abs(empirical - target), band * se + 1e-12, passed=ok)

        mu = eq.params.mu
        for t, count, omega_sum in zip(self._cdf_times(eq), total.alive_count, total.alive_omega):
            if count == 0:
                continue
            freq = omega_sum / count
            se = math.sqrt(mu * (1.0 - mu) / count)
            ok = bool(abs(freq - mu) <= band * se)
            report.mc_martingale.append(
                {"t": float(t), "count": float(count), "frequency": float(freq), "se": se, "pass": ok}
            )
            report.add(f"mc_martingale_t{t:.4g}", abs(freq - mu), band * se, passed=ok)

        logger.info(
            f"Simulación completada: n={n}, seed={seed}, value_P={report.mc_value_P:.6g}±{report.mc_se_P:.2e}"
        )
        return report

    def certify(
        self,
        equilibrium: Equilibrium,
        n: int = 0,
        seed: Optional[int] = None,
        raise_on_failure: bool = False,
    ) -> VerificationReport:
        """Certificación completa: analítica y, si n > 0, Monte Carlo"""
        report = self.check_indifference(equilibrium)
        if n > 0:
            report = report.merge(self.simulate(equilibrium, n, seed if seed is not None else 0))
        if raise_on_failure and not report.passed:
            raise VerificationError(f"Certificación fallida: {report.failures}")
        return report


def check_indifference(equilibrium: Equilibrium, **options: Any) -> VerificationReport:
    return EquilibriumVerifier(**options).check_indifference(equilibrium)


def simulate(equilibrium: Equilibrium, n: int, seed: int, **options: Any) -> VerificationReport:
    return EquilibriumVerifier(**options).simulate(equilibrium, n, seed)
