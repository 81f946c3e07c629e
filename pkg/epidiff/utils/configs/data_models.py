"""Data Models.

All data models for run configs

"""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel
from pydantic import validator

from epidiff.dynamics.grid import TimeGrid
from epidiff.model.params import ParamSet
from epidiff.model.priors import PriorDescriptor
from epidiff.model.priors import build_prior_spec
from epidiff.model.structure import ModelSpec
from epidiff.model.structure import SigmoidSpec


class GridConfig(BaseModel):
    """Observation schedule and Euler step."""

    # start of the epidemic, days
    t0: float = 0.0
    # number of observations when simulating
    n_obs: int = 50
    # days between observations
    interval: float = 7.0
    # Euler step in days; ignored when substeps is given
    delta: float = 0.1
    # points inserted between observations (m)
    substeps: int | None = None

    def build(self, obs_times=None):
        """Grid through ``obs_times`` (default: the simulated schedule)."""
        if obs_times is None:
            obs_times = [self.t0 + self.interval * (i + 1) for i in range(self.n_obs)]
        if self.substeps is not None:
            return TimeGrid(t0=self.t0, obs_times=obs_times, substeps=self.substeps)
        return TimeGrid.from_delta(self.t0, obs_times, self.delta)


class FilterConfig(BaseModel):
    """Particle filter settings."""

    n_particles: int = 500
    resampling: Literal["systematic", "multinomial"] = "systematic"
    # resample only when the ESS falls below ess_threshold * n_particles
    adaptive_resampling: bool = False
    ess_threshold: float = 0.5

    @validator("n_particles")
    def _positive(cls, value):
        if value < 1:
            raise ValueError("need at least one particle")
        return value


class MCMCConfig(BaseModel):
    """PMMH settings."""

    n_iters: int = 20_000
    burn_in: int = 5_000
    # keep every thin-th smoothing path
    thin: int = 10
    # none: fixed proposal; scale: adapt eps; scale+cov: adapt eps and Sigma_i
    adapt: Literal["none", "scale", "scale+cov"] = "scale+cov"
    # how Sigma0 is obtained
    seed_cov: Literal["identity", "ek-mode", "ek-mcmc"] = "ek-mcmc"
    eps0: float = 1.0
    alpha1: float = 0.999
    alpha2: float = 0.05
    # iteration after which Sigma_i is used; None means 10 * d
    cov_adapt_start: int | None = None
    # EK-MCMC chain length and EK-Mode optimiser budget
    ek_mcmc_iters: int = 5_000
    ek_mode_max_iter: int = 5_000


class MIFConfig(BaseModel):
    """Iterated filtering settings."""

    n_passes: int = 50
    cooling: float = 0.95
    # random-walk sd on the unconstrained scale at the first pass
    perturb_sd: float = 0.02
    n_particles: int = 500


class SimulationConfig(BaseModel):
    """Data generation; unset values fall back to the model and parameters."""

    driver: Literal["bm", "ibm", "ou", "sigmoid"] | None = None
    sigmoid: SigmoidSpec | None = None
    tau: float | None = None
    reporting_factor: float | None = None


class BenchmarkConfig(BaseModel):
    """Tuning and comparison studies."""

    # euler study
    deltas: list[float] = [7.0, 3.5, 1.75, 0.875, 0.4, 0.2, 0.1, 0.05]
    euler_reps: int = 5
    # nparts study
    particle_counts: list[int] = [25, 50, 100, 200, 400, 800]
    nparts_iters: int = 1_000
    nparts_taus: list[float] = [0.1, 0.05]
    # ekf-vs-pf study
    n_datasets: int = 20
    # adapt-ess study
    ess_iters: int = 5_000


class SensitivityConfig(BaseModel):
    """Prior tilting study."""

    tilt_pcts: list[float] = [-20.0, -10.0, 10.0, 20.0]
    # slots whose prior mean is tilted
    tilted: list[str] = ["init_fractions", "k", "gamma"]


class RealtimeConfig(BaseModel):
    """Real-time analysis on truncated data."""

    # last day of data used by each analysis; empty means the full series
    cutoffs: list[float] = []
    # factors multiplying the counts before fitting, the inverse of the reporting rate c
    correction_factors: list[float] = [1.0]
    # beta(t_b) - beta(t_a) is summarised
    t_a: float = 0.0
    t_b: float = 0.0


class GibbsConfig(BaseModel):
    """Data-augmentation Gibbs baseline."""

    n_iters: int = 5_000
    n_particles: int = 500
    parametrisation: Literal["lamperti", "chib", "centred"] = "lamperti"
    # initial random-walk sd of log sigma
    step0: float = 0.1
    # adapt the step toward 0.234 acceptance; off keeps step0 fixed
    adapt: bool = True
    burn_in: int = 1_000
    thin: int = 10


class RunConfig(BaseModel):
    """Everything a run needs."""

    experiment_id: str = "run"
    model: ModelSpec = ModelSpec()
    # true values when simulating, initial values when fitting
    params: ParamSet
    # explicit priors by slot name, all other slots are fixed at params
    priors: dict[str, PriorDescriptor] = {}
    grid: GridConfig = GridConfig()
    filter: FilterConfig = FilterConfig()
    mcmc: MCMCConfig = MCMCConfig()
    mif: MIFConfig = MIFConfig()
    simulation: SimulationConfig = SimulationConfig()
    benchmark: BenchmarkConfig = BenchmarkConfig()
    sensitivity: SensitivityConfig = SensitivityConfig()
    realtime: RealtimeConfig = RealtimeConfig()
    gibbs: GibbsConfig = GibbsConfig()
    seed: int = 0
    out_dir: str | None = None
    threads: int = 1

    def prior_spec(self):
        return build_prior_spec(self.params, self.model.driver, self.priors)
