"""
Experiment - Configuration, grid cells, per-trial results and the seed scheme
Every trial is reproducible from (master_seed, task, psnr index, trial index)
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.channel import NoiseKnowledge, SigmaSource, parse_psnr
from core.denoiser.training import TrainingConfig
from core.sampler import LambdaMode, NoiseBudget


class Task(Enum):
    DENOISE = "denoise"
    INPAINT = "inpaint"
    JOINT = "joint"


TASK_CODES = {Task.DENOISE: 0, Task.INPAINT: 1, Task.JOINT: 2}


class Method(Enum):
    RESTORE = "restore"
    REPLACE_BASELINE = "replace_baseline"


class DataSource(Enum):
    MIXTURE = "mixture"
    TONE = "tone"


class DenoiserKind(Enum):
    ORACLE = "oracle"
    TINY = "tiny"


class TrialStatus(Enum):
    OK = "ok"
    FAILED = "failed"


class _Settings(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScheduleSettings(_Settings):
    family: str = "linear"
    steps: int = Field(1000, ge=2)
    beta_start: float = 1e-4
    beta_end: float = 2e-2


class PriorSettings(_Settings):
    components: int = Field(4, ge=1)
    dim: int = Field(64, ge=2)
    frame_dim: int = Field(4, ge=1)
    within_variance: float = Field(0.01, ge=0.0)
    embedding_dim: int = Field(64, ge=1)
    notes: int = Field(4, ge=1)

    @model_validator(mode="after")
    def _whole_frames(self):
        if self.dim % self.frame_dim:
            raise ValueError("prior dim must be a multiple of frame_dim")
        return self


class ToneDataSettings(_Settings):
    fundamentals_hz: List[float] = Field(default_factory=lambda: [250.0, 375.0, 500.0, 625.0],
                                         min_length=1)
    harmonic_amplitudes: List[float] = Field(default_factory=lambda: [1.0, 0.5, 0.25],
                                             min_length=1)
    clip_seconds: float = Field(0.256, gt=0)
    frame_length: int = Field(64, ge=1)
    retained: int = Field(16, ge=1)
    training_clips: int = Field(32, ge=2)
    embedding_dim: int = Field(32, ge=1)
    seed: int = Field(0, ge=0)


class RestorationSettings(_Settings):
    guidance_scale: float = Field(3.0, ge=0.0)
    lambda_mode: LambdaMode = LambdaMode.SIGMA_RATIO
    noise_budget: NoiseBudget = NoiseBudget.RANGE
    noise_knowledge: NoiseKnowledge = NoiseKnowledge.ADAPTIVE_RANGE
    manual_sigma: Optional[float] = Field(None, ge=0.0)
    sigma_source: Optional[SigmaSource] = None
    condition_temperature: float = Field(0.5, gt=0.0)
    hard_condition: bool = False


class ErasureSettings(_Settings):
    start_fraction: Optional[float] = Field(None, ge=0.0, le=1.0)  # None: random per trial
    length_fraction: float = Field(0.1, gt=0.0, le=1.0)


class ExperimentConfig(_Settings):
    task: Task = Task.DENOISE
    psnr_grid: List[float] = Field(default_factory=lambda: [15.0, 17.5, 20.0, 30.0], min_length=1)
    trials: int = Field(100, ge=1)
    methods: List[Method] = Field(default_factory=lambda: [Method.RESTORE], min_length=1)
    data_source: DataSource = DataSource.MIXTURE
    denoiser: DenoiserKind = DenoiserKind.ORACLE
    denoiser_path: Optional[str] = None

    schedule: ScheduleSettings = Field(default_factory=ScheduleSettings)
    prior: PriorSettings = Field(default_factory=PriorSettings)
    tone: ToneDataSettings = Field(default_factory=ToneDataSettings)
    restoration: RestorationSettings = Field(default_factory=RestorationSettings)
    erasure: ErasureSettings = Field(default_factory=ErasureSettings)
    training: TrainingConfig = Field(default_factory=TrainingConfig)

    reference_samples: int = Field(512, ge=2)
    output_dir: str = "results"
    master_seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    verbose: bool = False
    diagnostics_trials: int = Field(0, ge=0)
    audition_samples: int = Field(0, ge=0)

    @field_validator("psnr_grid", mode="before")
    @classmethod
    def _parse_grid(cls, values):
        return [parse_psnr(v) for v in values]

    @model_validator(mode="after")
    def _check_consistency(self):
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must not repeat")
        if self.denoiser is DenoiserKind.TINY and not self.denoiser_path:
            raise ValueError("the tiny denoiser needs denoiser_path")
        if self.restoration.noise_knowledge is NoiseKnowledge.MANUAL \
                and self.restoration.manual_sigma is None:
            raise ValueError("manual noise knowledge needs restoration.manual_sigma")
        start = self.erasure.start_fraction
        if start is not None and start + self.erasure.length_fraction > 1.0 + 1e-12:
            raise ValueError("erased window runs past the end of the clip")
        return self

    @property
    def sigma_source(self) -> SigmaSource:
        if self.restoration.sigma_source is not None:
            return self.restoration.sigma_source
        return SigmaSource.CONDITION if self.task is Task.INPAINT else SigmaSource.LATENT

    def cells(self) -> List["GridCell"]:
        return [GridCell(self.task, index, psnr, method)
                for index, psnr in enumerate(self.psnr_grid)
                for method in self.methods]


@dataclass(frozen=True)
class GridCell:
    task: Task
    psnr_index: int
    psnr_db: float
    method: Method


@dataclass(frozen=True)
class TrialJob:
    cell: GridCell
    trial: int


@dataclass(frozen=True)
class TrialSeeds:
    """
    Truth draws are shared by every cell and method of a trial index, so
    comparisons across the grid are paired; channel and sampler streams are
    cell-specific.
    """

    data: np.random.SeedSequence
    channel: np.random.SeedSequence
    sampler: np.random.SeedSequence

    def generators(self):
        return (np.random.default_rng(self.data), np.random.default_rng(self.channel),
                np.random.default_rng(self.sampler))


def derive_trial_seeds(master_seed: int, task: Task, psnr_index: int, trial: int) -> TrialSeeds:
    code = TASK_CODES[task]
    data = np.random.SeedSequence([master_seed, code, trial])
    channel, sampler = np.random.SeedSequence([master_seed, code, psnr_index, trial, 1]).spawn(2)
    return TrialSeeds(data=data, channel=channel, sampler=sampler)


class TrialResult(BaseModel):
    """One row of trials.csv"""

    model_config = ConfigDict(extra="forbid")

    task: Task
    method: Method
    psnr_index: int
    psnr_db: float
    trial: int
    status: TrialStatus = TrialStatus.OK
    snr_restored_db: Optional[float] = None
    snr_received_db: Optional[float] = None
    fd_all: Optional[float] = None
    fd_inp: Optional[float] = None
    consistency_residual: Optional[float] = None
    sigma_star: Optional[float] = None
    component: Optional[int] = None
    erased_start_frame: Optional[int] = None
    erased_frames: Optional[int] = None
    error: str = ""
    wall_time_s: float = Field(0.0, exclude=True)


TRIAL_COLUMNS = [name for name, info in TrialResult.model_fields.items() if not info.exclude]
METRIC_COLUMNS = ["snr_restored_db", "snr_received_db", "fd_all", "fd_inp",
                  "consistency_residual", "sigma_star"]
