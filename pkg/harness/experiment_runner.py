"""
ExperimentRunner - Runs a PSNR x trial grid and persists the results
Trials fan out to a process pool under asyncio; results are collected back
in (cell, trial) order so the output never depends on scheduling.
"""

import asyncio
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List

from tqdm import tqdm

from .dispatcher import execute_job
from .experiment import ExperimentConfig, TrialJob, TrialStatus
from .results_store import ResultsStore
from .shared_models import get_experiment_context
from .trials import TrialOutcome


@dataclass
class GridRun:
    outcomes: List[TrialOutcome]
    summary: List[Dict[str, object]]
    output_dir: str
    elapsed_s: float

    @property
    def failed(self) -> int:
        return sum(o.result.status is TrialStatus.FAILED for o in self.outcomes)


class ExperimentRunner:
    """Builds the job list, executes it and hands rows to the results store"""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.store = ResultsStore(cfg.output_dir)

    def build_jobs(self) -> List[TrialJob]:
        return [TrialJob(cell, trial) for cell in self.cfg.cells()
                for trial in range(self.cfg.trials)]

    async def _execute(self, jobs: List[TrialJob]) -> List[TrialOutcome]:
        progress = tqdm(total=len(jobs), desc=f"grid[{self.cfg.task.value}]",
                        disable=not self.cfg.verbose)
        try:
            if self.cfg.workers == 1:
                outcomes = []
                for job in jobs:
                    outcomes.append(execute_job(self.cfg, job))
                    progress.update(1)
                    await asyncio.sleep(0)
                return outcomes

            loop = asyncio.get_running_loop()
            limit = asyncio.Semaphore(self.cfg.workers * 2)
            with ProcessPoolExecutor(max_workers=self.cfg.workers) as pool:

                async def submit(job: TrialJob) -> TrialOutcome:
                    async with limit:
                        outcome = await loop.run_in_executor(pool, execute_job, self.cfg, job)
                    progress.update(1)
                    return outcome

                # gather keeps submission order
                return list(await asyncio.gather(*(submit(job) for job in jobs)))
        finally:
            progress.close()

    async def run(self) -> GridRun:
        started = time.perf_counter()
        jobs = self.build_jobs()
        print(f"[GRID] {self.cfg.task.value}: {len(self.cfg.psnr_grid)} PSNR points x "
              f"{len(self.cfg.methods)} method(s) x {self.cfg.trials} trials "
              f"= {len(jobs)} jobs on {self.cfg.workers} worker(s)")

        outcomes = await self._execute(jobs)

        self.store.write_manifest(self.cfg)
        self.store.write_trials(outcomes)
        summary = self.store.summarize()
        if self.cfg.diagnostics_trials:
            count = self.store.write_diagnostics(outcomes)
            print(f"[STORE] {count} diagnostics traces")
        if self.cfg.audition_samples:
            codec = get_experiment_context(self.cfg).codec
            count = self.store.write_audition(outcomes, codec)
            print(f"[STORE] {count} audition samples")

        run = GridRun(outcomes=outcomes, summary=summary, output_dir=self.cfg.output_dir,
                      elapsed_s=time.perf_counter() - started)
        if run.failed:
            print(f"⚠️ [GRID] {run.failed} of {len(outcomes)} trials failed")
        print(f"[DONE] Grid finished in {run.elapsed_s:.1f}s")
        return run


async def run_grid_async(cfg: ExperimentConfig) -> GridRun:
    return await ExperimentRunner(cfg).run()


def run_grid(cfg: ExperimentConfig) -> GridRun:
    """Run the whole grid synchronously"""
    return asyncio.run(run_grid_async(cfg))
