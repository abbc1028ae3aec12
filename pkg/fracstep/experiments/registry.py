"""Name to experiment lookup and the synchronous entry point."""
import asyncio
from typing import Dict, List, Type

from fracstep.experiments.base import BaseExperiment, ExperimentConfig
from fracstep.experiments.benchmark import BenchmarkExperiment
from fracstep.experiments.convergence import ConvergenceExperiment, GapExperiment
from fracstep.experiments.graded import GradedExperiment
from fracstep.experiments.kernel_error import PRESETS as KERNEL_ERROR_PRESETS, KernelErrorExperiment
from fracstep.experiments.lorenz import LorenzExperiment
from fracstep.experiments.rule_dump import RuleDumpExperiment

EXPERIMENTS: Dict[str, Type[BaseExperiment]] = {
    cls.name: cls
    for cls in (
        KernelErrorExperiment,
        ConvergenceExperiment,
        GapExperiment,
        GradedExperiment,
        LorenzExperiment,
        BenchmarkExperiment,
        RuleDumpExperiment,
    )
}

# command -> preset name -> settings
PRESETS: Dict[str, Dict[str, Dict[str, str]]] = {KernelErrorExperiment.name: KERNEL_ERROR_PRESETS}


def run_experiment(config: ExperimentConfig, verbose: bool = False) -> List[str]:
    """Run the experiment named by the config and return the report files."""
    experiment = EXPERIMENTS[config.name](config, verbose=verbose)
    return asyncio.run(experiment.run())
