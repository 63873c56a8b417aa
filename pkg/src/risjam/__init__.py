"""Secrecy-rate optimization for RIS-assisted cooperative jamming systems,
with a secrecy/sensing trade-off extension for dual-functional transmitters."""

from .channel import (ChannelSet, Dims, RawChannels, Topology, build_scenario,
                      compose_effective, iid_channels, path_loss, sample_rician,
                      steering_vector)
from .rates import PrecoderPair, RateBundle, lemma1_gap, rate_ej, rate_gn, sensing_mi
from .wmmse import SolutionRecord, StopRule, optimize_ej, optimize_subproblem
from .miso_sdr import CvxpySolver, ProjectedGradientSolver, SdpProblem, alternating_miso
from .isac import IsacProblem, optimize_isac, optimize_isac_ej, pareto_sweep
from .asymptotics import AsymptoticScenario, estimate_dominance
from .harness import ScenarioConfig, run_scenario, summarize

__all__ = [
    "AsymptoticScenario", "ChannelSet", "CvxpySolver", "Dims", "IsacProblem",
    "PrecoderPair", "ProjectedGradientSolver", "RateBundle", "RawChannels",
    "ScenarioConfig", "SdpProblem", "SolutionRecord", "StopRule", "Topology",
    "alternating_miso", "build_scenario", "compose_effective", "estimate_dominance",
    "iid_channels", "lemma1_gap", "optimize_ej", "optimize_isac", "optimize_isac_ej",
    "optimize_subproblem", "pareto_sweep", "path_loss", "rate_ej", "rate_gn",
    "run_scenario", "sample_rician", "sensing_mi", "steering_vector", "summarize",
]
