"""Campaign statistics over many simulated rounds."""

from .campaign import CampaignReport, Summary, baseline_bytes, ecdf, expansion_factor, run_campaign
from .traffic import RoundTraffic, simulate_round

__all__ = [
    "CampaignReport",
    "RoundTraffic",
    "Summary",
    "baseline_bytes",
    "ecdf",
    "expansion_factor",
    "run_campaign",
    "simulate_round",
]
