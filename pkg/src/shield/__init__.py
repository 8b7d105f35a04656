"""Proximity-based emergency alerting: encounter trust, crime-risk scanning, distress dissemination."""

from .advisory import CautionPolicy, RiskProfile, build_risk_profile, is_cautionary, rank_locations, risk_score
from .analytics import correlation_report, hourly_histogram, pearson
from .dissemination import DistressMessage, MsgType, create_distress, decode, encode, on_receive, should_forward
from .encounter_core import build_matrices, pair_stats, rank_distribution
from .protocol import EnergyLedger, LinkParams, ScanPolicy, scan_interval, scan_latency, transfer_time
from .simulator import SimConfig, compute_metrics, run
from .trace_io import SyntheticWorldConfig, generate_synthetic_world
from .trust import ServiceTag, TrustClass, TrustMatrix, TrustParams, classify, trust_score

__version__ = "0.1.0"
