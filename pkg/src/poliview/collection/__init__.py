"""Harvesting under SLA quotas: pulls, crawls, stream subscriptions, costs."""

from .clock import RealClock, VirtualClock
from .costs import CostLedger, CostRecord, EnergyModel, NetworkProfile, cost_of_request
from .polling import PollSchedule, adapt_poll_interval, novelty_ratio
from .providers import ProviderDescriptor, ProviderKind, Response
from .runner import CollectionPlan, PlanError, RunResult, run_collection
from .session import Frontier, ProviderSession, PullResult
from .simulator import SimulatedProvider
from .sla import RateDecision, RateLimiter, SlaContract, rate_limit_check
from .streams import (
    Flush,
    FlushPolicy,
    Hold,
    ProductionRate,
    Subscription,
    SubscriptionError,
    SubscriptionRegistry,
    flush_decision,
    unsubscribe,
)

__all__ = [
    "CollectionPlan", "CostLedger", "CostRecord", "EnergyModel", "Flush", "FlushPolicy",
    "Frontier", "Hold", "NetworkProfile", "PlanError", "PollSchedule", "ProductionRate",
    "ProviderDescriptor", "ProviderKind", "ProviderSession", "PullResult", "RateDecision",
    "RateLimiter", "RealClock", "Response", "RunResult", "SimulatedProvider", "SlaContract",
    "Subscription", "SubscriptionError", "SubscriptionRegistry", "VirtualClock",
    "adapt_poll_interval", "cost_of_request", "flush_decision", "novelty_ratio",
    "rate_limit_check", "run_collection", "unsubscribe",
]
