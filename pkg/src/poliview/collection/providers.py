"""Provider descriptors and the transport interface shared by real and simulated sources."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol

from ..docmodel import DocValue
from ..policy import PrivacyLevel
from .costs import NetworkProfile
from .sla import SlaContract


class ProviderKind(str, Enum):
    ON_DEMAND = "ondemand"
    SITE = "site"
    STREAM = "stream"


@dataclass(frozen=True)
class ProviderDescriptor:
    id: str
    kind: ProviderKind
    endpoint: str = ""
    sla: SlaContract = field(default_factory=SlaContract)
    network: NetworkProfile = field(default_factory=NetworkProfile)
    invocation_price: float = 0.0
    method_throughput: float = 10.0
    jurisdiction: str = ""
    platform: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("provider id must be non-empty")
        if self.method_throughput <= 0:
            raise ValueError(f"{self.id}: method_throughput must be positive")
        object.__setattr__(self, "kind", ProviderKind(self.kind))
        if not self.platform:
            object.__setattr__(self, "platform", self.id)

    @classmethod
    def from_dict(cls, data: dict) -> "ProviderDescriptor":
        sla = dict(data.get("sla", {}))
        if "default_privacy" in sla:
            sla["default_privacy"] = PrivacyLevel(sla["default_privacy"])
        return cls(
            id=data["id"],
            kind=ProviderKind(data["kind"]),
            endpoint=data.get("endpoint", ""),
            sla=SlaContract(**sla),
            network=NetworkProfile(**data.get("network", {})),
            invocation_price=data.get("invocation_price", 0.0),
            method_throughput=data.get("method_throughput", 10.0),
            jurisdiction=data.get("jurisdiction", ""),
            platform=data.get("platform", ""),
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "endpoint": self.endpoint,
            "sla": {
                "max_requests": self.sla.max_requests,
                "window": self.sla.window,
                "auth_required": self.sla.auth_required,
                "default_privacy": self.sla.default_privacy.value,
                "default_license": self.sla.default_license,
            },
            "network": {
                "latency": self.network.latency,
                "throughput": self.network.throughput,
                "price_per_byte": self.network.price_per_byte,
            },
            "invocation_price": self.invocation_price,
            "method_throughput": self.method_throughput,
            "jurisdiction": self.jurisdiction,
            "platform": self.platform,
        }


@dataclass
class Response:
    """One provider answer.  ``status`` is ``ok`` or an unavailability reason."""

    status: str
    documents: list[DocValue] = field(default_factory=list)
    links: list[str] = field(default_factory=list)
    bytes_in: int = 0
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class Transport(Protocol):
    def fetch(self, request: str, credentials: str | None) -> Response: ...

    def stream_item(self, index: int) -> Any: ...
