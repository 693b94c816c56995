"""Per-request cost accounting.

Linear model over the request's data size (bytes in + bytes out):

* transfer time  = latency + size / throughput
* execution time = 1 / method throughput
* monetary cost  = invocation price + price per byte * size
* energy cost    = alpha * (transfer + execution) + beta * size
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields


@dataclass(frozen=True)
class NetworkProfile:
    latency: float = 0.0
    throughput: float = 1e6
    price_per_byte: float = 0.0

    def __post_init__(self):
        if self.latency < 0 or self.throughput <= 0 or self.price_per_byte < 0:
            raise ValueError(f"invalid network profile {self}")


@dataclass(frozen=True)
class EnergyModel:
    alpha: float = 1.0   # units per second busy
    beta: float = 1e-6   # units per byte moved


@dataclass(frozen=True)
class CostRecord:
    request_id: str
    transfer_time: float
    execution_time: float
    monetary_cost: float
    energy_cost: float
    bytes_in: int
    bytes_out: int

    def to_dict(self) -> dict:
        return asdict(self)


COST_FIELDS = ("transfer_time", "execution_time", "monetary_cost", "energy_cost",
               "bytes_in", "bytes_out")


def cost_of_request(net: NetworkProfile, invocation_price: float, method_throughput: float,
                    bytes_in: int, bytes_out: int, request_id: str = "",
                    energy: EnergyModel = EnergyModel()) -> CostRecord:
    if bytes_in < 0 or bytes_out < 0:
        raise ValueError("byte counts must be non-negative")
    size = bytes_in + bytes_out
    transfer = net.latency + size / net.throughput
    execution = 1.0 / method_throughput
    return CostRecord(
        request_id=request_id,
        transfer_time=transfer,
        execution_time=execution,
        monetary_cost=invocation_price + net.price_per_byte * size,
        energy_cost=energy.alpha * (transfer + execution) + energy.beta * size,
        bytes_in=bytes_in,
        bytes_out=bytes_out,
    )


@dataclass
class CostLedger:
    """Append-only list of cost records; totals are correctly rounded sums."""

    records: list[CostRecord] = field(default_factory=list)

    def record(self, rec: CostRecord) -> CostRecord:
        self.records.append(rec)
        return rec

    def __len__(self) -> int:
        return len(self.records)

    def totals(self) -> dict:
        out = {}
        for name in COST_FIELDS:
            values = [getattr(r, name) for r in self.records]
            out[name] = sum(values) if name.startswith("bytes") else math.fsum(values)
        out["requests"] = len(self.records)
        return out

    def by_prefix(self, prefix: str) -> "CostLedger":
        return CostLedger([r for r in self.records if r.request_id.startswith(prefix)])

    def to_list(self) -> list[dict]:
        return [r.to_dict() for r in self.records]

    @classmethod
    def from_list(cls, rows: list[dict]) -> "CostLedger":
        names = {f.name for f in fields(CostRecord)}
        return cls([CostRecord(**{k: v for k, v in row.items() if k in names}) for row in rows])
