from pydantic import BaseModel, ConfigDict, Field

UTILIZATION_MARGIN = 1e-9


class EnergyParams(BaseModel):
    """
    DBS power model ``p = beta * rho_d + static_power`` and its per-slot energy budget.

    The default static power is hovering (110 W) plus the small cell circuitry (37 W);
    the default threshold is 0.2 kWh over a 10 minute slot.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    beta: float = Field(default=500.0, gt=0)
    static_power: float = Field(default=147.0, ge=0)
    energy_threshold: float = Field(default=7.2e5, ge=0)
    slot_length: float = Field(default=600.0, gt=0)


def dbs_utilization_cap(energy: EnergyParams) -> float:
    raw = (energy.energy_threshold / energy.slot_length - energy.static_power) / energy.beta

    return min(max(raw, 0.0), 1.0 - UTILIZATION_MARGIN)
