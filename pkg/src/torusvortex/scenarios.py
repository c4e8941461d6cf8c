"""The six captioned initial configurations (three dipoles, three four-vortex sets)."""
from __future__ import annotations

from dataclasses import dataclass

from .rdl import symmetric_configuration
from .renorm import VortexConfiguration


@dataclass(frozen=True)
class Scenario:
    name: str
    label: str
    figure: str
    t_end: float
    kind: str = "dipole"
    alpha0: float = 0.0
    beta0: float = 0.0
    x0: float = 0.0
    points: tuple = ()

    def configuration(self) -> VortexConfiguration:
        if self.kind == "dipole":
            return VortexConfiguration.from_points(self.points)
        return symmetric_configuration(self.kind, self.alpha0, self.beta0, self.x0)


SCENARIOS = {
    s.name: s
    for s in (
        Scenario("fig3_left", "a1=(0.5,0.4), a2=(0.5,0.6)", "3", 0.1,
                 points=((0.5, 0.4, 1), (0.5, 0.6, -1))),
        Scenario("fig3_middle", "a1=(0.4,0.4), a2=(0.6,0.6)", "3", 0.1,
                 points=((0.4, 0.4, 1), (0.6, 0.6, -1))),
        Scenario("fig3_right", "a1=(0.6,0.4), a2=(0.4,0.6)", "3", 0.1,
                 points=((0.6, 0.4, 1), (0.4, 0.6, -1))),
        Scenario("fig4_left", "diag4, alpha0=-0.25, beta0=0", "4", 0.5, "diag4", -0.25, 0.0),
        Scenario("fig4_middle", "mirror4, alpha0=-0.1, beta0=0.1", "4", 0.5, "mirror4", -0.1, 0.1),
        Scenario("fig4_right", "stacked4, x0=0.15, alpha0=-0.075, beta0=0", "4", 0.5,
                 "stacked4", -0.075, 0.0, 0.15),
    )
}


def get(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
