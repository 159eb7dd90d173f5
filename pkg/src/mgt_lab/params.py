"""Physical parameters of the dissipative model.

The equation carries two parameters: the thermal relaxation ``tau``
(coefficient of the third time derivative) and the diffusivity of sound
``beta`` (coefficient of the viscous term).  The sound speed is fixed to 1.
Everything in this package assumes the dissipative window ``0 < tau < beta``;
at ``tau == beta`` the energy is conserved and the decay theory changes
character, so that case is rejected explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConservativeCase, NonDissipative


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter pair, validated at construction."""

    tau: float
    beta: float

    def __post_init__(self) -> None:
        tau, beta = float(self.tau), float(self.beta)
        if not (tau > 0.0 and beta > 0.0):
            raise NonDissipative(f"need tau > 0 and beta > 0, got tau={tau}, beta={beta}")
        if tau == beta:
            raise ConservativeCase(f"tau == beta == {tau}: conservative case is out of scope")
        if tau > beta:
            raise NonDissipative(f"need tau < beta, got tau={tau} >= beta={beta}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "beta", beta)

    @property
    def wave_speed(self) -> float:
        """Propagation speed of the characteristic cone, sqrt(beta/tau)."""
        return (self.beta / self.tau) ** 0.5

    @property
    def damping_gap(self) -> float:
        """beta - tau, the coefficient driving low-frequency diffusion."""
        return self.beta - self.tau


def validate_params(tau: float, beta: float) -> ModelParams:
    """Return ModelParams iff 0 < tau < beta, else raise.

    Raises ConservativeCase when tau == beta and NonDissipative for any
    other violation.
    """
    return ModelParams(tau, beta)


DEFAULT_PARAMS = ModelParams(0.5, 1.0)
