"""
Slotted ALOHA slot-count optimization over different channel models.

A frame of n channel uses is split into s equal slots, each of the d
devices picks one slot uniformly at random, and a packet of k bits gets
through if it is alone in its slot and survives the channel.
"""

import math
from dataclasses import dataclass

from .bounds import error_prob
from .specfun import DomainError

MODELS = ("classic", "awgn", "coherent", "noncoherent")
FADING = ("coherent", "noncoherent")


@dataclass(frozen=True)
class AlohaScenario:
    """
    Frame length n, payload k_bits, d devices, channel model, coherence t and
    linear SNR rho. variant picks the mean used by the noncoherent error
    approximation ("simplified" or "closed").
    """
    n: int
    k_bits: int
    d: int
    model: str
    t: int = None
    rho: float = None
    variant: str = "simplified"

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"unknown model {self.model!r}")
        if not (self.n >= self.d >= 1 and self.k_bits >= 1):
            raise DomainError("need n >= d >= 1 and k_bits >= 1")
        if self.model in FADING and (self.t is None or int(self.t) != self.t or self.t <= 2):
            raise DomainError("fading models need an integer coherence interval t > 2")
        if self.model != "classic" and not (self.rho is not None and self.rho > 0):
            raise DomainError("channel models need rho > 0")


def admissible_slots(s):
    """Divisors of n, restricted to slot sizes that are multiples of t for fading."""
    out = []
    for slots in range(1, s.n + 1):
        if s.n % slots:
            continue
        if s.model in FADING and (s.n // slots) % s.t:
            continue
        out.append(slots)
    return out


def collision_free(d, slots):
    """Probability that a given slot holds exactly one of d packets, times d/s."""
    return d / slots * (1.0 - 1.0 / slots) ** (d - 1)


def p_success(s, slots):
    """Success probability of one device with `slots` slots per frame."""
    if slots < 1 or s.n % slots:
        raise DomainError(f"{slots} slots do not divide the frame of {s.n}")
    ns = s.n // slots
    if s.model in FADING and ns % s.t:
        raise DomainError(f"slot size {ns} is not a multiple of t={s.t}")
    if s.model == "classic":
        eps = 0.0
    else:
        eps = error_prob(s.model, s.k_bits, ns, s.rho, s.t, s.variant)
    return collision_free(s.d, slots) * (1.0 - eps)


def optimize_slots(s):
    """Best admissible slot count and its success probability; ties go to more slots."""
    best, best_p = None, -math.inf
    for slots in admissible_slots(s):
        p = p_success(s, slots)
        if p >= best_p:
            best, best_p = slots, p
    return best, best_p
