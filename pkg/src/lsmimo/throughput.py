"""Raw and effective throughput of an LTE-like 4-QAM uplink.

C_raw = Mb * M_spts * M_RB * M_f * Nt * Rc / T_ts   (information bits per slot / slot time)
C_eff = C_raw * (1 - BER_PPR)
"""

from dataclasses import dataclass, fields
from fractions import Fraction

from .errors import ParameterError


@dataclass(frozen=True)
class LteParams:
    """Defaults reproduce the 4-QAM LTE-like parameter table (uncoded system)."""

    M_b: int = 2
    N_t: int = 4
    N_r: int = 40
    T_ts: float = 0.5e-3
    M_spts: int = 7
    B: float = 20e6  # carried for completeness; the throughput formula does not use it
    M_RB: int = 100
    M_f: int = 12
    R_c: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "R_c", Fraction(self.R_c).limit_denominator(1000))
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ParameterError(f"{f.name} must be positive, got {value}")
        if self.R_c > 1:
            raise ParameterError(f"R_c must not exceed 1, got {self.R_c}")


def raw_throughput(p: LteParams) -> float:
    """Theoretical error-free throughput in bit/s."""
    if not p.T_ts > 0:
        raise ParameterError("T_ts must be positive")
    bits_per_slot = p.M_b * p.M_spts * p.M_RB * p.M_f * p.N_t * p.R_c
    return float(bits_per_slot / Fraction(p.T_ts).limit_denominator(10**9))


def effective_throughput(c_raw: float, ppr: float) -> float:
    if not 0.0 <= ppr <= 1.0:
        raise ParameterError(f"BER_PPR must lie in [0, 1], got {ppr}")
    return c_raw * (1.0 - ppr)
