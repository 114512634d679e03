"""Closed-form PHY math for an uncoded adaptive-modulation link.

Symbol error rates for BPSK/QPSK/16QAM/64QAM, the packet error rate of an
N-symbol frame under independent symbol errors, the resulting throughput in
bits/frame, and the rate-maximizing modulation choice.  Everything here is a
pure function of its arguments.
"""

import math
from dataclasses import dataclass, field

_SQRT_PI = math.sqrt(math.pi)
_SQRT_2 = math.sqrt(2.0)


def _erf_series(z):
    # erf(z) = (2 z e^{-z^2} / sqrt(pi)) * sum_n (2 z^2)^n / (1*3*...*(2n+1))
    # All terms positive, so no cancellation; used for small z.
    zz = 2.0 * z * z
    term = 1.0
    total = 1.0
    k = 1
    while True:
        term *= zz / (2 * k + 1)
        total += term
        if term < 1e-17 * total:
            break
        k += 1
    return 2.0 * z * math.exp(-z * z) / _SQRT_PI * total


def _erfc_cf(z):
    # sqrt(pi) e^{z^2} erfc(z) = 1/(z + (1/2)/(z + (2/2)/(z + (3/2)/(z + ...))))
    # evaluated with the modified Lentz algorithm; used for large z.
    tiny = 1e-300
    f = z if z != 0.0 else tiny
    c = f
    d = 0.0
    n = 1
    while n < 300:
        a = 0.5 * n
        d = z + a * d
        if d == 0.0:
            d = tiny
        c = z + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
        n += 1
    ez2 = math.exp(-z * z)  # underflows to 0.0 for z^2 > ~745, which is fine
    return ez2 / (_SQRT_PI * f)


def q_function(x):
    """Gaussian tail probability P(Z > x) for standard normal Z.

    Self-contained: small arguments use the non-alternating erf series,
    large ones a continued fraction for erfc.  Relative error is well below
    1e-10 wherever the result is representable.
    """
    if not math.isfinite(x):
        raise ValueError(f"q_function requires a finite argument, got {x}")
    if x < 0.0:
        return 1.0 - q_function(-x)
    z = x / _SQRT_2
    if z < 1.5:
        q = 0.5 * (1.0 - _erf_series(z))
    else:
        q = 0.5 * _erfc_cf(z)
    if q < 0.0:
        return 0.0
    if q > 1.0:
        return 1.0
    return q


@dataclass(frozen=True)
class McsSpec:
    """One modulation level: index, bits/symbol, and its SER curve constants.

    The SER is ser_coef * Q(sqrt(ser_slope * gamma)):
      BPSK          -> Q(sqrt(2 gamma))
      M-QAM (M>=4)  -> 2 (1 - 1/sqrt(M)) Q(sqrt(3 log2(M) gamma / (M - 1)))
    """

    index: int
    bits_per_symbol: float
    constellation_size: int
    ser_coef: float = field(init=False)
    ser_slope: float = field(init=False)

    def __post_init__(self):
        M = self.constellation_size
        if M < 2:
            raise ValueError(f"constellation size must be >= 2, got {M}")
        if abs(self.bits_per_symbol - math.log2(M)) > 1e-12:
            raise ValueError("bits_per_symbol must equal log2(constellation_size)")
        if M == 2:
            coef, slope = 1.0, 2.0
        else:
            coef = 2.0 * (1.0 - 1.0 / math.sqrt(M))
            slope = 3.0 * math.log2(M) / (M - 1)
        object.__setattr__(self, "ser_coef", coef)
        object.__setattr__(self, "ser_slope", slope)


DEFAULT_MCS_TABLE = (
    McsSpec(1, 1.0, 2),    # BPSK
    McsSpec(2, 2.0, 4),    # QPSK
    McsSpec(3, 4.0, 16),   # 16QAM
    McsSpec(4, 6.0, 64),   # 64QAM
)


@dataclass(frozen=True)
class LinkParams:
    """Frame geometry: symbols per frame and the sensing/data time split.

    sensing_fraction is the fraction of the data payload transmitted before
    secondary transmitters come on air, i.e. the weight of the clean SNR in
    the bit-average SINR.
    """

    symbols_per_frame: int = 1000
    sensing_fraction: float = 0.1

    def __post_init__(self):
        if self.symbols_per_frame < 1:
            raise ValueError("symbols_per_frame must be >= 1")
        if not 0.0 <= self.sensing_fraction <= 1.0:
            raise ValueError("sensing_fraction must lie in [0, 1]")

    @property
    def data_fraction(self):
        return 1.0 - self.sensing_fraction


def ser(mcs, gamma):
    """Symbol error rate of `mcs` at linear SINR `gamma`, clamped to [0, 1]."""
    if gamma < 0.0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    p = mcs.ser_coef * q_function(math.sqrt(mcs.ser_slope * gamma))
    return min(p, 1.0)


def per(mcs, gamma, n_symbols):
    """Packet error rate of an n_symbols frame: 1 - (1 - SER)^N.

    Computed as -expm1(N log1p(-SER)) so that tiny SERs do not underflow
    the survival probability.
    """
    if n_symbols < 1:
        raise ValueError(f"n_symbols must be >= 1, got {n_symbols}")
    p_sym = ser(mcs, gamma)
    if p_sym >= 1.0:
        return 1.0
    return -math.expm1(n_symbols * math.log1p(-p_sym))


def rate(mcs, gamma, n_symbols):
    """Expected throughput in bits/frame: r_m (1 - PER) N."""
    return mcs.bits_per_symbol * (1.0 - per(mcs, gamma, n_symbols)) * n_symbols


def optimal_mcs(gamma, n_symbols, table=DEFAULT_MCS_TABLE):
    """Index of the rate-maximizing MCS; ties go to the lowest index."""
    if not table:
        raise ValueError("MCS table must not be empty")
    best_idx = table[0].index
    best_rate = rate(table[0], gamma, n_symbols)
    for mcs in table[1:]:
        r = rate(mcs, gamma, n_symbols)
        if r > best_rate:
            best_rate = r
            best_idx = mcs.index
    return best_idx
