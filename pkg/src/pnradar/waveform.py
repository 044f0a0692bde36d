"""Transmit waveform synthesis for both radar chains.

Everything is complex baseband: RF and IF carriers exist only as a
frequency tag on the stream plus explicit phase rotations applied in the
channel.  The narrowband chain builds a spread QPSK stream chopped into
pulses; the wideband chain builds a polarity-coded train of Gaussian
monocycles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .codes import HopSequence, PnSequence

SPEED_OF_LIGHT = 299_792_458.0  # m/s

NB_CARRIER_MIN_HZ = 300e6
NB_CARRIER_MAX_HZ = 3000e6

# Truncation of the Gaussian monocycle, in units of its sigma.
MONOCYCLE_TRUNC_SIGMAS = 4.0


class Mode(Enum):
    NB_DSSS = "nb"
    DS_UWB = "uwb"


@dataclass(frozen=True)
class SampleStream:
    """Uniformly sampled complex baseband signal.

    ``carrier_hz`` tags the center frequency the baseband represents;
    ``t0`` is the absolute time of the first sample.
    """

    samples: np.ndarray
    sample_rate: float  # Hz
    carrier_hz: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1:
            raise ValueError("samples must be 1-D")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if samples.size and not np.all(np.isfinite(samples.view(np.float64))):
            raise ValueError("samples must be finite")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @property
    def power(self) -> float:
        """Mean |s|^2 over the stream."""
        if not self.samples.size:
            return 0.0
        return float(np.mean(np.abs(self.samples) ** 2))

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "SampleStream":
        return SampleStream(samples, self.sample_rate, self.carrier_hz, self.t0)


def _require_compatible(a: SampleStream, b: SampleStream) -> None:
    if a.sample_rate != b.sample_rate:
        raise ValueError(f"sample rates differ: {a.sample_rate} vs {b.sample_rate}")
    if len(a) != len(b):
        raise ValueError(f"stream lengths differ: {len(a)} vs {len(b)}")


@dataclass(frozen=True)
class RadarParams:
    """Static radar configuration shared by both chains.

    For NB_DSSS the sample rate derives from chip_rate_hz *
    samples_per_chip; for DS_UWB it must be given (or defaults to
    100 GHz, resolving a 0.33 ns monocycle with >30 samples).
    """

    carrier_hz: float
    chip_rate_hz: float
    samples_per_chip: int
    pulse_width_s: float
    pri_s: float
    mode: Mode
    monocycle_width_s: float = 0.33e-9
    sample_rate_hz: float = field(default=0.0)

    def __post_init__(self):
        if self.mode is Mode.NB_DSSS:
            if not (NB_CARRIER_MIN_HZ <= self.carrier_hz <= NB_CARRIER_MAX_HZ):
                raise ValueError(
                    f"carrier_hz {self.carrier_hz:g} outside 300-3000 MHz band")
            if self.chip_rate_hz <= 0:
                raise ValueError("chip_rate_hz must be positive")
            if self.samples_per_chip < 2:
                raise ValueError("samples_per_chip must be >= 2")
            fs = self.chip_rate_hz * self.samples_per_chip
            if self.sample_rate_hz and not np.isclose(self.sample_rate_hz, fs):
                raise ValueError("sample_rate_hz inconsistent with chip rate")
            object.__setattr__(self, "sample_rate_hz", fs)
        else:
            if self.monocycle_width_s <= 0:
                raise ValueError("monocycle_width_s must be positive")
            if not self.sample_rate_hz:
                object.__setattr__(self, "sample_rate_hz", 100e9)
        if self.pulse_width_s <= 0:
            raise ValueError("pulse_width_s must be positive")
        if not self.pulse_width_s < self.pri_s:
            raise ValueError(
                f"pulse_width_s ({self.pulse_width_s:g}) must be shorter than "
                f"pri_s ({self.pri_s:g})")

    @property
    def wavelength_m(self) -> float:
        if self.carrier_hz <= 0:
            raise ValueError("wavelength undefined for carrier_hz <= 0")
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def monocycle_sigma_s(self) -> float:
        """Gaussian sigma: pulse width is the peak-to-peak lobe spacing 2*sigma."""
        return self.monocycle_width_s / 2.0

    @property
    def monocycle_support_s(self) -> float:
        """Truncated support of the monocycle (both sides)."""
        return 2.0 * MONOCYCLE_TRUNC_SIGMAS * self.monocycle_sigma_s

    @property
    def unambiguous_range_m(self) -> float:
        return SPEED_OF_LIGHT * self.pri_s / 2.0


def nb_params(carrier_hz: float = 1e9, chip_rate_hz: float = 10e6,
              samples_per_chip: int = 8, pulse_width_s: float = 10e-6,
              pri_s: float = 100e-6) -> RadarParams:
    """Default narrowband DSSS parameter set."""
    return RadarParams(carrier_hz=carrier_hz, chip_rate_hz=chip_rate_hz,
                       samples_per_chip=samples_per_chip,
                       pulse_width_s=pulse_width_s, pri_s=pri_s,
                       mode=Mode.NB_DSSS)


def uwb_params(monocycle_width_s: float = 0.33e-9, pri_s: float = 100e-9,
               sample_rate_hz: float = 100e9,
               carrier_hz: float = 0.0) -> RadarParams:
    """Default impulse-radio parameter set (carrierless)."""
    sigma = monocycle_width_s / 2.0
    support = 2.0 * MONOCYCLE_TRUNC_SIGMAS * sigma
    return RadarParams(carrier_hz=carrier_hz, chip_rate_hz=1.0 / pri_s,
                       samples_per_chip=2, pulse_width_s=support, pri_s=pri_s,
                       mode=Mode.DS_UWB, monocycle_width_s=monocycle_width_s,
                       sample_rate_hz=sample_rate_hz)


def bipolar(bit: int) -> int:
    """Global bit mapping: 0 -> +1, 1 -> -1."""
    return 1 - 2 * int(bit)


def spread(data_bits, pn: PnSequence, chips_per_bit: int) -> np.ndarray:
    """Spread data bits over the PN sequence.

    The code runs continuously across bits: chip j of bit m is
    bipolar(bit_m) * pn[(m*chips_per_bit + j) mod N].
    """
    bits = np.asarray(data_bits, dtype=np.int64)
    if bits.size == 0:
        raise ValueError("data_bits must be nonempty")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("data_bits must be 0/1")
    if not (1 <= chips_per_bit <= pn.length):
        raise ValueError(f"chips_per_bit must lie in [1, {pn.length}]")
    n_chips = bits.size * chips_per_bit
    code = pn.chips[np.arange(n_chips) % pn.length].astype(np.int8)
    symbols = (1 - 2 * bits).astype(np.int8)
    return (np.repeat(symbols, chips_per_bit) * code).astype(np.int8)


def qpsk_baseband(i_chips, q_chips, params: RadarParams) -> SampleStream:
    """Map bipolar I/Q chips to a unit-power QPSK baseband stream.

    Each chip is held for samples_per_chip samples; the constellation is
    (i + jq)/sqrt(2).
    """
    i = np.asarray(i_chips, dtype=np.float64)
    q = np.asarray(q_chips, dtype=np.float64)
    if i.shape != q.shape:
        raise ValueError(f"I/Q chip lengths differ: {i.size} vs {q.size}")
    symbols = (i + 1j * q) / np.sqrt(2.0)
    samples = np.repeat(symbols, params.samples_per_chip)
    return SampleStream(samples, params.sample_rate_hz, params.carrier_hz)


def combine_iq(i_mod: SampleStream, q_mod: SampleStream) -> SampleStream:
    """Element-wise combiner; preserves the carrier tag of the first input."""
    _require_compatible(i_mod, q_mod)
    return i_mod.with_samples(i_mod.samples + q_mod.samples)


def _pulse_mask(n: int, fs: float, t0: float, pri_s: float, width_s: float) -> np.ndarray:
    """True for samples whose time falls in [m*PRI, m*PRI + width)."""
    t = t0 + np.arange(n) / fs
    return np.mod(t, pri_s) < width_s


def gate_pulse(s: SampleStream, params: RadarParams) -> SampleStream:
    """Chop a stream into pulses: samples inside [m*PRI, m*PRI + tau) pass."""
    if not params.pulse_width_s < params.pri_s:
        raise ValueError("pulse width must be shorter than the PRI")
    if s.duration < params.pri_s:
        raise ValueError("stream must cover at least one PRI")
    mask = _pulse_mask(len(s), s.sample_rate, s.t0, params.pri_s,
                       params.pulse_width_s)
    return s.with_samples(np.where(mask, s.samples, 0.0))


def gaussian_monocycle(params: RadarParams) -> SampleStream:
    """Single monocycle p(t) ~ -t*exp(-t^2/(2 sigma^2)), peak amplitude 1.

    The stream is real-valued, centered so the zero crossing lands on the
    middle sample, truncated at +/-4 sigma.
    """
    sigma = params.monocycle_sigma_s
    fs = params.sample_rate_hz
    if fs < 10.0 / params.monocycle_width_s:
        raise ValueError(
            f"sample rate {fs:g} undersamples a {params.monocycle_width_s:g} s monocycle")
    half = int(round(MONOCYCLE_TRUNC_SIGMAS * sigma * fs))
    t = (np.arange(2 * half + 1) - half) / fs
    pulse = -t * np.exp(-t ** 2 / (2.0 * sigma ** 2))
    peak = sigma * np.exp(-0.5)  # extrema at t = +/-sigma
    samples = (pulse / peak).astype(np.complex128)
    return SampleStream(samples, fs, params.carrier_hz, t0=-half / fs)


def ds_uwb_train(code: PnSequence, params: RadarParams,
                 coding: str = "polarity") -> SampleStream:
    """One monocycle per PRI slot, direct-sequence coded.

    ``polarity`` multiplies each pulse by the chip sign (default);
    ``ppm`` instead delays pulses of -1 chips by one monocycle width.
    The train spans code.length PRIs.
    """
    if coding not in ("polarity", "ppm"):
        raise ValueError(f"unknown coding {coding!r}")
    fs = params.sample_rate_hz
    support = params.monocycle_support_s
    ppm_shift = params.monocycle_width_s if coding == "ppm" else 0.0
    if params.pri_s < support + ppm_shift:
        raise ValueError(
            f"pri_s {params.pri_s:g} shorter than the monocycle support {support:g}")
    pulse = gaussian_monocycle(params).samples.real
    pri_samples = int(round(params.pri_s * fs))
    out = np.zeros(code.length * pri_samples, dtype=np.complex128)
    shift_samples = int(round(ppm_shift * fs))
    for m, chip in enumerate(code.chips):
        start = m * pri_samples
        if coding == "polarity":
            out[start:start + pulse.size] += int(chip) * pulse
        else:
            if chip < 0:
                start += shift_samples
            out[start:start + pulse.size] += pulse
    return SampleStream(out, fs, params.carrier_hz)


def fhss_synthesize(s: SampleStream, hops: HopSequence,
                    channel_spacing_hz: float,
                    samples_per_chip: int = 1) -> SampleStream:
    """Frequency-hop a stream: per dwell block, mix with exp(j*2*pi*f_k*t).

    Channel k sits at (k - (num_channels-1)/2) * spacing so the hop set
    is symmetric around the carrier.  Each dwell lasts
    hops.dwell_chips * samples_per_chip samples.
    """
    offsets = (np.asarray(hops.channel_indices, dtype=np.float64)
               - (hops.num_channels - 1) / 2.0) * channel_spacing_hz
    if offsets.size and np.max(np.abs(offsets)) >= s.sample_rate / 2.0:
        raise ValueError("hop offset exceeds the Nyquist band")
    dwell_samples = hops.dwell_chips * int(samples_per_chip)
    if dwell_samples < 1:
        raise ValueError("dwell must span at least one sample")
    n = len(s)
    t = np.arange(n) / s.sample_rate
    f = np.zeros(n)
    for k, off in enumerate(offsets):
        lo = k * dwell_samples
        if lo >= n:
            break
        f[lo:lo + dwell_samples] = off
    return s.with_samples(s.samples * np.exp(2j * np.pi * f * t))
