"""Receive chains: blanking gate, despreading, QPSK demodulation, and the
sliding correlator with sample-and-hold pickoff.

Synchronization is genie-aided: chip, symbol and sweep timing are taken
from the common simulation clock, which matches an instrument that
shares one spreading-code generator between transmitter and receiver.
The IF stage is an identity on complex baseband, so despreading is a
chip-lattice multiply.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .codes import PnSequence
from .waveform import RadarParams, SampleStream, _pulse_mask


@dataclass(frozen=True)
class CorrelationStream:
    """Sliding-correlator output; one complex value per lag bin."""

    values: np.ndarray
    lag_resolution_s: float
    t0_s: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 1:
            raise ValueError("values must be 1-D")
        if not self.lag_resolution_s > 0:
            raise ValueError("lag_resolution_s must be positive")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def lags_s(self) -> np.ndarray:
        return self.t0_s + np.arange(self.values.size) * self.lag_resolution_s


def rx_gate(s: SampleStream, params: RadarParams,
            blank_width_s: float) -> SampleStream:
    """Blank the receiver while the transmitter fires.

    Samples inside [m*PRI, m*PRI + blank) are zeroed; the gate must cover
    at least the transmit pulse and re-open within every PRI.
    """
    if blank_width_s < params.pulse_width_s:
        raise ValueError(
            f"blank width {blank_width_s:g} s is shorter than the transmit "
            f"pulse {params.pulse_width_s:g} s; leakage would pass")
    if blank_width_s >= params.pri_s:
        raise ValueError(
            f"blank width {blank_width_s:g} s covers the whole PRI "
            f"{params.pri_s:g} s; the receiver would never open")
    mask = _pulse_mask(len(s), s.sample_rate, s.t0, params.pri_s, blank_width_s)
    return s.with_samples(np.where(mask, 0.0, s.samples))


def despread(s: SampleStream, pn: PnSequence, params: RadarParams,
             code_lag_chips: int = 0) -> SampleStream:
    """Multiply each chip-long block by the PN chip at the given code lag.

    With the transmitter's code and lag 0 this collapses the spread QPSK
    stream back to plain symbols.
    """
    n = len(s)
    spc = params.samples_per_chip
    lag = int(code_lag_chips) % pn.length
    chip_idx = (np.arange(n) // spc + lag) % pn.length
    return s.with_samples(s.samples * pn.chips[chip_idx])


def qpsk_demod(s: SampleStream, params: RadarParams,
               chips_per_bit: int) -> tuple[np.ndarray, np.ndarray]:
    """Integrate-and-dump demodulator; returns (I bits, Q bits).

    The symbol window is chips_per_bit * samples_per_chip samples; the
    sign of each rail decides the bit (positive -> 0).
    """
    n_sym_samples = int(chips_per_bit) * params.samples_per_chip
    n_symbols = len(s) // n_sym_samples
    if n_symbols < 1:
        raise ValueError(
            f"stream of {len(s)} samples is shorter than one symbol "
            f"({n_sym_samples} samples)")
    trimmed = s.samples[: n_symbols * n_sym_samples]
    z = trimmed.reshape(n_symbols, n_sym_samples).mean(axis=1)
    i_bits = (z.real < 0).astype(np.uint8)
    q_bits = (z.imag < 0).astype(np.uint8)
    return i_bits, q_bits


def uwb_correlate(rx: SampleStream, template: SampleStream) -> CorrelationStream:
    """Sliding inner product <rx[n+k], template[k]> over all full overlaps.

    The template is conjugated, so a matched template yields the complex
    echo amplitude at the peak lag.  FFT evaluation is used; it matches
    the direct form to floating-point accuracy.
    """
    if len(template) > len(rx):
        raise ValueError(
            f"template ({len(template)} samples) longer than the received "
            f"stream ({len(rx)} samples)")
    if template.sample_rate != rx.sample_rate:
        raise ValueError("rx and template sample rates differ")
    values = signal.correlate(rx.samples, template.samples, mode="valid",
                              method="fft")
    return CorrelationStream(values=values, lag_resolution_s=1.0 / rx.sample_rate,
                             t0_s=rx.t0 - template.t0)


def sample_hold(c: CorrelationStream, gate_times_s) -> np.ndarray:
    """Pick correlation values at the gate instants (nearest lag bin)."""
    out = np.empty(len(gate_times_s), dtype=np.complex128)
    span = (len(c) - 1) * c.lag_resolution_s
    for i, t in enumerate(gate_times_s):
        offset = t - c.t0_s
        if offset < -c.lag_resolution_s / 2 or offset > span + c.lag_resolution_s / 2:
            raise ValueError(
                f"gate at {t:g} s lies outside the correlation span "
                f"[{c.t0_s:g}, {c.t0_s + span:g}] s")
        idx = int(np.clip(round(offset / c.lag_resolution_s), 0, len(c) - 1))
        out[i] = c.values[idx]
    return out


def processing_gain(pn: PnSequence, chips_per_bit: int) -> float:
    """Despreading gain in dB: 10*log10(chips per bit)."""
    if not (1 <= chips_per_bit <= pn.length):
        raise ValueError(f"chips_per_bit must lie in [1, {pn.length}]")
    return 10.0 * np.log10(chips_per_bit)
