"""Range profiling and radar-cross-section estimation.

Both chains share one measurement geometry: a clean transmit waveform is
matched-filtered against the received sweep, the correlation lags map to
two-way range, and detected peaks are converted to calibrated cross
sections.  The narrowband estimator sums peak values coherently (phase
sensitive); the wideband estimator sums per-peak powers, which is what
makes it immune to sweep-to-sweep phase drift.

The closed-form models are also provided: the narrowband cross section
as a cosine-weighted sum over scattering centers and the wideband cross
section as their plain sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import Pol, Scatterer, Scene, TargetModel, propagate
from .codes import PnSequence
from .receiver import CorrelationStream, rx_gate, uwb_correlate
from .waveform import (Mode, RadarParams, SampleStream, SPEED_OF_LIGHT,
                       gate_pulse, ds_uwb_train, qpsk_baseband, spread)


class NoDetections(RuntimeError):
    """Raised when an estimate is requested but no peak exists in the gate."""


@dataclass(frozen=True)
class RangeProfile:
    """Complex range response of one sweep.

    ``values`` keeps full phase so the narrowband estimator can sum
    coherently; ``power`` is the bin magnitude squared.
    """

    ranges_m: np.ndarray
    values: np.ndarray
    bin_width_m: float
    pol: Pol | None = None
    sweep_index: int = 0

    def __post_init__(self):
        ranges = np.asarray(self.ranges_m, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.complex128)
        if ranges.shape != values.shape:
            raise ValueError("ranges and values must have equal length")
        if ranges.size and np.any(np.diff(ranges) <= 0):
            raise ValueError("ranges must be strictly increasing")
        ranges.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "ranges_m", ranges)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.ranges_m.size)

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass(frozen=True)
class Detection:
    range_m: float
    power: float
    value: complex
    bin_index: int


@dataclass(frozen=True)
class RcsEstimate:
    """Calibrated cross section with its logarithmic form.

    Measured estimates are non-negative; the narrowband closed-form
    model may be negative, in which case dbsm reports the magnitude.
    """

    sigma_m2: float
    mode: Mode
    sweep_index: int = 0
    dbsm: float = field(init=False)

    def __post_init__(self):
        if self.mode is Mode.DS_UWB and self.sigma_m2 < 0:
            raise ValueError("wideband cross section cannot be negative")
        mag = abs(self.sigma_m2)
        value = 10.0 * math.log10(mag) if mag > 0 else -math.inf
        object.__setattr__(self, "dbsm", value)


@dataclass(frozen=True)
class Calibration:
    """Scale from integrated profile power to square meters."""

    gain: float
    reference_sigma_m2: float
    reference_range_m: float

    def __post_init__(self):
        if not self.gain > 0:
            raise ValueError("calibration gain must be positive")


def rcs_nb(target: TargetModel, wavelength_m: float) -> float:
    """Narrowband cross-section model: sum of sigma_k * cos(2*pi*R_k/lambda).

    The value is signed; destructive phase alignment can drive it toward
    zero or below.  Sums are evaluated with exact rounding so the
    wideband bound holds exactly.
    """
    if wavelength_m <= 0:
        raise ValueError("wavelength must be positive")
    return math.fsum(p.sigma_m2 * math.cos(2.0 * math.pi * p.range_m / wavelength_m)
                     for p in target.points)


def rcs_uwb(target: TargetModel) -> float:
    """Wideband cross-section model: plain sum of the point cross sections."""
    return math.fsum(p.sigma_m2 for p in target.points)


def pulse_volume_depth(tau_s: float, c_m_per_s: float = SPEED_OF_LIGHT) -> float:
    """Range extent illuminated by one pulse of width tau (c * tau).

    Pass c_m_per_s=3e8 for round textbook numbers (1 us -> 300 m,
    1 ns -> 0.3 m).
    """
    if tau_s <= 0:
        raise ValueError("tau_s must be positive")
    return c_m_per_s * tau_s


def range_profile(c: CorrelationStream, params: RadarParams,
                  blank_width_s: float = 0.0, max_range_m: float | None = None,
                  pol: Pol | None = None, sweep_index: int = 0) -> RangeProfile:
    """Map correlation lags to two-way range.

    Bins blanked by the receive gate (range < c*blank/2) are dropped, as
    are negative lags and, optionally, ranges beyond ``max_range_m``.
    """
    if len(c) == 0:
        raise ValueError("correlation stream is empty")
    lags = c.lags_s()
    ranges = SPEED_OF_LIGHT * lags / 2.0
    lo = SPEED_OF_LIGHT * blank_width_s / 2.0
    keep = ranges >= max(lo, 0.0)
    if max_range_m is not None:
        keep &= ranges <= max_range_m
    return RangeProfile(ranges_m=ranges[keep], values=c.values[keep],
                        bin_width_m=SPEED_OF_LIGHT * c.lag_resolution_s / 2.0,
                        pol=pol, sweep_index=sweep_index)


def detect_scatterers(profile: RangeProfile, threshold_db_above_noise: float,
                      window_bins: int = 1) -> list[Detection]:
    """Pick local maxima more than the threshold above the noise median.

    A bin qualifies when it holds the window maximum over +/-window_bins
    neighbours; among equal-power bins the smaller range wins, and runs
    of equal-power adjacent bins merge into one detection at their
    power-weighted centroid.
    """
    if threshold_db_above_noise <= 0:
        raise ValueError("threshold must be positive (dB above noise)")
    power = profile.power
    n = power.size
    if n == 0:
        return []
    # Relative floor keeps float round-off in noiseless profiles (about
    # 300 dB down) from masquerading as scatterers.
    floor = max(float(np.median(power)), float(power.max()) * 1e-18)
    thr = floor * 10.0 ** (threshold_db_above_noise / 10.0)
    w = max(1, int(window_bins))
    detections: list[Detection] = []
    i = 0
    while i < n:
        p = power[i]
        if p <= thr or p <= 0.0:
            i += 1
            continue
        lo = max(0, i - w)
        hi = min(n, i + w + 1)
        win = power[lo:hi]
        if p < win.max() or (lo + int(np.argmax(win))) != i:
            i += 1
            continue
        # merge the run of adjacent equal-power bins
        j = i
        while j + 1 < n and power[j + 1] == p:
            j += 1
        run = slice(i, j + 1)
        weights = power[run]
        centroid = float(np.average(profile.ranges_m[run], weights=weights))
        detections.append(Detection(range_m=centroid, power=float(p),
                                    value=complex(profile.values[i]),
                                    bin_index=i))
        i = j + 1
    return detections


def calibrate(profile: RangeProfile, sigma_ref_m2: float,
              range_ref_m: float) -> Calibration:
    """Derive the power-to-m^2 gain from a reference-sphere profile.

    The detected peak's own bin range normalizes the two-way spreading
    so that estimating on the same profile returns the reference cross
    section exactly.
    """
    if sigma_ref_m2 <= 0:
        raise ValueError("reference cross section must be positive")
    if range_ref_m <= 0:
        raise ValueError("reference range must be positive")
    power = profile.power
    if power.size == 0:
        raise ValueError("reference profile is empty")
    peak_idx = int(np.argmax(power))
    peak = float(power[peak_idx])
    floor = float(np.median(power))
    if peak <= 0 or (floor > 0 and peak < 10.0 * floor):
        raise ValueError(
            "reference peak is not detectable (needs >= 10 dB above the "
            "profile median)")
    peak_range = float(profile.ranges_m[peak_idx])
    if abs(peak_range - range_ref_m) > 4.0 * profile.bin_width_m + 0.5:
        raise ValueError(
            f"reference peak found at {peak_range:g} m, expected near "
            f"{range_ref_m:g} m")
    gain = sigma_ref_m2 / (peak * peak_range ** 4)
    return Calibration(gain=gain, reference_sigma_m2=sigma_ref_m2,
                       reference_range_m=range_ref_m)


def estimate_rcs(profile: RangeProfile, cal: Calibration, mode: Mode,
                 threshold_db: float = 10.0, window_bins: int = 1,
                 gate_m: tuple[float, float] | None = None,
                 margin_bins: int = 2) -> RcsEstimate:
    """Convert detected peaks into a calibrated cross section.

    Narrowband: the complex peak values inside the target window are
    summed coherently and the resulting power is calibrated once at the
    power-weighted window range.  Wideband: per-peak powers are
    calibrated individually and added.
    """
    detections = detect_scatterers(profile, threshold_db, window_bins)
    if gate_m is not None:
        lo, hi = gate_m
        gated = [d for d in detections if lo <= d.range_m <= hi]
    else:
        gated = detections
    if not gated:
        where = f" in gate [{gate_m[0]:g}, {gate_m[1]:g}] m" if gate_m else ""
        raise NoDetections(f"no scatterer detected{where}")
    margin = margin_bins * profile.bin_width_m
    w_lo = min(d.range_m for d in gated) - margin
    w_hi = max(d.range_m for d in gated) + margin
    peaks = [d for d in detections if w_lo <= d.range_m <= w_hi]
    if mode is Mode.DS_UWB:
        sigma = math.fsum(cal.gain * d.power * d.range_m ** 4 for d in peaks)
    else:
        z = sum(d.value for d in peaks)
        weights = np.array([d.power for d in peaks])
        ranges = np.array([d.range_m for d in peaks])
        r_mean = float(np.average(ranges, weights=weights))
        sigma = cal.gain * abs(z) ** 2 * r_mean ** 4
    return RcsEstimate(sigma_m2=sigma, mode=mode,
                       sweep_index=profile.sweep_index)


# ---------------------------------------------------------------------------
# measurement pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReceiverConfig:
    """Detection and gating settings shared by the experiment drivers."""

    blank_width_s: float = 0.0
    threshold_db: float = 10.0
    max_range_m: float = 20.0
    gate_m: tuple[float, float] | None = None
    margin_bins: int = 2


def matched_window_bins(params: RadarParams) -> int:
    """Peak-suppression window: the matched-filter mainlobe/sidelobe span."""
    fs = params.sample_rate_hz
    if params.mode is Mode.DS_UWB:
        return max(1, 2 * int(round(params.monocycle_support_s * fs)))
    return max(1, 2 * int(round(params.pulse_width_s * fs)))


def make_waveform(params: RadarParams, pn: PnSequence,
                  chips_per_bit: int | None = None
                  ) -> tuple[SampleStream, SampleStream]:
    """Build (active transmit stream, matched-filter template).

    Narrowband: spread all-zero data over the code, hold on I and Q,
    gate to one pulse per PRI; the template is the pulse span.
    Wideband: the full polarity-coded monocycle train is both the
    transmission and the template (trailing silence trimmed).
    """
    fs = params.sample_rate_hz
    if params.mode is Mode.NB_DSSS:
        cpb = chips_per_bit or pn.length
        n_chips = math.ceil(params.pri_s * params.chip_rate_hz)
        n_bits = math.ceil(n_chips / cpb)
        chips = spread(np.zeros(n_bits, dtype=np.int64), pn, cpb)
        stream = qpsk_baseband(chips, chips, params)
        n_pri = int(round(params.pri_s * fs))
        samples = stream.samples[:n_pri]
        active = gate_pulse(SampleStream(samples, fs, params.carrier_hz), params)
        n_pulse = int(round(params.pulse_width_s * fs))
        template = SampleStream(active.samples[:n_pulse], fs, params.carrier_hz)
        return active, template
    train = ds_uwb_train(pn, params)
    nz = np.nonzero(train.samples)[0]
    template = SampleStream(train.samples[: nz[-1] + 1], fs, params.carrier_hz)
    return train, template


class SweepPipeline:
    """Precomputed transmit/template pair for repeated sweeps.

    One instance owns the waveform for a given (params, code) pair and
    runs the propagate / gate / correlate / profile chain per sweep.
    """

    def __init__(self, params: RadarParams, pn: PnSequence,
                 chips_per_bit: int | None = None,
                 rx_config: ReceiverConfig | None = None):
        self.params = params
        self.rx_config = rx_config or ReceiverConfig()
        active, template = make_waveform(params, pn, chips_per_bit)
        tail = int(math.ceil(2.0 * self.rx_config.max_range_m
                             / SPEED_OF_LIGHT * params.sample_rate_hz)) + 1
        samples = np.concatenate(
            [active.samples, np.zeros(tail, dtype=np.complex128)])
        self.tx = SampleStream(samples, params.sample_rate_hz, params.carrier_hz)
        self.template = template
        self.window_bins = matched_window_bins(params)

    def profile(self, scene: Scene, pol: Pol = Pol.VV,
                sweep_index: int = 0) -> RangeProfile:
        rx = propagate(self.tx, scene, self.params, pol, sweep_index)
        cfg = self.rx_config
        if cfg.blank_width_s > 0:
            rx = rx_gate(rx, self.params, cfg.blank_width_s)
        corr = uwb_correlate(rx, self.template)
        return range_profile(corr, self.params, blank_width_s=cfg.blank_width_s,
                             max_range_m=cfg.max_range_m, pol=pol,
                             sweep_index=sweep_index)

    def estimate(self, scene: Scene, cal: Calibration, pol: Pol = Pol.VV,
                 sweep_index: int = 0) -> RcsEstimate:
        cfg = self.rx_config
        prof = self.profile(scene, pol, sweep_index)
        return estimate_rcs(prof, cal, self.params.mode,
                            threshold_db=cfg.threshold_db,
                            window_bins=self.window_bins,
                            gate_m=cfg.gate_m, margin_bins=cfg.margin_bins)


def self_calibrate(params: RadarParams, pn: PnSequence,
                   sigma_ref_m2: float, range_ref_m: float,
                   chips_per_bit: int | None = None,
                   rx_config: ReceiverConfig | None = None) -> Calibration:
    """Calibrate against a clean reference sphere (no clutter, no noise)."""
    reference = Scene(target=TargetModel(points=(
        Scatterer(sigma_m2=sigma_ref_m2, range_m=range_ref_m),)))
    pipeline = SweepPipeline(params, pn, chips_per_bit, rx_config)
    prof = pipeline.profile(reference)
    return calibrate(prof, sigma_ref_m2, range_ref_m)


def sweep_series(scene: Scene, params: RadarParams, cal: Calibration,
                 m_sweeps: int, pn: PnSequence,
                 chips_per_bit: int | None = None,
                 rx_config: ReceiverConfig | None = None,
                 pol: Pol = Pol.VV) -> list[RcsEstimate]:
    """Estimate the cross section over M independent sweeps.

    Sweep k uses RNG streams derived from (scene seed, k), so phase
    jitter and noise refresh per sweep while the scene stays fixed.
    """
    if m_sweeps < 2:
        raise ValueError("a sweep series needs at least 2 sweeps")
    pipeline = SweepPipeline(params, pn, chips_per_bit, rx_config)
    return [pipeline.estimate(scene, cal, pol, sweep_index=k)
            for k in range(m_sweeps)]


def polarimetric_scan(scene: Scene, params: RadarParams, pn: PnSequence,
                      chips_per_bit: int | None = None,
                      rx_config: ReceiverConfig | None = None,
                      sweep_index: int = 0) -> dict[Pol, RangeProfile]:
    """One profile per tx/rx polarization pair.

    All four runs share the sweep index, hence identical noise and
    jitter draws; only the scattering-matrix entries differ.
    """
    pipeline = SweepPipeline(params, pn, chips_per_bit, rx_config)
    return {pol: pipeline.profile(scene, pol, sweep_index)
            for pol in (Pol.VV, Pol.HH, Pol.VH, Pol.HV)}


@dataclass(frozen=True)
class ScanImage:
    """Azimuth x range raster of calibrated power."""

    azimuths_deg: np.ndarray
    ranges_m: np.ndarray
    power: np.ndarray  # shape (n_az, n_range), linear, RCS-calibrated

    def __post_init__(self):
        if self.power.shape != (self.azimuths_deg.size, self.ranges_m.size):
            raise ValueError("image shape mismatch")


def _beam_weight(delta_deg: np.ndarray, beamwidth_deg: float) -> np.ndarray:
    """Two-way amplitude weight of a Gaussian beam with the given -3 dB width."""
    return np.exp(-4.0 * np.log(2.0) * (delta_deg / beamwidth_deg) ** 2)


def scan_image(scene: Scene, params: RadarParams, cal: Calibration,
               azimuth_step_deg: float, beamwidth_deg: float,
               pn: PnSequence, chips_per_bit: int | None = None,
               rx_config: ReceiverConfig | None = None,
               az_span_deg: float | None = None,
               pol: Pol = Pol.VV) -> ScanImage:
    """Mechanical azimuth raster: weight the scene by the beam, profile,
    and stack rows into a calibrated image."""
    if azimuth_step_deg <= 0:
        raise ValueError("azimuth step must be positive")
    if azimuth_step_deg > beamwidth_deg:
        raise ValueError("azimuth step must not exceed the beamwidth")
    if az_span_deg is None:
        az_pts = [math.degrees(p.azimuth_rad) for p in scene.all_points]
        az_span_deg = max(abs(a) for a in az_pts) + 3.0 * beamwidth_deg
    n_steps = int(math.ceil(az_span_deg / azimuth_step_deg))
    azimuths = np.arange(-n_steps, n_steps + 1) * azimuth_step_deg

    pipeline = SweepPipeline(params, pn, chips_per_bit, rx_config)
    rows = []
    ranges = None
    for row_idx, az in enumerate(azimuths):
        weighted = []
        for p in scene.all_points:
            w = float(_beam_weight(
                np.array(math.degrees(p.azimuth_rad) - az), beamwidth_deg))
            if w < 1e-8:
                continue
            weighted.append(Scatterer(sigma_m2=p.sigma_m2 * w * w,
                                      range_m=p.range_m,
                                      cross_range_m=p.cross_range_m,
                                      pol_matrix=p.pol_matrix))
        if weighted:
            pointed = Scene(target=TargetModel(points=tuple(weighted)),
                            noise_psd=scene.noise_psd,
                            direct_path_gain=scene.direct_path_gain,
                            sweep_phase_jitter_rad=scene.sweep_phase_jitter_rad,
                            rng_seed=scene.rng_seed)
        else:
            # keep a zero-strength placeholder so the row is noise only
            pointed = Scene(target=TargetModel(points=(
                Scatterer(sigma_m2=0.0, range_m=scene.all_points[0].range_m),)),
                noise_psd=scene.noise_psd,
                direct_path_gain=scene.direct_path_gain,
                sweep_phase_jitter_rad=scene.sweep_phase_jitter_rad,
                rng_seed=scene.rng_seed)
        prof = pipeline.profile(pointed, pol, sweep_index=row_idx)
        if ranges is None:
            ranges = prof.ranges_m
        rows.append(cal.gain * prof.power * prof.ranges_m ** 4)
    return ScanImage(azimuths_deg=azimuths, ranges_m=ranges,
                     power=np.vstack(rows))
