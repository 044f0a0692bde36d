"""pnradar: sample-accurate simulator for pulsed DSSS-QPSK and DS-UWB
impulse imaging radar, from waveform synthesis through a cluttered
channel to range profiling and cross-section estimation."""

from .codes import (CodeKind, HopSequence, PnSequence, gen_gold, gen_hops,
                    gen_mseq, manual_sequence, periodic_autocorrelation,
                    periodic_crosscorrelation, PREFERRED_PAIRS)
from .waveform import (Mode, RadarParams, SampleStream, SPEED_OF_LIGHT,
                       combine_iq, ds_uwb_train, fhss_synthesize,
                       gate_pulse, gaussian_monocycle, nb_params,
                       qpsk_baseband, spread, uwb_params)
from .channel import (Interferer, InterfererKind, Pol, Scatterer, Scene,
                      TargetModel, add_interferer, gen_clutter,
                      identity_pol_matrix, propagate, scattering_amplitude)
from .receiver import (CorrelationStream, despread, processing_gain,
                       qpsk_demod, rx_gate, sample_hold, uwb_correlate)
from .imaging import (Calibration, Detection, NoDetections, RangeProfile,
                      RcsEstimate, ReceiverConfig, ScanImage, SweepPipeline,
                      calibrate, detect_scatterers, estimate_rcs,
                      make_waveform, matched_window_bins, polarimetric_scan,
                      pulse_volume_depth, range_profile, rcs_nb, rcs_uwb,
                      scan_image, self_calibrate, sweep_series)

__version__ = "0.1.0"
