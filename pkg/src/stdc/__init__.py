"""Spectral and temporal deviated coefficients for voice spoofing detection."""

from .audio_io import AudioBuffer, ManifestEntry, load_wav, read_manifest, resample, synth_two_tone
from .framing import frame_signal, hamming_window
from .ldp import sdc_features
from .melspec import SpectrogramMatrix, log_mel
from .metrics import compute_eer

__version__ = "0.1.0"
