"""Transposition-invariant repeating patterns (SIA, P2) as features for genre classification."""

from .midi import MidiError, MidiHeader, NotePoint, TrackPointSet, parse_midi, read_midi_file, read_vlq
from .patterns import (PatternInstance, PatternKey, TranslationVector, canonical_key,
                       parse_key, serialize_key, to_common_resolution)
from .sia import SIA_PRESETS, SiaConfig, compactness, sia_extract, sia_mtps, temporal_density
from .p2 import P2_PRESETS, P2Config, p2_extract, p2_matches, segment_windows

__version__ = "0.1.0"
