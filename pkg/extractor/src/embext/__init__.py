"""Audio to utterance-level embeddings with a frozen pretrained speech model."""

from .audio import load_audio, resample, to_float, to_mono
from .emb1 import manifest_entry, manifest_path_for, write_manifest, write_matrix
from .errors import AudioDecodeError, DataError, ModelLoadError
from .extract import (
    DEFAULT_MODEL,
    ExtractionResult,
    ExtractorConfig,
    embed_batch,
    frame_count,
    layer_tag,
    load_model,
    read_labels_csv,
    run_extraction,
)

__version__ = "0.1.0"

__all__ = [
    "AudioDecodeError",
    "DEFAULT_MODEL",
    "DataError",
    "ExtractionResult",
    "ExtractorConfig",
    "ModelLoadError",
    "embed_batch",
    "frame_count",
    "layer_tag",
    "load_audio",
    "load_model",
    "manifest_entry",
    "manifest_path_for",
    "read_labels_csv",
    "resample",
    "run_extraction",
    "to_float",
    "to_mono",
    "write_manifest",
    "write_matrix",
]
