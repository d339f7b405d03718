"""Pooled embeddings from a frozen pretrained speech model.

One output row per input audio file: the temporal mean of the chosen hidden
layer's frame features over the full, untrimmed signal. The model is never
fine-tuned and inference runs under no_grad.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .audio import load_audio
from .emb1 import manifest_entry, manifest_path_for, write_manifest, write_matrix
from .errors import AudioDecodeError, DataError, ModelLoadError

DEFAULT_MODEL = "facebook/wav2vec2-xls-r-2b"
TARGET_SAMPLE_RATE = 16000


@dataclass(frozen=True)
class ExtractorConfig:
    """Extraction settings.

    Parameters
    ----------
    model_id : str
        Model-hub name or local directory of a wav2vec2-family checkpoint.
    layer : str | int
        "last_hidden" for the top of the encoder stack, or an index into
        the hidden-state sequence (0 = output of the feature projection,
        before any transformer block).
    pooling : str
        Only "mean" is supported; the field exists so output manifests and
        configs stay explicit about what was pooled.
    sample_rate : int
        Rate every input is resampled to before the model. Fixed at 16 kHz,
        the rate this model family was trained at.
    batch_size : int
        Files per forward pass. Padding never leaks into pooled vectors
        (see embed_batch), so this is purely a throughput knob.
    """

    model_id: str = DEFAULT_MODEL
    layer: str | int = "last_hidden"
    pooling: str = "mean"
    sample_rate: int = TARGET_SAMPLE_RATE
    batch_size: int = 1

    def __post_init__(self):
        if self.pooling != "mean":
            raise DataError(f"pooling must be 'mean', got {self.pooling!r}")
        if self.sample_rate != TARGET_SAMPLE_RATE:
            raise DataError(f"sample_rate is fixed at {TARGET_SAMPLE_RATE}")
        if isinstance(self.layer, bool) or (
            not isinstance(self.layer, int) and self.layer != "last_hidden"
        ):
            raise DataError(f"layer must be 'last_hidden' or an index, got {self.layer!r}")
        if isinstance(self.layer, int) and self.layer < 0:
            raise DataError(f"layer index must be non-negative, got {self.layer}")
        if self.batch_size < 1:
            raise DataError(f"batch_size must be >= 1, got {self.batch_size}")


def layer_tag(layer) -> str:
    return layer if layer == "last_hidden" else f"layer{layer}"


def read_labels_csv(path) -> list[tuple[Path, str, str]]:
    """Parse a `path,label` CSV; relative paths resolve against the CSV's directory.

    Returns (resolved path, id string as written, label) per row.
    """
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read labels CSV: {exc}") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows or [c.strip() for c in rows[0]] != ["path", "label"]:
        raise DataError(f"{path}: first line must be the header 'path,label'")
    base = path.parent
    out = []
    seen = set()
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise DataError(f"{path}:{i}: expected 2 fields, got {len(row)}")
        raw, label = row[0].strip(), row[1].strip()
        if label not in ("bonafide", "spoof"):
            raise DataError(f"{path}:{i}: label must be bonafide or spoof, got {label!r}")
        if raw in seen:
            raise DataError(f"{path}:{i}: duplicate path {raw!r}")
        seen.add(raw)
        audio = Path(raw)
        out.append((audio if audio.is_absolute() else base / audio, raw, label))
    if not out:
        raise DataError(f"{path}: no data rows")
    return out


def load_model(model_id: str):
    from transformers import Wav2Vec2Model

    try:
        model = Wav2Vec2Model.from_pretrained(model_id)
    except Exception as exc:
        raise ModelLoadError(f"cannot load model {model_id!r}: {exc}") from None
    model.eval()
    return model


def frame_count(model_config, n_samples: int) -> int:
    """Frames the convolutional front end produces for n_samples of audio."""
    length = n_samples
    for kernel, stride in zip(model_config.conv_kernel, model_config.conv_stride):
        length = (length - kernel) // stride + 1
    return max(length, 0)


def _pick_layer(outputs, layer):
    if layer == "last_hidden":
        return outputs.last_hidden_state
    states = outputs.hidden_states
    if layer >= len(states):
        raise DataError(f"layer {layer} out of range; model exposes 0..{len(states) - 1}")
    return states[layer]


def embed_batch(model, signals: list[np.ndarray], layer="last_hidden") -> np.ndarray:
    """Mean-pooled features for each signal, one row per input.

    Signals are zero-padded to a common length for the forward pass. Each
    row is pooled over only the frames the file's true length produces, and
    the attention mask keeps padding out of the transformer, so batch
    composition does not change results beyond float rounding.
    """
    if not signals:
        raise DataError("empty batch")
    # time-wise feature normalization mixes padding into real frames, so
    # group-norm checkpoints only get singleton forwards
    if len(signals) > 1 and model.config.feat_extract_norm != "layer":
        rows = [embed_batch(model, [s], layer)[0] for s in signals]
        return np.stack(rows)
    lengths = [len(s) for s in signals]
    longest = max(lengths)
    batch = torch.zeros((len(signals), longest), dtype=torch.float32)
    mask = torch.zeros((len(signals), longest), dtype=torch.long)
    for i, s in enumerate(signals):
        batch[i, : len(s)] = torch.from_numpy(np.asarray(s, dtype=np.float32))
        mask[i, : len(s)] = 1
    kwargs = {"output_hidden_states": layer != "last_hidden"}
    if len(signals) > 1:
        kwargs["attention_mask"] = mask
    with torch.no_grad():
        outputs = model(batch, **kwargs)
    features = _pick_layer(outputs, layer)
    rows = []
    for i, n in enumerate(lengths):
        frames = frame_count(model.config, n)
        if frames < 1:
            raise AudioDecodeError(f"signal of {n} samples is too short for one frame")
        rows.append(features[i, :frames].mean(dim=0).numpy())
    return np.stack(rows).astype(np.float32)


@dataclass
class ExtractionResult:
    ids: list[str]
    labels: list[str]
    matrix: np.ndarray | None
    skipped: list[tuple[str, str]] = field(default_factory=list)


def run_extraction(labels_csv, out_path, config: ExtractorConfig) -> ExtractionResult:
    """Extract every decodable file listed in labels_csv into one EMB1 file.

    Undecodable or too-short files are recorded in result.skipped and left
    out of the output; callers decide how loudly to fail. Raises DataError
    when nothing at all could be extracted.
    """
    rows = read_labels_csv(labels_csv)
    model = load_model(config.model_id)
    out_path = Path(out_path)

    ids: list[str] = []
    labels: list[str] = []
    chunks: list[np.ndarray] = []
    skipped: list[tuple[str, str]] = []
    pending: list[tuple[np.ndarray, str, str]] = []

    def flush():
        if not pending:
            return
        vectors = embed_batch(model, [p[0] for p in pending], config.layer)
        for vector, (_, sample_id, label) in zip(vectors, pending):
            ids.append(sample_id)
            labels.append(label)
            chunks.append(vector)
        pending.clear()

    for audio_path, sample_id, label in rows:
        try:
            signal = load_audio(audio_path, target_rate=config.sample_rate)
            if frame_count(model.config, len(signal)) < 1:
                raise AudioDecodeError(
                    f"{audio_path}: {len(signal)} samples is too short for one frame"
                )
        except AudioDecodeError as exc:
            skipped.append((sample_id, str(exc)))
            continue
        pending.append((signal, sample_id, label))
        if len(pending) == config.batch_size:
            flush()
    flush()

    if not ids:
        raise DataError(f"no extractable audio among {len(rows)} listed files")

    matrix = np.stack(chunks)
    write_matrix(out_path, matrix)
    source = f"{config.model_id}:{layer_tag(config.layer)}"
    entries = [
        manifest_entry(sample_id, out_path.name, i, label, source)
        for i, (sample_id, label) in enumerate(zip(ids, labels))
    ]
    write_manifest(manifest_path_for(out_path), entries)
    return ExtractionResult(ids=ids, labels=labels, matrix=matrix, skipped=skipped)
