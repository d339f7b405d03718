"""Shared fixtures: a tiny randomly initialized speech model and WAV files.

Everything is generated locally; no network, no pretrained weights.
"""

import shutil

import numpy as np
import pytest
import torch
import transformers
from scipy.io import wavfile

transformers.utils.logging.set_verbosity_error()
transformers.utils.logging.disable_progress_bar()

HIDDEN = 32


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A miniature wav2vec2-style checkpoint saved to disk.

    Conv strides multiply to x20 downsampling, so one frame needs about
    40 samples; hidden width 32 keeps forwards instant.
    """
    from transformers import Wav2Vec2Config, Wav2Vec2Model

    config = Wav2Vec2Config(
        hidden_size=HIDDEN,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        conv_dim=(16, 16, 16),
        conv_kernel=(10, 3, 3),
        conv_stride=(5, 2, 2),
        num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=4,
        do_stable_layer_norm=True,
        feat_extract_norm="layer",
        apply_spec_augment=False,
        vocab_size=32,
    )
    torch.manual_seed(0)
    model = Wav2Vec2Model(config)
    out = tmp_path_factory.mktemp("tiny-model")
    model.save_pretrained(out)
    return str(out)


def tone_with_noise(seconds, rate, seed, freq=440.0):
    rng = np.random.default_rng(seed)
    t = np.arange(int(seconds * rate)) / rate
    signal = 0.4 * np.sin(2 * np.pi * freq * t) + 0.05 * rng.standard_normal(t.size)
    return (signal * 32767).clip(-32768, 32767).astype(np.int16)


@pytest.fixture(scope="session")
def wav_dir(tmp_path_factory):
    """Five extractable WAVs plus known-bad inputs, and labels CSVs for them."""
    root = tmp_path_factory.mktemp("audio")
    wavfile.write(root / "a.wav", 16000, tone_with_noise(1.0, 16000, seed=1))
    shutil.copyfile(root / "a.wav", root / "a_copy.wav")
    wavfile.write(root / "b.wav", 16000, tone_with_noise(0.7, 16000, seed=2, freq=220.0))
    wavfile.write(root / "c_8k.wav", 8000, tone_with_noise(0.5, 8000, seed=3, freq=330.0))

    long_pcm = tone_with_noise(1.5, 16000, seed=4, freq=550.0)
    wavfile.write(root / "d_long.wav", 16000, long_pcm)
    wavfile.write(root / "d_trunc.wav", 16000, long_pcm[: 16000 // 2])

    (root / "junk.wav").write_bytes(b"this is not audio at all")
    wavfile.write(root / "tiny.wav", 16000, tone_with_noise(30 / 16000, 16000, seed=5))

    (root / "labels.csv").write_text(
        "path,label\n"
        "a.wav,bonafide\n"
        "a_copy.wav,bonafide\n"
        "b.wav,spoof\n"
        "c_8k.wav,spoof\n"
        "d_long.wav,bonafide\n"
    )
    (root / "labels_with_junk.csv").write_text(
        "path,label\njunk.wav,spoof\na.wav,bonafide\n"
    )
    (root / "labels_too_short.csv").write_text(
        "path,label\ntiny.wav,spoof\nb.wav,spoof\n"
    )
    (root / "labels_all_bad.csv").write_text("path,label\njunk.wav,spoof\n")
    (root / "labels_trunc_pair.csv").write_text(
        "path,label\nd_long.wav,bonafide\nd_trunc.wav,bonafide\n"
    )
    return root


@pytest.fixture(scope="session")
def tiny_model(tiny_model_dir):
    from embext import load_model

    return load_model(tiny_model_dir)
