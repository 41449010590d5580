import numpy as np
import pytest

from mthd.adaptation import (
    AdaptationConfig,
    ValidatedSample,
    adapt,
    append_validated,
    checkpoint_bytes,
    fnv1a64,
    load_checkpoint,
    read_log,
    replay_log,
    save_checkpoint,
)
from mthd.errors import (
    CheckpointFormatError,
    DivergenceError,
    SampleError,
    UnsupportedVersionError,
)
from mthd.seq2seq import ModelConfig
from mthd.seq2seq.model import init_model
from mthd.textdata import build_vocab
from mthd.decoding import greedy_decode
from mthd.textdata import tokenize


def toy_bundle(seed=0, hidden=16, embed=8):
    texts = ["vna casa", "una vida", "el canto"]
    sv = build_vocab(texts, "char")
    tv = build_vocab(texts, "char")
    cfg = ModelConfig(
        vocab_size_src=len(sv), vocab_size_tgt=len(tv),
        embed_dim=embed, hidden_dim=hidden, mode="char", seed=seed,
    )
    return init_model(cfg), sv, tv


class TestAdapt:
    def test_zero_steps_is_bit_exact_noop(self):
        model, sv, tv = toy_bundle()
        before = model.copy_values()
        report = adapt(model, sv, tv, ValidatedSample("vna casa", "una casa", "normalize"),
                       AdaptationConfig(steps=0))
        assert report.steps == 0
        assert len(report.losses) == 1
        for pid, arr in before.items():
            assert (model.params[pid].value.data == arr).all()

    def test_loss_decreases_one_step(self):
        for seed in range(20):
            model, sv, tv = toy_bundle(seed=seed)
            report = adapt(
                model, sv, tv, ValidatedSample("vna casa", "una casa", "normalize"),
                AdaptationConfig(steps=1, learning_rate=0.01),
            )
            assert len(report.losses) == 2
            assert report.losses[1] < report.losses[0], f"seed {seed}"

    def test_repeated_adaptation_overfits_single_pair(self):
        model, sv, tv = toy_bundle(seed=3, hidden=32)
        sample = ValidatedSample("vna casa", "una casa", "normalize")
        src_ids = tokenize("vna casa", sv)
        for _ in range(25):
            adapt(model, sv, tv, sample, AdaptationConfig(steps=3, learning_rate=0.3))
        hyp = greedy_decode(model, src_ids, max_len=30, vocab=tv)
        assert hyp.text == "una casa"

    def test_empty_sample_rejected(self):
        with pytest.raises(SampleError):
            ValidatedSample("", "x", "normalize")

    def test_divergence_restores_parameters(self):
        model, sv, tv = toy_bundle(seed=1)
        before = model.copy_values()
        with pytest.raises(DivergenceError):
            adapt(
                model, sv, tv, ValidatedSample("vna casa", "una casa", "normalize"),
                AdaptationConfig(steps=3, learning_rate=1e18),
            )
        for pid, arr in before.items():
            assert (model.params[pid].value.data == arr).all()
        for p in model.param_list():
            assert (p.gradient == 0).all()

    def test_adaptation_deterministic(self):
        outs = []
        for _ in range(2):
            model, sv, tv = toy_bundle(seed=7)
            adapt(model, sv, tv, ValidatedSample("la vida", "la vida", "normalize"),
                  AdaptationConfig(steps=2, learning_rate=0.05))
            outs.append(model.copy_values())
        for pid in outs[0]:
            assert (outs[0][pid] == outs[1][pid]).all()

    def test_config_validation(self):
        from mthd.errors import ConfigError

        with pytest.raises(ConfigError):
            AdaptationConfig(steps=-1)
        with pytest.raises(ConfigError):
            AdaptationConfig(learning_rate=0.0)


class TestCheckpoint:
    def test_roundtrip_bit_exact(self, tmp_path):
        model, sv, tv = toy_bundle(seed=5)
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, sv, tv, path)
        loaded, sv2, tv2 = load_checkpoint(path)
        assert loaded.config == model.config
        assert sv2.mode == sv.mode and sv2.content_tokens() == sv.content_tokens()
        assert tv2.content_tokens() == tv.content_tokens()
        for pid in model.params:
            assert (loaded.params[pid].value.data == model.params[pid].value.data).all()

    def test_corrupted_magic_rejected(self, tmp_path):
        model, sv, tv = toy_bundle()
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, sv, tv, path)
        data = bytearray(path.read_bytes())
        data[:4] = b"JUNK"
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(path)

    def test_version_mismatch_rejected(self, tmp_path):
        model, sv, tv = toy_bundle()
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, sv, tv, path)
        data = bytearray(path.read_bytes())
        data[4] = 9
        path.write_bytes(bytes(data))
        with pytest.raises(UnsupportedVersionError):
            load_checkpoint(path)

    def test_truncated_rejected(self, tmp_path):
        model, sv, tv = toy_bundle()
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, sv, tv, path)
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(path)

    def test_failed_save_leaves_no_partial_file(self, tmp_path):
        model, sv, tv = toy_bundle()
        target = tmp_path / "sub" / "m.ckpt"  # parent dir missing
        with pytest.raises(Exception):
            save_checkpoint(model, sv, tv, target)
        assert not target.exists()

    def test_fnv1a64_known_vectors(self):
        # published FNV-1a test vectors
        assert fnv1a64(b"") == 0xCBF29CE484222325
        assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
        assert fnv1a64(b"foobar") == 0x85944171F73967E8


class TestValidatedLog:
    def test_append_preserves_order(self, tmp_path):
        log = tmp_path / "samples.jsonl"
        for i in range(5):
            append_validated(
                ValidatedSample(f"s{i}", f"t{i}", "normalize"), log, learned=i % 2 == 0
            )
        records = read_log(log)
        assert [r["source"] for r in records] == [f"s{i}" for i in range(5)]
        assert [r["learned"] for r in records] == [True, False, True, False, True]

    def test_replay_reproduces_served_model(self, tmp_path):
        log = tmp_path / "samples.jsonl"
        ckpt = tmp_path / "base.ckpt"
        served, sv, tv = toy_bundle(seed=11)
        save_checkpoint(served, sv, tv, ckpt)
        cfg = AdaptationConfig(steps=2, learning_rate=0.05)
        samples = [
            ValidatedSample("vna casa", "una casa", "normalize"),
            ValidatedSample("la vida", "la vida", "normalize"),
            ValidatedSample("el canto", "el canto", "normalize"),
        ]
        for i, s in enumerate(samples):
            learned = i != 1
            if learned:
                adapt(served, sv, tv, s, cfg)
            append_validated(s, log, learned=learned)

        fresh, sv2, tv2 = load_checkpoint(ckpt)
        applied = replay_log(fresh, sv2, tv2, log, cfg)
        assert applied == 2
        assert fnv1a64(checkpoint_bytes(fresh, sv2, tv2)) == fnv1a64(
            checkpoint_bytes(served, sv, tv)
        )

    def test_empty_log_replay_keeps_model(self, tmp_path):
        model, sv, tv = toy_bundle(seed=2)
        before = checkpoint_bytes(model, sv, tv)
        applied = replay_log(model, sv, tv, tmp_path / "missing.jsonl")
        assert applied == 0
        assert checkpoint_bytes(model, sv, tv) == before
