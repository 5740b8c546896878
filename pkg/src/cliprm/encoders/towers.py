"""Backends wrapping pretrained contrastive encoders (transformers / open_clip)."""
from __future__ import annotations

import copy

import numpy as np
import torch

from cliprm.encoders.registry import weights_cache_dir
from cliprm.errors import CapabilityError, RegistryError, WeightsUnavailableError


def _features(out):
    # transformers>=5 returns a model output whose pooler_output holds the projection
    if isinstance(out, torch.Tensor):
        return out
    return out.pooler_output


class ByteTokenizer:
    """Byte-level tokenizer for randomly initialised towers (no vocab files)."""

    def __init__(self, vocab_size, context_length):
        self.vocab_size = vocab_size
        self.context_length = context_length
        self.bos = vocab_size - 2
        self.eos = vocab_size - 1

    def ids(self, prompt):
        return [self.bos] + [1 + b % (self.vocab_size - 3) for b in prompt.encode("utf-8")] + [self.eos]

    def __call__(self, prompts):
        ids = np.zeros((len(prompts), self.context_length), dtype=np.int64)
        mask = np.zeros_like(ids)
        for i, p in enumerate(prompts):
            row = self.ids(p)[: self.context_length]
            ids[i, : len(row)] = row
            mask[i, : len(row)] = 1
        return torch.from_numpy(ids), torch.from_numpy(mask)


class TransformersBackend:
    def __init__(self, entry, devices):
        try:
            from transformers import CLIPConfig, CLIPModel
        except ImportError as exc:  # pragma: no cover
            raise CapabilityError("the 'transformers' package is required for this encoder") from exc
        self.context_length = int(entry.get("context_length", 77))
        if entry.get("weights"):
            cache = weights_cache_dir()
            try:
                from transformers import CLIPTokenizer

                model = CLIPModel.from_pretrained(entry["weights"], cache_dir=cache)
                self._hf_tok = CLIPTokenizer.from_pretrained(entry["weights"], cache_dir=cache)
            except (OSError, ValueError) as exc:
                raise WeightsUnavailableError(f"cannot load weights {entry['weights']!r}: {exc}") from exc
            self._byte_tok = None
        else:
            arch = entry["architecture"]
            res = int(entry["input_resolution"])
            text = dict(arch["text"], max_position_embeddings=self.context_length)
            text.update(eos_token_id=text["vocab_size"] - 1, bos_token_id=text["vocab_size"] - 2, pad_token_id=0)
            cfg = CLIPConfig(
                text_config=text,
                vision_config=dict(arch["vision"], image_size=res),
                projection_dim=int(entry["embed_dim"]),
            )
            torch.manual_seed(int(entry.get("seed", 0)))
            model = CLIPModel(cfg)
            self._hf_tok = None
            self._byte_tok = ByteTokenizer(text["vocab_size"], self.context_length)
        model.eval()
        self.embed_dim = int(model.config.projection_dim)
        if self.embed_dim != int(entry["embed_dim"]):
            raise RegistryError(
                f"registry embed_dim {entry['embed_dim']} disagrees with the model's {self.embed_dim}"
            )
        self.models = _replicate(model, devices)

    def token_count(self, prompt):
        if self._hf_tok is not None:
            return len(self._hf_tok(prompt)["input_ids"])
        return len(self._byte_tok.ids(prompt))

    @torch.no_grad()
    def text(self, prompts):
        dev = next(iter(self.models))
        model = self.models[dev]
        if self._hf_tok is not None:
            enc = self._hf_tok(list(prompts), padding=True, return_tensors="pt")
            ids, mask = enc["input_ids"], enc["attention_mask"]
        else:
            ids, mask = self._byte_tok(list(prompts))
        out = model.get_text_features(input_ids=ids.to(dev), attention_mask=mask.to(dev))
        return _features(out).double().cpu().numpy()

    @torch.no_grad()
    def images(self, pixels, device):
        model = self.models[device]
        out = model.get_image_features(pixel_values=torch.from_numpy(pixels).to(device))
        return _features(out).double().cpu().numpy()


class OpenClipBackend:
    def __init__(self, entry, devices):
        try:
            import open_clip
        except ImportError as exc:
            raise CapabilityError("install open_clip_torch to use open_clip registry entries") from exc
        arch, _, tag = str(entry["weights"]).partition(":")
        cache = weights_cache_dir()
        try:
            model = open_clip.create_model(arch, pretrained=tag or None, cache_dir=str(cache) if cache else None)
        except Exception as exc:  # open_clip raises a mix of RuntimeError/OSError/HF errors
            raise WeightsUnavailableError(f"cannot load open_clip weights {entry['weights']!r}: {exc}") from exc
        model.eval()
        self.tokenizer = open_clip.get_tokenizer(arch)
        self.context_length = int(entry.get("context_length", 77))
        self.embed_dim = int(entry["embed_dim"])
        self.models = _replicate(model, devices)

    def token_count(self, prompt):
        return len(self.tokenizer.encode(prompt)) + 2

    @torch.no_grad()
    def text(self, prompts):
        dev = next(iter(self.models))
        toks = self.tokenizer(list(prompts)).to(dev)
        return self.models[dev].encode_text(toks).double().cpu().numpy()

    @torch.no_grad()
    def images(self, pixels, device):
        x = torch.from_numpy(pixels).to(device)
        return self.models[device].encode_image(x).double().cpu().numpy()


def _replicate(model, devices):
    first = devices[0]
    models = {first: model.to(first)}
    for dev in devices[1:]:
        if dev not in models:
            models[dev] = copy.deepcopy(model).to(dev)
    return models
