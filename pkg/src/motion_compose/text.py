"""Word-level tokenization and the trainable per-token text encoder.

The tokenizer lowercases, keeps commas as standalone tokens (comma-joined
prompts rely on it), strips other punctuation, and splits on whitespace.
The encoder is an embedding table plus sinusoidal positions; a frozen flag
mirrors a frozen pretrained language model.
"""

from __future__ import annotations

import hashlib
import json
import re

import torch
from torch import nn

from .motion import write_json_atomic

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_ID = 0
UNK_ID = 1

_TOKEN_RE = re.compile(r"[a-z0-9']+|,")


class EmptyTextError(ValueError):
    pass


def tokenize_words(text: str) -> list[str]:
    """Normalized word list; commas survive as their own tokens."""
    if not text or not text.strip():
        raise EmptyTextError("prompt text is empty")
    words = _TOKEN_RE.findall(text.lower())
    if not words:
        raise EmptyTextError(f"no tokens in {text!r}")
    return words


class Vocabulary:
    """Token ids by list position; id 0 is PAD, id 1 is UNK."""

    def __init__(self, tokens: list[str]):
        if tokens[:2] != [PAD_TOKEN, UNK_TOKEN]:
            tokens = [PAD_TOKEN, UNK_TOKEN] + [t for t in tokens if t not in (PAD_TOKEN, UNK_TOKEN)]
        self.tokens = list(tokens)
        self._ids = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def build(cls, texts: list[str]) -> "Vocabulary":
        seen: dict[str, None] = {}
        for text in texts:
            for w in tokenize_words(text):
                seen.setdefault(w, None)
        return cls([PAD_TOKEN, UNK_TOKEN] + sorted(seen))

    def encode(self, text: str) -> list[int]:
        return [self._ids.get(w, UNK_ID) for w in tokenize_words(text)]

    def decode(self, ids: list[int]) -> str:
        return " ".join(self.tokens[i] for i in ids)

    def content_hash(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode()).hexdigest()[:16]

    def save(self, path: str) -> None:
        write_json_atomic(path, {"tokens": self.tokens})

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh)["tokens"])


def sinusoidal_positions(length: int, dim: int, dtype=torch.float32) -> torch.Tensor:
    """(length, dim) standard sin/cos positional table."""
    position = torch.arange(length, dtype=torch.float64).unsqueeze(1)
    div = torch.exp(torch.arange(0, dim, 2, dtype=torch.float64) * (-torch.log(torch.tensor(10000.0)) / dim))
    table = torch.zeros(length, dim, dtype=torch.float64)
    table[:, 0::2] = torch.sin(position * div)
    table[:, 1::2] = torch.cos(position * div[: table[:, 1::2].shape[1]])
    return table.to(dtype)


class TextEncoder(nn.Module):
    """Embedding table + sinusoidal positions, one feature row per token."""

    def __init__(self, vocab_size: int, d_model: int = 256, frozen: bool = False):
        super().__init__()
        self.d_model = d_model
        self.embedding = nn.Embedding(vocab_size, d_model, padding_idx=PAD_ID)
        self.frozen = frozen
        if frozen:
            self.embedding.weight.requires_grad_(False)

    def forward(self, token_ids: torch.Tensor) -> torch.Tensor:
        """(..., N) int ids -> (..., N, d_model) features."""
        feats = self.embedding(token_ids)
        pe = sinusoidal_positions(token_ids.shape[-1], self.d_model, dtype=feats.dtype)
        return feats + pe.to(feats.device)


def pad_token_batch(token_lists: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    """Stack variable-length id lists; returns (ids (B, N), padding mask (B, N)).

    Mask is True at padded positions, matching torch's key_padding_mask.
    """
    n = max(len(t) for t in token_lists)
    ids = torch.full((len(token_lists), n), PAD_ID, dtype=torch.long)
    mask = torch.ones((len(token_lists), n), dtype=torch.bool)
    for i, toks in enumerate(token_lists):
        ids[i, : len(toks)] = torch.tensor(toks, dtype=torch.long)
        mask[i, : len(toks)] = False
    return ids, mask
