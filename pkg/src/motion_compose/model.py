"""Past-conditioned transformer VAE for text-to-motion generation.

One network generates a whole action non-autoregressively from a latent
vector; sequences of actions are produced recursively, conditioning each
action's encoder on the last P frames of the previously generated one.
The encoder consumes [mu_token, sigma_token, past frames, SEP, text tokens]
and emits diagonal-Gaussian parameters; the decoder expands a sampled latent
through sinusoidal positional queries into per-frame pose features.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn.functional as F_torch
from torch import nn

from .motion import FeatureStats, Motion, features_to_motion, motion_features
from .skeleton import Skeleton
from .text import TextEncoder, Vocabulary, pad_token_batch, sinusoidal_positions

CHECKPOINT_VERSION = 1


class TrainingDivergedError(RuntimeError):
    pass


class CheckpointError(RuntimeError):
    pass


@dataclass
class ModelConfig:
    layers: int = 6
    # 4 heads: the 256-dim latent must divide evenly across heads, which the
    # cited 6-head setting only satisfies at pretrained-language-model widths
    heads: int = 4
    dropout: float = 0.1
    feedforward: int = 1024
    latent_dim: int = 256
    past_frames: int = 5
    lambda_kl: float = 1e-5
    lambda_latent: float = 1e-5
    grad_clip: float = 1.0
    learning_rate: float = 1e-4
    batch_size: int = 32
    weight_decay: float = 1e-4
    feature_dim: int = 135  # 22 joints * 6 + root xyz
    fps: float = 30.0
    frozen_text_encoder: bool = False

    def __post_init__(self):
        if self.latent_dim % self.heads != 0:
            raise ValueError("latent_dim must be divisible by heads")
        if self.past_frames < 0:
            raise ValueError("past_frames must be >= 0")

    @classmethod
    def downsized(cls, **overrides) -> "ModelConfig":
        """Tiny configuration for gradient checks and overfit smoke tests."""
        base = dict(layers=2, heads=2, dropout=0.0, feedforward=64, latent_dim=32)
        base.update(overrides)
        return cls(**base)


@dataclass
class LatentDistribution:
    """Diagonal Gaussian over the latent space; sigma strictly positive."""

    mu: torch.Tensor  # (B, latent)
    sigma: torch.Tensor


def sample_latent(
    dist: LatentDistribution,
    deterministic: bool = False,
    generator: torch.Generator | None = None,
) -> torch.Tensor:
    """Reparameterized sample z = mu + sigma * eps; deterministic mode returns mu."""
    if deterministic:
        return dist.mu
    eps = torch.randn(
        dist.mu.shape, generator=generator, dtype=dist.mu.dtype, device=dist.mu.device
    )
    return dist.mu + dist.sigma * eps


def _add_positions(x: torch.Tensor) -> torch.Tensor:
    pe = sinusoidal_positions(x.shape[1], x.shape[2], dtype=x.dtype)
    return x + pe.to(x.device)


class PastEncoder(nn.Module):
    """Transformer over the trailing frames of the previous action."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        d = cfg.latent_dim
        self.input_proj = nn.Linear(cfg.feature_dim, d)
        layer = nn.TransformerEncoderLayer(
            d, cfg.heads, cfg.feedforward, cfg.dropout, batch_first=True, norm_first=True
        )
        self.encoder = nn.TransformerEncoder(layer, cfg.layers, enable_nested_tensor=False)

    def forward(self, past: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """(B, P, feature_dim) + padding mask -> (B, P, d); empty P passes through."""
        if past.shape[1] == 0:
            return past.new_zeros(past.shape[0], 0, self.input_proj.out_features)
        x = _add_positions(self.input_proj(past))
        out = self.encoder(x, src_key_padding_mask=mask)
        # fully-masked rows (items with no past in a mixed batch) produce NaNs
        return out.masked_fill(mask.unsqueeze(-1), 0.0)


class PastConditionedTextEncoder(nn.Module):
    """Joint encoder over past-motion features and text features.

    Input layout: [mu_token, sigma_token, past..., SEP, text...]. The outputs
    at the two leading token positions become the distribution parameters.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        d = cfg.latent_dim
        self.mu_token = nn.Parameter(torch.randn(d) * 0.02)
        self.sigma_token = nn.Parameter(torch.randn(d) * 0.02)
        self.sep_token = nn.Parameter(torch.randn(d) * 0.02)
        layer = nn.TransformerEncoderLayer(
            d, cfg.heads, cfg.feedforward, cfg.dropout, batch_first=True, norm_first=True
        )
        self.encoder = nn.TransformerEncoder(layer, cfg.layers, enable_nested_tensor=False)

    def forward(self, text_feats, text_mask, past_feats, past_mask):
        B = text_feats.shape[0]
        dtype = text_feats.dtype

        def tile(tok):
            return tok.to(dtype).view(1, 1, -1).expand(B, 1, -1)

        seq = torch.cat([tile(self.mu_token), tile(self.sigma_token), past_feats, tile(self.sep_token), text_feats], dim=1)
        seq = _add_positions(seq)
        keep = torch.zeros(B, 1, dtype=torch.bool, device=seq.device)
        mask = torch.cat([keep, keep, past_mask, keep, text_mask], dim=1)
        out = self.encoder(seq, src_key_padding_mask=mask)
        return out[:, 0], out[:, 1]


class MotionEncoder(nn.Module):
    """Same structure over ground-truth motion features, with its own tokens."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        d = cfg.latent_dim
        self.mu_token = nn.Parameter(torch.randn(d) * 0.02)
        self.sigma_token = nn.Parameter(torch.randn(d) * 0.02)
        self.input_proj = nn.Linear(cfg.feature_dim, d)
        layer = nn.TransformerEncoderLayer(
            d, cfg.heads, cfg.feedforward, cfg.dropout, batch_first=True, norm_first=True
        )
        self.encoder = nn.TransformerEncoder(layer, cfg.layers, enable_nested_tensor=False)

    def forward(self, feats, mask):
        B = feats.shape[0]
        x = self.input_proj(feats)
        tokens = torch.stack([self.mu_token, self.sigma_token]).to(x.dtype).unsqueeze(0).expand(B, -1, -1)
        seq = _add_positions(torch.cat([tokens, x], dim=1))
        full_mask = torch.cat([torch.zeros(B, 2, dtype=torch.bool, device=x.device), mask], dim=1)
        out = self.encoder(seq, src_key_padding_mask=full_mask)
        return out[:, 0], out[:, 1]


class MotionDecoder(nn.Module):
    """Latent vector + F sinusoidal positional queries -> F pose features."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        d = cfg.latent_dim
        layer = nn.TransformerDecoderLayer(
            d, cfg.heads, cfg.feedforward, cfg.dropout, batch_first=True, norm_first=True
        )
        self.decoder = nn.TransformerDecoder(layer, cfg.layers)
        self.output_proj = nn.Linear(d, cfg.feature_dim)

    def forward(self, z: torch.Tensor, num_frames: int, frame_mask: torch.Tensor | None = None):
        if num_frames < 1:
            raise ValueError("decoder needs at least one frame")
        B, d = z.shape
        queries = sinusoidal_positions(num_frames, d, dtype=z.dtype).to(z.device)
        queries = queries.unsqueeze(0).expand(B, -1, -1)
        memory = z.unsqueeze(1)
        out = self.decoder(queries, memory, tgt_key_padding_mask=frame_mask)
        return self.output_proj(out)


class PastConditionedVae(nn.Module):
    def __init__(self, config: ModelConfig, vocab_size: int):
        super().__init__()
        self.config = config
        self.text_encoder = TextEncoder(
            vocab_size, config.latent_dim, frozen=config.frozen_text_encoder
        )
        self.past_encoder = PastEncoder(config)
        self.seq_encoder = PastConditionedTextEncoder(config)
        self.motion_encoder = MotionEncoder(config)
        self.decoder = MotionDecoder(config)

    def empty_past(self, batch: int, dtype=None, device=None) -> tuple[torch.Tensor, torch.Tensor]:
        dtype = dtype or next(self.parameters()).dtype
        past = torch.zeros(batch, 0, self.config.feature_dim, dtype=dtype, device=device)
        return past, torch.zeros(batch, 0, dtype=torch.bool, device=device)

    def encode_distribution(self, token_ids, token_mask, past_feats, past_mask) -> LatentDistribution:
        text_feats = self.text_encoder(token_ids)
        past = self.past_encoder(past_feats, past_mask)
        mu, sigma_raw = self.seq_encoder(text_feats, token_mask, past, past_mask)
        return LatentDistribution(mu, F_torch.softplus(sigma_raw) + 1e-8)

    def motion_encode(self, feats, mask=None) -> LatentDistribution:
        if mask is None:
            mask = torch.zeros(feats.shape[:2], dtype=torch.bool, device=feats.device)
        mu, sigma_raw = self.motion_encoder(feats, mask)
        return LatentDistribution(mu, F_torch.softplus(sigma_raw) + 1e-8)

    def decode(self, z, num_frames: int, frame_mask=None) -> torch.Tensor:
        return self.decoder(z, num_frames, frame_mask)


# ---------------------------------------------------------------------------
# Losses


def smooth_l1(pred: torch.Tensor, target: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    """Smooth L1 (beta=1) averaged over unmasked elements."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    per_elem = F_torch.smooth_l1_loss(pred, target, reduction="none", beta=1.0)
    if mask is None:
        return per_elem.mean()
    valid = (~mask).to(per_elem.dtype)
    denom = valid.sum() * pred.shape[-1]
    return (per_elem * valid.unsqueeze(-1)).sum() / denom


def reconstruction_loss(gt1, gen1, gt2, gen2, mask1=None, mask2=None) -> torch.Tensor:
    """Sum of per-segment smooth-L1 terms over the two pair members."""
    return smooth_l1(gen1, gt1, mask1) + smooth_l1(gen2, gt2, mask2)


def kl_divergence(
    q: LatentDistribution, p: LatentDistribution | None = None
) -> torch.Tensor:
    """Closed-form diagonal-Gaussian KL(q || p), summed over the latent dim.

    p=None means the standard-normal prior. Returns the batch mean.
    """
    if torch.any(q.sigma <= 0) or (p is not None and torch.any(p.sigma <= 0)):
        raise ValueError("sigma must be strictly positive")
    if p is None:
        per_dim = 0.5 * (q.sigma**2 + q.mu**2 - 1.0) - torch.log(q.sigma)
    else:
        var_ratio = (q.sigma / p.sigma) ** 2
        per_dim = 0.5 * (var_ratio + ((q.mu - p.mu) / p.sigma) ** 2 - 1.0) + torch.log(
            p.sigma / q.sigma
        )
    return per_dim.sum(dim=-1).mean()


def kl_loss_terms(
    phi1: LatentDistribution,
    phi2: LatentDistribution,
    phi_m1: LatentDistribution | None = None,
    phi_m2: LatentDistribution | None = None,
) -> dict[str, torch.Tensor]:
    """Prior terms KL(phi_i, psi) plus the cross-modal motion-encoder terms."""
    prior = kl_divergence(phi1) + kl_divergence(phi2)
    cross = phi1.mu.new_zeros(())
    for phi_t, phi_m in ((phi1, phi_m1), (phi2, phi_m2)):
        if phi_m is None:
            continue
        cross = cross + kl_divergence(phi_t, phi_m) + kl_divergence(phi_m, phi_t) + kl_divergence(phi_m)
    return {"prior": prior, "cross": cross}


def kl_losses(phi1, phi2, phi_m1=None, phi_m2=None) -> torch.Tensor:
    terms = kl_loss_terms(phi1, phi2, phi_m1, phi_m2)
    return terms["prior"] + terms["cross"]


def latent_l1(z_a: torch.Tensor, z_b: torch.Tensor) -> torch.Tensor:
    if z_a.shape != z_b.shape:
        raise ValueError(f"shape mismatch {z_a.shape} vs {z_b.shape}")
    return (z_a - z_b).abs().mean()


# ---------------------------------------------------------------------------
# Batch collation


@dataclass
class PairBatch:
    tokens_1: torch.Tensor
    token_mask_1: torch.Tensor
    tokens_2: torch.Tensor
    token_mask_2: torch.Tensor
    feats_1: torch.Tensor  # (B, F1max, D) standardized
    frame_mask_1: torch.Tensor
    feats_2: torch.Tensor
    frame_mask_2: torch.Tensor
    lengths_1: torch.Tensor
    lengths_2: torch.Tensor


def _pad_features(motions, stats: FeatureStats, dtype) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    lengths = torch.tensor([m.num_frames for m in motions], dtype=torch.long)
    fmax = int(lengths.max())
    B = len(motions)
    D = stats.mean.shape[0]
    feats = torch.zeros(B, fmax, D, dtype=dtype)
    mask = torch.ones(B, fmax, dtype=torch.bool)
    for i, m in enumerate(motions):
        x = stats.apply(motion_features(m))
        feats[i, : x.shape[0]] = torch.as_tensor(x, dtype=dtype)
        mask[i, : x.shape[0]] = False
    return feats, mask, lengths


def collate_pairs(pairs, stats: FeatureStats, vocab: Vocabulary, dtype=torch.float32) -> PairBatch:
    tokens_1, token_mask_1 = pad_token_batch([vocab.encode(p.text_1) for p in pairs])
    tokens_2, token_mask_2 = pad_token_batch([vocab.encode(p.text_2) for p in pairs])
    feats_1, frame_mask_1, lengths_1 = _pad_features([p.motion_1 for p in pairs], stats, dtype)
    feats_2, frame_mask_2, lengths_2 = _pad_features([p.motion_2 for p in pairs], stats, dtype)
    return PairBatch(
        tokens_1, token_mask_1, tokens_2, token_mask_2,
        feats_1, frame_mask_1, feats_2, frame_mask_2, lengths_1, lengths_2,
    )


def trailing_window(feats: torch.Tensor, lengths: torch.Tensor, window: int) -> tuple[torch.Tensor, torch.Tensor]:
    """Last `window` valid frames per item, gathered with gradient flow.

    Items shorter than the window keep all their frames; the remainder is
    padding (mask True).
    """
    B, _, D = feats.shape
    if window == 0:
        return feats.new_zeros(B, 0, D), torch.zeros(B, 0, dtype=torch.bool, device=feats.device)
    take = torch.minimum(lengths, torch.full_like(lengths, window))
    idx = torch.zeros(B, window, dtype=torch.long, device=feats.device)
    mask = torch.ones(B, window, dtype=torch.bool, device=feats.device)
    for i in range(B):
        t = int(take[i])
        idx[i, :t] = torch.arange(int(lengths[i]) - t, int(lengths[i]), device=feats.device)
        mask[i, :t] = False
    gathered = torch.gather(feats, 1, idx.unsqueeze(-1).expand(B, window, D))
    return gathered.masked_fill(mask.unsqueeze(-1), 0.0), mask


# ---------------------------------------------------------------------------
# Training steps


def make_optimizer(model: PastConditionedVae) -> torch.optim.Optimizer:
    cfg = model.config
    return torch.optim.AdamW(
        model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.weight_decay
    )


def _check_finite(report: dict[str, float]) -> None:
    if not all(np.isfinite(v) for v in report.values()):
        raise TrainingDivergedError(f"non-finite loss components: {report}")


def pair_loss(
    model: PastConditionedVae, batch: PairBatch, past_source: str = "generated"
) -> tuple[torch.Tensor, dict[str, float]]:
    """Two-pass loss over a pair batch.

    Pass 1 generates the first segment from text alone; pass 2 conditions on
    the trailing frames of the *generated* first segment (or ground truth
    when past_source="ground_truth") and generates the second. Gradients flow
    through the generated past into both passes.
    """
    if past_source not in ("generated", "ground_truth"):
        raise ValueError(f"unknown past_source {past_source!r}")
    cfg = model.config

    empty_past, empty_mask = model.empty_past(batch.feats_1.shape[0], dtype=batch.feats_1.dtype)
    dist1 = model.encode_distribution(batch.tokens_1, batch.token_mask_1, empty_past, empty_mask)
    z1 = sample_latent(dist1)
    gen1 = model.decode(z1, batch.feats_1.shape[1], batch.frame_mask_1)

    past_src = gen1 if past_source == "generated" else batch.feats_1
    past, past_mask = trailing_window(past_src, batch.lengths_1, cfg.past_frames)
    dist2 = model.encode_distribution(batch.tokens_2, batch.token_mask_2, past, past_mask)
    z2 = sample_latent(dist2)
    gen2 = model.decode(z2, batch.feats_2.shape[1], batch.frame_mask_2)

    dist_m1 = model.motion_encode(batch.feats_1, batch.frame_mask_1)
    dist_m2 = model.motion_encode(batch.feats_2, batch.frame_mask_2)
    z_m1 = sample_latent(dist_m1)
    z_m2 = sample_latent(dist_m2)

    recon = reconstruction_loss(
        batch.feats_1, gen1, batch.feats_2, gen2, batch.frame_mask_1, batch.frame_mask_2
    )
    kl = kl_loss_terms(dist1, dist2, dist_m1, dist_m2)
    lat = latent_l1(z1, z_m1) + latent_l1(z2, z_m2)
    total = recon + cfg.lambda_kl * (kl["prior"] + kl["cross"]) + cfg.lambda_latent * lat

    report = {
        "total": float(total.detach()),
        "recon": float(recon.detach()),
        "kl": float(kl["prior"].detach()),
        "cross_kl": float(kl["cross"].detach()),
        "latent_l1": float(lat.detach()),
    }
    return total, report


def training_step(
    model: PastConditionedVae,
    batch: PairBatch,
    optimizer: torch.optim.Optimizer,
    seed: int | None = None,
    past_source: str = "generated",
) -> dict[str, float]:
    """One pair-batch iteration: two forward passes, one optimizer update."""
    if seed is not None:
        torch.manual_seed(seed)
    model.train()
    total, report = pair_loss(model, batch, past_source)
    _check_finite(report)
    optimizer.zero_grad()
    total.backward()
    if model.config.grad_clip > 0:
        torch.nn.utils.clip_grad_norm_(model.parameters(), model.config.grad_clip)
    optimizer.step()
    return report


@dataclass
class SingleBatch:
    tokens: torch.Tensor
    token_mask: torch.Tensor
    feats: torch.Tensor
    frame_mask: torch.Tensor
    lengths: torch.Tensor


def collate_singles(samples, stats: FeatureStats, vocab: Vocabulary, dtype=torch.float32) -> SingleBatch:
    tokens, token_mask = pad_token_batch([vocab.encode(s.text) for s in samples])
    feats, frame_mask, lengths = _pad_features([s.motion for s in samples], stats, dtype)
    return SingleBatch(tokens, token_mask, feats, frame_mask, lengths)


def collate_joint(pairs, stats: FeatureStats, vocab: Vocabulary, dtype=torch.float32) -> SingleBatch:
    """Pairs as single items: comma-joined text over the concatenated motion."""
    from .dataset import ActionSample, concat_motions

    samples = [
        ActionSample(motion=concat_motions(p.motion_1, p.motion_2), text=f"{p.text_1}, {p.text_2}")
        for p in pairs
    ]
    return collate_singles(samples, stats, vocab, dtype)


def single_loss(model: PastConditionedVae, batch: SingleBatch) -> tuple[torch.Tensor, dict[str, float]]:
    """One-segment loss (independent / joint baselines): no past conditioning."""
    cfg = model.config
    empty_past, empty_mask = model.empty_past(batch.feats.shape[0], dtype=batch.feats.dtype)
    dist = model.encode_distribution(batch.tokens, batch.token_mask, empty_past, empty_mask)
    z = sample_latent(dist)
    gen = model.decode(z, batch.feats.shape[1], batch.frame_mask)

    dist_m = model.motion_encode(batch.feats, batch.frame_mask)
    z_m = sample_latent(dist_m)

    recon = smooth_l1(gen, batch.feats, batch.frame_mask)
    prior = kl_divergence(dist)
    cross = kl_divergence(dist, dist_m) + kl_divergence(dist_m, dist) + kl_divergence(dist_m)
    lat = latent_l1(z, z_m)
    total = recon + cfg.lambda_kl * (prior + cross) + cfg.lambda_latent * lat

    report = {
        "total": float(total.detach()),
        "recon": float(recon.detach()),
        "kl": float(prior.detach()),
        "cross_kl": float(cross.detach()),
        "latent_l1": float(lat.detach()),
    }
    return total, report


def training_step_single(
    model: PastConditionedVae,
    batch: SingleBatch,
    optimizer: torch.optim.Optimizer,
    seed: int | None = None,
) -> dict[str, float]:
    if seed is not None:
        torch.manual_seed(seed)
    model.train()
    total, report = single_loss(model, batch)
    _check_finite(report)
    optimizer.zero_grad()
    total.backward()
    if model.config.grad_clip > 0:
        torch.nn.utils.clip_grad_norm_(model.parameters(), model.config.grad_clip)
    optimizer.step()
    return report


# ---------------------------------------------------------------------------
# Inference


class SequenceGenerator:
    """Frozen model plus the vocabulary/stats/skeleton needed to emit Motions."""

    def __init__(self, model: PastConditionedVae, vocab: Vocabulary, stats: FeatureStats, skeleton: Skeleton):
        self.model = model
        self.vocab = vocab
        self.stats = stats
        self.skeleton = skeleton
        self.fps = model.config.fps

    def generate_sequence(
        self,
        prompts: list[tuple[str, float]],
        past_frames: int | None = None,
        mode: str = "deterministic",
        seed: int | None = None,
    ) -> list[Motion]:
        """One Motion per prompt; each action conditions on its predecessor's tail.

        The first action runs with past conditioning disabled. Frame counts
        are round(duration * fps). Deterministic mode decodes the mean latent.
        """
        if not prompts:
            raise ValueError("need at least one prompt")
        if mode not in ("deterministic", "stochastic"):
            raise ValueError(f"unknown mode {mode!r}")
        P = self.model.config.past_frames if past_frames is None else past_frames
        generator = None
        if mode == "stochastic":
            generator = torch.Generator()
            generator.manual_seed(0 if seed is None else int(seed))

        self.model.eval()
        dtype = next(self.model.parameters()).dtype
        motions: list[Motion] = []
        prev_feats: torch.Tensor | None = None
        with torch.no_grad():
            for text, duration_s in prompts:
                if duration_s <= 0:
                    raise ValueError("durations must be positive")
                num_frames = max(1, int(round(duration_s * self.fps)))
                tokens, token_mask = pad_token_batch([self.vocab.encode(text)])
                if prev_feats is None or P == 0:
                    past, past_mask = self.model.empty_past(1, dtype=dtype)
                else:
                    window = prev_feats[:, -min(P, prev_feats.shape[1]) :]
                    past = window
                    past_mask = torch.zeros(1, past.shape[1], dtype=torch.bool)
                dist = self.model.encode_distribution(tokens, token_mask, past, past_mask)
                z = sample_latent(dist, deterministic=(mode == "deterministic"), generator=generator)
                feats = self.model.decode(z, num_frames)
                motions.append(self._to_motion(feats[0]))
                prev_feats = feats
        return motions

    def generate_single(self, text: str, duration_s: float, mode="deterministic", seed=None) -> Motion:
        """One action with past conditioning disabled (independent-style)."""
        return self.generate_sequence([(text, duration_s)], past_frames=0, mode=mode, seed=seed)[0]

    def generate_next(
        self,
        text: str,
        duration_s: float,
        past_motion: Motion | None = None,
        past_frames: int | None = None,
        mode: str = "deterministic",
        seed: int | None = None,
    ) -> Motion:
        """One action conditioned on the trailing frames of an existing motion."""
        if duration_s <= 0:
            raise ValueError("durations must be positive")
        if mode not in ("deterministic", "stochastic"):
            raise ValueError(f"unknown mode {mode!r}")
        P = self.model.config.past_frames if past_frames is None else past_frames
        generator = None
        if mode == "stochastic":
            generator = torch.Generator()
            generator.manual_seed(0 if seed is None else int(seed))
        self.model.eval()
        dtype = next(self.model.parameters()).dtype
        with torch.no_grad():
            num_frames = max(1, int(round(duration_s * self.fps)))
            tokens, token_mask = pad_token_batch([self.vocab.encode(text)])
            if past_motion is None or P == 0:
                past, past_mask = self.model.empty_past(1, dtype=dtype)
            else:
                feats = self.stats.apply(motion_features(past_motion))[-P:]
                past = torch.as_tensor(feats, dtype=dtype).unsqueeze(0)
                past_mask = torch.zeros(1, past.shape[1], dtype=torch.bool)
            dist = self.model.encode_distribution(tokens, token_mask, past, past_mask)
            z = sample_latent(dist, deterministic=(mode == "deterministic"), generator=generator)
            feats = self.model.decode(z, num_frames)
        return self._to_motion(feats[0])

    def generate_joint(self, texts: list[str], total_duration_s: float, mode="deterministic", seed=None) -> Motion:
        """Single decode of the comma-joined prompt over the combined duration."""
        joined = ", ".join(texts)
        return self.generate_sequence([(joined, total_duration_s)], past_frames=0, mode=mode, seed=seed)[0]

    def _to_motion(self, feats: torch.Tensor) -> Motion:
        raw = self.stats.invert(feats.detach().cpu().double().numpy())
        return features_to_motion(raw, self.fps, self.skeleton)


# ---------------------------------------------------------------------------
# Checkpoints


def save_checkpoint(
    path: str,
    model: PastConditionedVae,
    vocab: Vocabulary,
    stats: FeatureStats,
    skeleton: Skeleton,
    optimizer: torch.optim.Optimizer | None = None,
    epoch: int = 0,
    extra: dict | None = None,
) -> None:
    payload = {
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "vocab_tokens": vocab.tokens,
        "vocab_hash": vocab.content_hash(),
        "stats": stats.to_dict(),
        "skeleton": skeleton.to_dict(),
        "model_state": model.state_dict(),
        "optimizer_state": optimizer.state_dict() if optimizer is not None else None,
        "epoch": epoch,
        "extra": extra or {},
    }
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        torch.save(payload, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class CheckpointBundle:
    model: PastConditionedVae
    vocab: Vocabulary
    stats: FeatureStats
    skeleton: Skeleton
    optimizer_state: dict | None
    epoch: int
    extra: dict

    def generator(self) -> SequenceGenerator:
        return SequenceGenerator(self.model, self.vocab, self.stats, self.skeleton)


def load_checkpoint(path: str) -> CheckpointBundle:
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or "version" not in payload:
        raise CheckpointError(f"{path} is not a motion-compose checkpoint (no version field)")
    if payload["version"] != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version {payload['version']} unsupported (expected {CHECKPOINT_VERSION})"
        )
    try:
        config = ModelConfig(**payload["config"])
        vocab = Vocabulary(payload["vocab_tokens"])
        if vocab.content_hash() != payload["vocab_hash"]:
            raise CheckpointError(f"vocabulary hash mismatch in {path}")
        stats = FeatureStats.from_dict(payload["stats"])
        skeleton = Skeleton.from_dict(payload["skeleton"])
        model = PastConditionedVae(config, vocab_size=len(vocab))
        model.load_state_dict(payload["model_state"])
    except CheckpointError:
        raise
    except Exception as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    return CheckpointBundle(
        model=model,
        vocab=vocab,
        stats=stats,
        skeleton=skeleton,
        optimizer_state=payload.get("optimizer_state"),
        epoch=int(payload.get("epoch", 0)),
        extra=payload.get("extra", {}),
    )
