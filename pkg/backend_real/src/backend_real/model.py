"""Multi-task long-document model: one shared encoder-decoder, three heads.

The shared weights come from a long-document encoder-decoder
(Longformer-style LED). Summarization uses the seq2seq head as-is;
paraphrasing reuses it with only the last two decoder layers marked
trainable for fine-tuning; the embedding head mean-pools the encoder
output and projects it, and only that projection trains.

The ``tiny`` profile builds a small randomly initialized model with the
same architecture so the whole server, conformance suite, and
fine-tuning paths run offline. Any other identifier is loaded from
pretrained weights and fails with a startup error when unavailable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn
from transformers import LEDConfig, LEDForConditionalGeneration

from .tokenizer import BOS_ID, EOS_ID, PAD_ID, HashWordTokenizer

TINY_IDENTIFIER = "tiny"


class ModelLoadError(RuntimeError):
    """Raised when the configured model cannot be constructed or loaded."""


@dataclass
class ModelConfig:
    model: str = TINY_IDENTIFIER
    max_input_tokens: int = 16384
    embedding_dim: int = 64
    beam_size: int = 1
    max_summary_tokens: int = 256
    seed: int = 0
    # tiny-profile architecture knobs
    tiny_vocab: int = 512
    tiny_d_model: int = 32
    tiny_layers: int = 3
    tiny_max_positions: int = 512

    def __post_init__(self):
        if self.max_input_tokens < 1 or self.embedding_dim < 1:
            raise ValueError("capacities must be positive")
        if self.model == TINY_IDENTIFIER:
            self.max_input_tokens = min(self.max_input_tokens, self.tiny_max_positions)


class MultiTaskModel(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        torch.manual_seed(config.seed)
        if config.model == TINY_IDENTIFIER:
            led_config = LEDConfig(
                vocab_size=config.tiny_vocab,
                d_model=config.tiny_d_model,
                encoder_layers=config.tiny_layers,
                decoder_layers=config.tiny_layers,
                encoder_attention_heads=2,
                decoder_attention_heads=2,
                encoder_ffn_dim=4 * config.tiny_d_model,
                decoder_ffn_dim=4 * config.tiny_d_model,
                max_encoder_position_embeddings=config.tiny_max_positions,
                max_decoder_position_embeddings=config.tiny_max_positions,
                attention_window=[16] * config.tiny_layers,
                pad_token_id=PAD_ID, bos_token_id=BOS_ID, eos_token_id=EOS_ID,
                decoder_start_token_id=BOS_ID,
            )
            self.seq2seq = LEDForConditionalGeneration(led_config)
            self.tokenizer = HashWordTokenizer(config.tiny_vocab)
        else:
            try:
                self.seq2seq = LEDForConditionalGeneration.from_pretrained(config.model)
            except Exception as exc:
                raise ModelLoadError(f"cannot load model {config.model!r}: {exc}") from exc
            try:
                from transformers import AutoTokenizer

                self.tokenizer = AutoTokenizer.from_pretrained(config.model)
            except Exception as exc:
                raise ModelLoadError(f"cannot load tokenizer for {config.model!r}: {exc}") from exc
        self.projection_head = nn.Linear(self.seq2seq.config.d_model, config.embedding_dim)
        self.eval()

    # -- heads ---------------------------------------------------------------

    def encode_ids(self, texts: list[str]) -> tuple[torch.Tensor, torch.Tensor]:
        batches = [self.tokenizer.encode(t, max_length=self.config.max_input_tokens)
                   for t in texts]
        width = max(len(b) for b in batches)
        ids = torch.full((len(batches), width), PAD_ID, dtype=torch.long)
        mask = torch.zeros((len(batches), width), dtype=torch.long)
        for row, batch in enumerate(batches):
            ids[row, :len(batch)] = torch.tensor(batch)
            mask[row, :len(batch)] = 1
        return ids, mask

    @torch.no_grad()
    def embed(self, texts: list[str]) -> torch.Tensor:
        vectors = self.embed_trainable(texts)
        return vectors

    def embed_trainable(self, texts: list[str]) -> torch.Tensor:
        """Mean-pooled encoder states through the projection head, unit-normalized."""
        ids, mask = self.encode_ids(texts)
        hidden = self.seq2seq.led.encoder(input_ids=ids, attention_mask=mask).last_hidden_state
        weights = mask.unsqueeze(-1).to(hidden.dtype)
        pooled = (hidden * weights).sum(dim=1) / weights.sum(dim=1).clamp(min=1.0)
        projected = self.projection_head(pooled)
        return projected / projected.norm(dim=1, keepdim=True).clamp(min=1e-12)

    @torch.no_grad()
    def generate_text(self, text: str, max_new_tokens: int) -> str:
        ids, mask = self.encode_ids([text])
        output = self.seq2seq.generate(
            ids, attention_mask=mask, num_beams=self.config.beam_size,
            do_sample=False, max_new_tokens=max(2, max_new_tokens))
        return self.tokenizer.decode(output[0].tolist())

    # -- fine-tuning surfaces --------------------------------------------------

    def paraphrase_trainable_parameters(self) -> list[nn.Parameter]:
        return [p for layer in self.seq2seq.led.decoder.layers[-2:]
                for p in layer.parameters()]

    def embedding_trainable_parameters(self) -> list[nn.Parameter]:
        return list(self.projection_head.parameters())

    def freeze_all(self) -> None:
        for p in self.parameters():
            p.requires_grad_(False)
