"""Head fine-tuning with everything else frozen.

Paraphrasing trains only the last two decoder layers on sentence pairs;
the embedding head trains only the projection layer with a triplet
margin objective (positive pulled closer to the anchor than the
negative). Both return the per-epoch loss history and can emit a
checkpoint of just the trained tensors.

Full-corpus training is documented but deliberately out of the tested
path; these routines are sized for toy smoke runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .model import MultiTaskModel
from .tokenizer import EOS_ID, PAD_ID


@dataclass
class FinetuneReport:
    epoch_losses: list[float]
    trained_parameter_names: list[str]
    checkpoint_path: Path | None


def _named_trainable(model: MultiTaskModel, trainable: list[nn.Parameter]) -> list[str]:
    wanted = {id(p) for p in trainable}
    return [name for name, p in model.named_parameters() if id(p) in wanted]


def _save_checkpoint(model: MultiTaskModel, names: list[str], path: Path | None) -> Path | None:
    if path is None:
        return None
    state = model.state_dict()
    torch.save({name: state[name] for name in names}, path)
    return path


def _seq2seq_loss(model: MultiTaskModel, sources: list[str], targets: list[str]) -> torch.Tensor:
    input_ids, attention_mask = model.encode_ids(sources)
    label_rows = [model.tokenizer.encode(t, model.config.max_input_tokens) + [EOS_ID]
                  for t in targets]
    width = max(len(r) for r in label_rows)
    labels = torch.full((len(label_rows), width), -100, dtype=torch.long)
    for i, row in enumerate(label_rows):
        labels[i, :len(row)] = torch.tensor(row)
    output = model.seq2seq(input_ids=input_ids, attention_mask=attention_mask, labels=labels)
    return output.loss


def finetune_paraphrase(model: MultiTaskModel, pairs: list[tuple[str, str]], *,
                        epochs: int = 3, lr: float = 1e-3, batch_size: int = 8,
                        checkpoint: Path | None = None) -> FinetuneReport:
    """Train the last two decoder layers on (sentence, paraphrase) pairs."""
    model.freeze_all()
    trainable = model.paraphrase_trainable_parameters()
    for p in trainable:
        p.requires_grad_(True)
    optimizer = torch.optim.Adam(trainable, lr=lr)

    model.train()
    losses = []
    for _ in range(epochs):
        total, batches = 0.0, 0
        for start in range(0, len(pairs), batch_size):
            chunk = pairs[start:start + batch_size]
            optimizer.zero_grad()
            loss = _seq2seq_loss(model, [a for a, _ in chunk], [b for _, b in chunk])
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            batches += 1
        losses.append(total / batches)
    model.eval()

    names = _named_trainable(model, trainable)
    return FinetuneReport(epoch_losses=losses, trained_parameter_names=names,
                          checkpoint_path=_save_checkpoint(model, names, checkpoint))


def triplet_violation_rate(model: MultiTaskModel,
                           triplets: list[tuple[str, str, str]],
                           margin: float = 0.2) -> float:
    """Fraction of triplets where the positive is not closer than the negative by ``margin``."""
    with torch.no_grad():
        anchors = model.embed_trainable([a for a, _, _ in triplets])
        positives = model.embed_trainable([p for _, p, _ in triplets])
        negatives = model.embed_trainable([n for _, _, n in triplets])
        pos_dist = (anchors - positives).norm(dim=1)
        neg_dist = (anchors - negatives).norm(dim=1)
        violations = (pos_dist + margin > neg_dist).float()
    return float(violations.mean())


def finetune_embedding(model: MultiTaskModel, triplets: list[tuple[str, str, str]], *,
                       epochs: int = 10, lr: float = 5e-2, batch_size: int = 16,
                       margin: float = 0.2,
                       checkpoint: Path | None = None) -> FinetuneReport:
    """Train only the projection head so positives end up closer than negatives."""
    model.freeze_all()
    trainable = model.embedding_trainable_parameters()
    for p in trainable:
        p.requires_grad_(True)
    optimizer = torch.optim.Adam(trainable, lr=lr)
    criterion = nn.TripletMarginLoss(margin=margin)

    model.train()
    losses = []
    for _ in range(epochs):
        total, batches = 0.0, 0
        for start in range(0, len(triplets), batch_size):
            chunk = triplets[start:start + batch_size]
            optimizer.zero_grad()
            anchors = model.embed_trainable([a for a, _, _ in chunk])
            positives = model.embed_trainable([p for _, p, _ in chunk])
            negatives = model.embed_trainable([n for _, _, n in chunk])
            loss = criterion(anchors, positives, negatives)
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            batches += 1
        losses.append(total / batches)
    model.eval()

    names = _named_trainable(model, trainable)
    return FinetuneReport(epoch_losses=losses, trained_parameter_names=names,
                          checkpoint_path=_save_checkpoint(model, names, checkpoint))
