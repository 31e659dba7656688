"""LSTM name decoder with greedy, beam and Gumbel-softmax decoding."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from varmark.errors import EmptyOutput
from varmark.nn.gumbel import gumbel_softmax

END = 0  # index of the END symbol in the name vocabulary


@dataclass
class BeamCandidate:
    ids: tuple[int, ...]
    score: float  # total log-probability, END included


class NameDecoder(nn.Module):
    def __init__(self, in_dim: int, hidden: int, emb_dim: int, vocab_size: int):
        super().__init__()
        self.vocab_size = vocab_size
        self.init = nn.Linear(in_dim, hidden)
        self.embed = nn.Embedding(vocab_size + 1, emb_dim)  # last row is BOS
        self.cell = nn.LSTMCell(emb_dim, hidden)
        self.out = nn.Linear(hidden, vocab_size)

    @property
    def bos(self) -> int:
        return self.vocab_size

    def start(self, z: torch.Tensor):
        h = self.init(z)
        c = torch.zeros_like(h)
        inp = self.embed.weight[self.bos].expand(z.shape[0], -1)
        return inp, (h, c)

    def step(self, inp: torch.Tensor, state):
        h, c = self.cell(inp, state)
        return self.out(h), (h, c)

    def forward_gumbel(
        self, z: torch.Tensor, steps: int, tau: float, generator: torch.Generator | None = None
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Free-running decode with straight-through samples.

        Returns (samples, log-probs), both (B, steps, V); samples are one-hot in
        value and carry soft gradients.
        """
        inp, state = self.start(z)
        table = self.embed.weight[: self.vocab_size]
        samples, logps = [], []
        for _ in range(steps):
            logits, state = self.step(inp, state)
            y = gumbel_softmax(logits, tau, hard=True, generator=generator)
            samples.append(y)
            logps.append(torch.log_softmax(logits, dim=-1))
            inp = y @ table
        return torch.stack(samples, 1), torch.stack(logps, 1)

    def forward_greedy(self, z: torch.Tensor, steps: int) -> tuple[torch.Tensor, torch.Tensor]:
        inp, state = self.start(z)
        ids, logps = [], []
        for _ in range(steps):
            logits, state = self.step(inp, state)
            logp = torch.log_softmax(logits, dim=-1)
            nxt = logp.argmax(-1)
            ids.append(nxt)
            logps.append(logp)
            inp = self.embed(nxt)
        return torch.stack(ids, 1), torch.stack(logps, 1)

    @torch.no_grad()
    def beam_search(self, z: torch.Tensor, width: int, max_len: int) -> list[BeamCandidate]:
        """Top ``width`` non-empty names for one representation ``z`` (1-d).

        A name ends with END or is forced to end after ``max_len`` subtokens;
        its score includes the END log-probability either way.
        """
        inp, state = self.start(z[None])
        live: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
        finished: list[BeamCandidate] = []
        for t in range(max_len + 1):
            logits, state = self.step(inp, state)
            logp = torch.log_softmax(logits, dim=-1)
            if t == 0:
                logp[:, END] = float("-inf")
            scores = torch.tensor([s for s, _ in live], dtype=logp.dtype)[:, None] + logp
            if t > 0:
                for row, (_, seq) in enumerate(live):
                    finished.append(BeamCandidate(seq, float(scores[row, END])))
            if t == max_len:
                break
            scores[:, END] = float("-inf")
            flat = scores.flatten()
            order = torch.argsort(flat, descending=True, stable=True)[:width].tolist()
            new_live = []
            for pos in order:
                s = float(flat[pos])
                if s == float("-inf"):
                    break
                row, tok = divmod(pos, self.vocab_size)
                new_live.append((s, live[row][1] + (tok,), row))
            finished.sort(key=lambda c: -c.score)
            if not new_live:
                break
            if len(finished) >= width and finished[width - 1].score >= new_live[0][0]:
                break
            rows = torch.tensor([r for _, _, r in new_live])
            state = (state[0][rows], state[1][rows])
            inp = self.embed(torch.tensor([seq[-1] for _, seq, _ in new_live]))
            live = [(s, seq) for s, seq, _ in new_live]
        finished.sort(key=lambda c: (-c.score, c.ids))
        return finished[:width]


def decode_name(z: torch.Tensor, decoder: NameDecoder, mode: str = "greedy", max_len: int = 5, width: int = 8,
                tau: float = 0.5, generator: torch.Generator | None = None):
    """Decode one representation.

    greedy -> (ids, per-step probabilities); gumbel -> (soft one-hots, per-step
    probabilities); beam -> list of BeamCandidate sorted by score.
    """
    if mode == "beam":
        return decoder.beam_search(z, width, max_len)
    if mode == "greedy":
        with torch.no_grad():
            ids, logp = decoder.forward_greedy(z[None], max_len + 1)
        ids = ids[0].tolist()
        if ids[0] == END:
            raise EmptyOutput("decoder produced END at the first step")
        n = ids.index(END) if END in ids else max_len
        return ids[:n], logp[0, : n + 1].exp()
    if mode == "gumbel":
        y, logp = decoder.forward_gumbel(z[None], max_len + 1, tau, generator)
        return y[0], logp[0].exp()
    raise ValueError(f"unknown decode mode {mode!r}")
