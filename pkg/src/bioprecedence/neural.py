"""Recurrent precedence classifiers built directly on numpy.

Two architectures: a single-input LSTM reading the encompassing span, and a
three-pronged variant with separate branches for the E1 span, the
encompassing span, and the E2 span, merged by concatenation. Both end in
dropout, a dense layer of dimension three, and a softmax. Backpropagation
through time is implemented by hand and verified against finite
differences; training and inference are deterministic under a fixed seed.
"""
from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from bioprecedence.corpus import CLASS_ORDER, CoarseLabel

BASIC = "basic"
PITCHFORK = "pitchfork"

_NET_SCHEMA = "bioprecedence-net/1"
_BRANCHES = ("e1", "span", "e2")


# ---------------------------------------------------------------------------
# embeddings


def _token_seed(token: str, seed: int) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return (int.from_bytes(digest[:8], "little") ^ (seed & 0xFFFFFFFF))


class EmbeddingTable:
    """Token vectors with deterministic random draws for unseen tokens."""

    def __init__(self, vocab: dict[str, int], matrix: np.ndarray, oov_seed: int = 0):
        if matrix.ndim != 2 or matrix.shape[0] != len(vocab):
            raise ValueError("matrix rows must match the vocabulary size")
        if not np.isfinite(matrix).all():
            raise ValueError("embedding matrix contains non-finite values")
        self.vocab = dict(vocab)
        self.matrix = matrix
        self.oov_seed = oov_seed
        self._oov_cache: dict[str, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def lookup(self, token: str) -> np.ndarray:
        row = self.vocab.get(token)
        if row is not None:
            return self.matrix[row]
        cached = self._oov_cache.get(token)
        if cached is None:
            rng = np.random.default_rng(_token_seed(token, self.oov_seed))
            cached = rng.normal(0.0, 0.1, self.dim)
            self._oov_cache[token] = cached
        return cached


def load_embeddings(path: str, oov_seed: int = 0) -> EmbeddingTable:
    """Read word2vec text format: a "count dim" header, then one token per line."""
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: header must be 'count dim'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise ValueError(f"{path}: non-numeric header {header}") from None
        vocab: dict[str, int] = {}
        rows = []
        for lineno, line in enumerate(handle, start=2):
            parts = line.rstrip("\n").split(" ")
            if not parts or parts == [""]:
                continue
            token = parts[0]
            values = parts[1:]
            if len(values) != dim:
                raise ValueError(
                    f"{path} line {lineno}: expected {dim} values, got {len(values)}"
                )
            try:
                vector = np.array([float(v) for v in values])
            except ValueError:
                raise ValueError(f"{path} line {lineno}: non-numeric value") from None
            if token in vocab:
                warnings.warn(f"{path} line {lineno}: duplicate token {token!r}; "
                              "keeping the first row")
                continue
            vocab[token] = len(rows)
            rows.append(vector)
    if len(rows) != count:
        warnings.warn(f"{path}: header declared {count} rows, found {len(rows)}")
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return EmbeddingTable(vocab=vocab, matrix=matrix, oov_seed=oov_seed)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class NetConfig:
    architecture: str = BASIC
    pretrained: bool = False
    embedding_dim: int = 200
    hidden_size: int = 64
    dropout: float = 0.5
    output_dim: int = 3
    max_epochs: int = 100
    batch_size: int = 32
    patience: int = 10
    learning_rate: float = 0.1
    clip_norm: float = 5.0
    max_tokens: int = 200          # sequences are truncated to this length
    seed: int = 0

    def __post_init__(self):
        if self.architecture not in (BASIC, PITCHFORK):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.output_dim != len(CLASS_ORDER):
            raise ValueError(f"output_dim must be {len(CLASS_ORDER)}")
        if self.max_epochs < 1 or self.batch_size < 1:
            raise ValueError("max_epochs and batch_size must be >= 1")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    ex = np.exp(shifted)
    return ex / ex.sum()


def _init_lstm(rng: np.random.Generator, d: int, h: int) -> dict[str, np.ndarray]:
    scale = 1.0 / math.sqrt(d + h)
    params = {}
    for gate in "ifog":
        params[f"W{gate}"] = rng.uniform(-scale, scale, (h, d + h))
        params[f"b{gate}"] = np.zeros(h)
    params["bf"] = params["bf"] + 1.0   # forget-gate bias starts open
    return params


def _lstm_forward(params: dict, prefix: str, xs: np.ndarray):
    """Run the cell over (T, d) inputs; returns final hidden state and cache."""
    h_size = params[f"{prefix}Wi"].shape[0]
    h = np.zeros(h_size)
    c = np.zeros(h_size)
    steps = []
    for x in xs:
        z = np.concatenate([x, h])
        i = _sigmoid(params[f"{prefix}Wi"] @ z + params[f"{prefix}bi"])
        f = _sigmoid(params[f"{prefix}Wf"] @ z + params[f"{prefix}bf"])
        o = _sigmoid(params[f"{prefix}Wo"] @ z + params[f"{prefix}bo"])
        g = np.tanh(params[f"{prefix}Wg"] @ z + params[f"{prefix}bg"])
        c_prev = c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        steps.append({"z": z, "i": i, "f": f, "o": o, "g": g,
                      "c_prev": c_prev, "tanh_c": tanh_c})
    return h, steps


def _lstm_backward(params: dict, prefix: str, steps: list, dh: np.ndarray,
                   grads: dict, d_input: int):
    """BPTT through one branch; returns per-step input gradients (T, d)."""
    h_size = dh.shape[0]
    dc_next = np.zeros(h_size)
    dxs = []
    for step in reversed(steps):
        i, f, o, g = step["i"], step["f"], step["o"], step["g"]
        tanh_c = step["tanh_c"]
        do = dh * tanh_c
        dc = dc_next + dh * o * (1.0 - tanh_c * tanh_c)
        di = dc * g
        dg = dc * i
        df = dc * step["c_prev"]
        dc_next = dc * f
        da = {
            "i": di * i * (1.0 - i),
            "f": df * f * (1.0 - f),
            "o": do * o * (1.0 - o),
            "g": dg * (1.0 - g * g),
        }
        z = step["z"]
        dz = np.zeros_like(z)
        for gate in "ifog":
            grads[f"{prefix}W{gate}"] += np.outer(da[gate], z)
            grads[f"{prefix}b{gate}"] += da[gate]
            dz += params[f"{prefix}W{gate}"].T @ da[gate]
        dxs.append(dz[:d_input])
        dh = dz[d_input:]
    dxs.reverse()
    return np.array(dxs)


def _dropout_mask(rng: np.random.Generator | None, size: int, rate: float,
                  train_mode: bool) -> np.ndarray:
    # Inverted dropout: scale at train time so inference needs no rescale.
    if not train_mode or rate == 0.0:
        return np.ones(size)
    if rng is None:
        raise ValueError("train-mode forward needs a dropout rng")
    return (rng.random(size) >= rate) / (1.0 - rate)


# ---------------------------------------------------------------------------
# networks


class _Net:
    """Shared machinery: parameter store, embeddings, loss plumbing."""

    def __init__(self, vocab: dict[str, int], config: NetConfig,
                 embeddings: EmbeddingTable | None = None):
        if config.pretrained and embeddings is None:
            raise ValueError("pretrained nets need an embedding table")
        self.vocab = dict(vocab)
        self.config = config
        self.params: dict[str, np.ndarray] = {}
        self._oov = EmbeddingTable(
            vocab={}, matrix=np.zeros((0, config.embedding_dim)),
            oov_seed=config.seed,
        )
        self._rng = np.random.default_rng(config.seed)
        self._embeddings = embeddings

    def _init_embedding(self, name: str):
        d = self.config.embedding_dim
        matrix = self._rng.normal(0.0, 0.1, (len(self.vocab), d))
        if self.config.pretrained:
            for token, row in self.vocab.items():
                if token in self._embeddings:
                    matrix[row] = self._embeddings.lookup(token)
        self.params[name] = matrix

    def _embed(self, name: str, tokens: list[str]):
        """Rows: vocab index or -1 for out-of-vocabulary (not trained)."""
        tokens = tokens[:self.config.max_tokens]
        rows = [self.vocab.get(tok, -1) for tok in tokens]
        xs = np.array([
            self.params[name][row] if row >= 0 else self._oov.lookup(tok)
            for row, tok in zip(rows, tokens)
        ])
        return rows, xs

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(p) for name, p in self.params.items()}

    def loss_and_grads(self, example, label_index: int, train_mode: bool = True,
                       dropout_rng=None):
        probs, cache = self.forward(example, train_mode=train_mode,
                                    dropout_rng=dropout_rng)
        loss = -math.log(max(probs[label_index], 1e-300))
        dlogits = probs.copy()
        dlogits[label_index] -= 1.0
        grads = self.backward(cache, dlogits)
        return loss, grads, probs

    def predict_probs(self, example) -> np.ndarray:
        probs, _ = self.forward(example, train_mode=False)
        return probs

    def scores(self, example) -> dict[CoarseLabel, float]:
        probs = self.predict_probs(example)
        return {c: float(probs[k]) for k, c in enumerate(CLASS_ORDER)}

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.copy() for name, p in self.params.items()}

    def load_state(self, state: dict[str, np.ndarray]):
        for name, p in state.items():
            self.params[name] = p.copy()

    def to_json(self) -> str:
        cfg = {k: getattr(self.config, k) for k in (
            "architecture", "pretrained", "embedding_dim", "hidden_size",
            "dropout", "output_dim", "max_epochs", "batch_size", "patience",
            "learning_rate", "clip_norm", "max_tokens", "seed",
        )}
        return json.dumps({
            "schema": _NET_SCHEMA,
            "type": "neural",
            "config": cfg,
            "vocab": self.vocab,
            "params": {
                name: {"shape": list(p.shape), "data": p.ravel().tolist()}
                for name, p in sorted(self.params.items())
            },
        }, sort_keys=True)


class BasicNet(_Net):
    """Input -> embeddings -> LSTM -> dropout -> dense(3) -> softmax."""

    def __init__(self, vocab, config: NetConfig, embeddings=None):
        super().__init__(vocab, config, embeddings)
        d, h = config.embedding_dim, config.hidden_size
        self._init_embedding("E")
        self.params.update(_init_lstm(self._rng, d, h))
        scale = 1.0 / math.sqrt(h)
        self.params["Wd"] = self._rng.uniform(-scale, scale, (config.output_dim, h))
        self.params["bd"] = np.zeros(config.output_dim)

    def forward(self, tokens: list[str], train_mode: bool = False,
                dropout_rng=None):
        if not tokens:
            raise ValueError("token sequence must be non-empty")
        rows, xs = self._embed("E", tokens)
        h, steps = _lstm_forward(self.params, "", xs)
        mask = _dropout_mask(dropout_rng, h.shape[0], self.config.dropout,
                             train_mode)
        hd = h * mask
        logits = self.params["Wd"] @ hd + self.params["bd"]
        probs = softmax(logits)
        cache = {"rows": rows, "steps": steps, "mask": mask, "hd": hd}
        return probs, cache

    def backward(self, cache, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        grads = self.zero_grads()
        grads["Wd"] += np.outer(dlogits, cache["hd"])
        grads["bd"] += dlogits
        dh = (self.params["Wd"].T @ dlogits) * cache["mask"]
        dxs = _lstm_backward(self.params, "", cache["steps"], dh, grads,
                             self.config.embedding_dim)
        for row, dx in zip(cache["rows"], dxs):
            if row >= 0:
                grads["E"][row] += dx
        return grads


class PitchforkNet(_Net):
    """Three embedding+LSTM+dropout branches (E1 span, encompassing span,
    E2 span) merged by concatenation, then dropout, dense(3), softmax."""

    def __init__(self, vocab, config: NetConfig, embeddings=None):
        super().__init__(vocab, config, embeddings)
        d, h = config.embedding_dim, config.hidden_size
        for branch in _BRANCHES:
            self._init_embedding(f"{branch}.E")
            self.params.update({
                f"{branch}.{k}": v for k, v in _init_lstm(self._rng, d, h).items()
            })
        scale = 1.0 / math.sqrt(3 * h)
        self.params["Wd"] = self._rng.uniform(-scale, scale,
                                              (config.output_dim, 3 * h))
        self.params["bd"] = np.zeros(config.output_dim)

    def forward(self, inputs, train_mode: bool = False, dropout_rng=None):
        e1_tokens, span_tokens, e2_tokens = inputs
        for name, toks in zip(_BRANCHES, (e1_tokens, span_tokens, e2_tokens)):
            if not toks:
                raise ValueError(f"{name} token sequence must be non-empty")
        h_size = self.config.hidden_size
        branch_caches = []
        merged = []
        for branch, toks in zip(_BRANCHES, (e1_tokens, span_tokens, e2_tokens)):
            rows, xs = self._embed(f"{branch}.E", toks)
            h, steps = _lstm_forward(self.params, f"{branch}.", xs)
            mask = _dropout_mask(dropout_rng, h_size, self.config.dropout,
                                 train_mode)
            merged.append(h * mask)
            branch_caches.append({"rows": rows, "steps": steps, "mask": mask,
                                  "hidden": h})
        concat = np.concatenate(merged)
        merge_mask = _dropout_mask(dropout_rng, concat.shape[0],
                                   self.config.dropout, train_mode)
        hd = concat * merge_mask
        logits = self.params["Wd"] @ hd + self.params["bd"]
        probs = softmax(logits)
        cache = {"branches": branch_caches, "merge_mask": merge_mask, "hd": hd}
        return probs, cache

    def backward(self, cache, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        grads = self.zero_grads()
        grads["Wd"] += np.outer(dlogits, cache["hd"])
        grads["bd"] += dlogits
        dconcat = (self.params["Wd"].T @ dlogits) * cache["merge_mask"]
        h_size = self.config.hidden_size
        for k, (branch, bcache) in enumerate(zip(_BRANCHES, cache["branches"])):
            dh = dconcat[k * h_size:(k + 1) * h_size] * bcache["mask"]
            dxs = _lstm_backward(self.params, f"{branch}.", bcache["steps"],
                                 dh, grads, self.config.embedding_dim)
            for row, dx in zip(bcache["rows"], dxs):
                if row >= 0:
                    grads[f"{branch}.E"][row] += dx
        return grads


def build_net(vocab, config: NetConfig, embeddings=None) -> _Net:
    cls = BasicNet if config.architecture == BASIC else PitchforkNet
    return cls(vocab, config, embeddings)


def net_from_json(json_text: str) -> _Net:
    data = json.loads(json_text)
    if data.get("schema") != _NET_SCHEMA:
        raise ValueError(f"unsupported network schema {data.get('schema')!r}")
    config = NetConfig(**data["config"])
    # The trained weights are restored below, so the original embedding
    # table is not needed to rebuild a pretrained net.
    net = build_net(data["vocab"], replace(config, pretrained=False))
    net.config = config
    for name, payload in data["params"].items():
        net.params[name] = np.array(payload["data"]).reshape(payload["shape"])
    return net


# ---------------------------------------------------------------------------
# training


def vocab_from_examples(examples) -> dict[str, int]:
    """Sorted token vocabulary over training inputs (basic or three-pronged)."""
    tokens = set()
    for example, _ in examples:
        if example and isinstance(example[0], str):
            tokens.update(example)
        else:
            for part in example:
                tokens.update(part)
    return {tok: i for i, tok in enumerate(sorted(tokens))}


@dataclass
class TrainLog:
    epochs: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = math.inf
    stopped_early: bool = False


def _mean_loss(net: _Net, data) -> float:
    total = 0.0
    for example, label in data:
        probs = net.predict_probs(example)
        total += -math.log(max(probs[label], 1e-300))
    return total / len(data)


def train_net(train_data, val_data, config: NetConfig,
              embeddings: EmbeddingTable | None = None) -> tuple[_Net, TrainLog]:
    """Mini-batch SGD with gradient clipping and early stopping.

    ``train_data`` and ``val_data`` are lists of (example, class index)
    where the example is a token list (basic) or a three-tuple of token
    lists (pitchfork). Training stops once validation loss has failed to
    improve for more than ``patience`` consecutive epochs; the returned
    parameters come from the best-validation epoch.
    """
    if not train_data or not val_data:
        raise ValueError("training needs non-empty train and validation data")
    vocab = vocab_from_examples(train_data)
    net = build_net(vocab, config, embeddings)
    shuffle_rng = np.random.default_rng([config.seed, 1])
    dropout_rng = np.random.default_rng([config.seed, 2])
    log = TrainLog()
    best_state = net.state_dict()
    bad_epochs = 0
    order = np.arange(len(train_data))
    for epoch in range(config.max_epochs):
        shuffle_rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            grads = net.zero_grads()
            batch_loss = 0.0
            for i in batch:
                example, label = train_data[i]
                loss, g, _ = net.loss_and_grads(example, label, train_mode=True,
                                                dropout_rng=dropout_rng)
                if not math.isfinite(loss):
                    raise FloatingPointError(
                        f"non-finite loss at epoch {epoch}, batch {start // config.batch_size}"
                    )
                batch_loss += loss
                for name in grads:
                    grads[name] += g[name]
            inv = 1.0 / len(batch)
            norm = math.sqrt(sum(float((g * g).sum()) for g in grads.values())) * inv
            clip = min(1.0, config.clip_norm / norm) if norm > 0 else 1.0
            step = config.learning_rate * inv * clip
            for name in grads:
                net.params[name] -= step * grads[name]
            epoch_loss += batch_loss
        val_loss = _mean_loss(net, val_data)
        log.epochs.append({
            "epoch": epoch,
            "train_loss": epoch_loss / len(train_data),
            "val_loss": val_loss,
        })
        if val_loss < log.best_val_loss:
            log.best_val_loss = val_loss
            log.best_epoch = epoch
            best_state = net.state_dict()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > config.patience:
                log.stopped_early = True
                break
    net.load_state(best_state)
    return net, log


# ---------------------------------------------------------------------------
# verification


def gradient_check(net: _Net, example, label_index: int, epsilon: float = 1e-5,
                   train_mode: bool = False, dropout_seed: int = 0,
                   grad_transform=None) -> float:
    """Max relative error between BPTT and central finite differences.

    Every parameter coordinate is perturbed, so keep the network small.
    The denominator is floored at 1e-6: below that the central-difference
    estimate is dominated by 64-bit roundoff (~1e-11 absolute at the
    default epsilon), so near-zero gradients are compared on an absolute
    scale instead. ``grad_transform`` may mutate the analytic gradients
    before comparison (used by mutation tests to prove the check catches
    broken backward passes).
    """
    def loss_at() -> float:
        rng = np.random.default_rng(dropout_seed) if train_mode else None
        probs, _ = net.forward(example, train_mode=train_mode, dropout_rng=rng)
        return -math.log(max(probs[label_index], 1e-300))

    rng = np.random.default_rng(dropout_seed) if train_mode else None
    _, grads, _ = net.loss_and_grads(example, label_index, train_mode=train_mode,
                                     dropout_rng=rng)
    if grad_transform is not None:
        grad_transform(grads)
    worst = 0.0
    for name in sorted(net.params):
        param = net.params[name]
        grad = grads[name]
        flat = param.ravel()
        gflat = grad.ravel()
        for j in range(flat.size):
            original = flat[j]
            flat[j] = original + epsilon
            plus = loss_at()
            flat[j] = original - epsilon
            minus = loss_at()
            flat[j] = original
            numeric = (plus - minus) / (2.0 * epsilon)
            analytic = gflat[j]
            denom = max(abs(numeric) + abs(analytic), 1e-6)
            worst = max(worst, abs(numeric - analytic) / denom)
    return worst
