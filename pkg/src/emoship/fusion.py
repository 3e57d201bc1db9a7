"""Fusion head: visual dimensionality reduction, channel gating, emotion
classification, influential score, and a small self-contained trainer.

Forward pass (all float64):

    f_c    = candidate features in distance order, zero-padded to R_max rows,
             flattened row-major                       (R_max * D_vis,)
    f_v    = W_v @ f_c + b_v                           (D_eye,)
    f_ev   = [f_v, f_eye]                              (2 * D_eye,)
    u      = sigmoid(W_2 @ relu(W_1 @ f_ev + b_1) + b_2)
    f_eva  = u * f_ev
    logits = W_c @ f_eva + b_c                         (6,)

Emotion is the argmax over the six non-neutral codes with the lowest-code tie
rule.  The influential score is the gate mass on the first D_eye (visual)
channels over the total gate mass.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .archive import TensorArchive
from .core import EmotionLabel, NON_NEUTRAL_EMOTIONS
from .errors import DataError, DivergenceError, ModelError
from .eyefeat import EyeFeature
from .roiselect import CandidateSet

PARAM_NAMES = ("fcv.W", "fcv.b", "se.W1", "se.b1", "se.W2", "se.b2", "cls.W", "cls.b")
N_CLASSES = 6


@dataclass(frozen=True)
class FusionHead:
    """Parameters of FC_v + the two-layer excitation gate + the classifier."""

    W_v: np.ndarray  # (D_eye, R_max * D_vis)
    b_v: np.ndarray  # (D_eye,)
    W_1: np.ndarray  # (2*D_eye // r, 2*D_eye)
    b_1: np.ndarray
    W_2: np.ndarray  # (2*D_eye, 2*D_eye // r)
    b_2: np.ndarray
    W_c: np.ndarray  # (6, 2*D_eye)
    b_c: np.ndarray
    d_vis: int
    d_eye: int
    r_max: int

    def __post_init__(self):
        d2 = 2 * self.d_eye
        hidden = self.W_1.shape[0]
        checks = [
            (self.W_v.shape, (self.d_eye, self.r_max * self.d_vis)),
            (self.b_v.shape, (self.d_eye,)),
            (self.W_1.shape, (hidden, d2)),
            (self.b_1.shape, (hidden,)),
            (self.W_2.shape, (d2, hidden)),
            (self.b_2.shape, (d2,)),
            (self.W_c.shape, (N_CLASSES, d2)),
            (self.b_c.shape, (N_CLASSES,)),
        ]
        for got, want in checks:
            if got != want:
                raise ModelError(f"fusion head shape {got} != expected {want}")

    @classmethod
    def from_archive(cls, archive: TensorArchive, d_vis: int, d_eye: int,
                     r_max: int) -> "FusionHead":
        t = {name: archive.get(name).astype(np.float64) for name in PARAM_NAMES}
        return cls(W_v=t["fcv.W"], b_v=t["fcv.b"], W_1=t["se.W1"], b_1=t["se.b1"],
                   W_2=t["se.W2"], b_2=t["se.b2"], W_c=t["cls.W"], b_c=t["cls.b"],
                   d_vis=d_vis, d_eye=d_eye, r_max=r_max)

    def to_archive(self) -> TensorArchive:
        archive = TensorArchive()
        for name, value in zip(PARAM_NAMES, self.params()):
            archive.add(name, value)
        return archive

    def params(self) -> Tuple[np.ndarray, ...]:
        return (self.W_v, self.b_v, self.W_1, self.b_1,
                self.W_2, self.b_2, self.W_c, self.b_c)

    def with_params(self, params: Sequence[np.ndarray]) -> "FusionHead":
        W_v, b_v, W_1, b_1, W_2, b_2, W_c, b_c = params
        return replace(self, W_v=W_v, b_v=b_v, W_1=W_1, b_1=b_1,
                       W_2=W_2, b_2=b_2, W_c=W_c, b_c=b_c)

    @classmethod
    def random(cls, d_vis: int, d_eye: int, r_max: int, se_reduction: int,
               seed: int = 0, scale: float = 0.1) -> "FusionHead":
        if (2 * d_eye) % se_reduction != 0:
            raise ModelError(
                f"2*D_eye ({2 * d_eye}) not divisible by reduction {se_reduction}")
        hidden = (2 * d_eye) // se_reduction
        rng = np.random.default_rng(seed)
        def w(*shape):
            return rng.standard_normal(shape) * scale
        return cls(W_v=w(d_eye, r_max * d_vis), b_v=w(d_eye),
                   W_1=w(hidden, 2 * d_eye), b_1=w(hidden),
                   W_2=w(2 * d_eye, hidden), b_2=w(2 * d_eye),
                   W_c=w(N_CLASSES, 2 * d_eye), b_c=w(N_CLASSES),
                   d_vis=d_vis, d_eye=d_eye, r_max=r_max)


@dataclass(frozen=True)
class FusionOutput:
    emotion: EmotionLabel
    logits: Tuple[float, ...]
    u: Tuple[float, ...]
    influential_score: float


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def flatten_candidates(cands: CandidateSet, d_vis: int, r_max: int) -> np.ndarray:
    """Candidate features in distance order, zero-padded to R_max rows."""
    if len(cands) > r_max:
        raise DataError(f"candidate set larger than R_max ({len(cands)} > {r_max})")
    rows = np.zeros((r_max, d_vis), dtype=np.float64)
    for i, region in enumerate(cands.regions):
        region.validate_feature_dim(d_vis)
        rows[i] = region.feature
    return rows.reshape(-1)


def _forward(head: FusionHead, f_c: np.ndarray, f_eye: np.ndarray) -> Dict[str, np.ndarray]:
    f_v = head.W_v @ f_c + head.b_v
    f_ev = np.concatenate([f_v, f_eye])
    h1 = head.W_1 @ f_ev + head.b_1
    a1 = np.maximum(h1, 0.0)
    h2 = head.W_2 @ a1 + head.b_2
    u = _sigmoid(h2)
    f_eva = u * f_ev
    logits = head.W_c @ f_eva + head.b_c
    return {"f_c": f_c, "f_eye": f_eye, "f_v": f_v, "f_ev": f_ev, "h1": h1,
            "a1": a1, "h2": h2, "u": u, "f_eva": f_eva, "logits": logits}


def argmax_emotion(logits: Sequence[float]) -> EmotionLabel:
    """Argmax over the six non-neutral codes; ties go to the lowest code."""
    best = 0
    for j in range(1, N_CLASSES):
        if logits[j] > logits[best]:
            best = j
    return NON_NEUTRAL_EMOTIONS[best]


def influential_score(u: Sequence[float], d_eye: int = None) -> float:
    """Gate mass on the visual (first) half over the total gate mass."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.size == 0 or u.size % 2 != 0:
        raise DataError(f"gate vector must have even positive length, got {u.shape}")
    if d_eye is None:
        d_eye = u.size // 2
    if u.size != 2 * d_eye:
        raise DataError(f"gate length {u.size} != 2*D_eye ({2 * d_eye})")
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise DataError("gate components must lie strictly in (0,1)")
    return float(u[:d_eye].sum() / u.sum())


def fuse_classify(f_eye: EyeFeature, cands: CandidateSet,
                  head: FusionHead) -> FusionOutput:
    """Full forward pass from eye feature + candidates to emotion and score."""
    eye = np.asarray(f_eye.vector, dtype=np.float64)
    if eye.shape[0] != head.d_eye:
        raise ModelError(f"eye feature length {eye.shape[0]} != D_eye {head.d_eye}")
    f_c = flatten_candidates(cands, head.d_vis, head.r_max)
    acts = _forward(head, f_c, eye)
    logits = acts["logits"]
    return FusionOutput(
        emotion=argmax_emotion(logits),
        logits=tuple(float(v) for v in logits),
        u=tuple(float(v) for v in acts["u"]),
        influential_score=influential_score(acts["u"], head.d_eye))


# -- training ---------------------------------------------------------------

def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def loss_and_gradients(head: FusionHead,
                       batch: Sequence[Tuple[np.ndarray, np.ndarray, int]]
                       ) -> Tuple[float, List[np.ndarray]]:
    """Mean cross-entropy over (f_eye, f_c_flat, class_index) samples and the
    analytic gradient for every parameter, by reverse accumulation."""
    grads = [np.zeros_like(p) for p in head.params()]
    total = 0.0
    n = len(batch)
    for eye, f_c, target in batch:
        acts = _forward(head, f_c, eye)
        p = _softmax(acts["logits"])
        total += -float(np.log(max(p[target], 1e-300)))

        dlogits = p.copy()
        dlogits[target] -= 1.0
        d_feva = head.W_c.T @ dlogits
        du = d_feva * acts["f_ev"]
        d_fev = d_feva * acts["u"]
        dh2 = du * acts["u"] * (1.0 - acts["u"])
        da1 = head.W_2.T @ dh2
        dh1 = da1 * (acts["h1"] > 0.0)
        d_fev = d_fev + head.W_1.T @ dh1
        d_fv = d_fev[:head.d_eye]

        grads[0] += np.outer(d_fv, f_c)           # fcv.W
        grads[1] += d_fv                           # fcv.b
        grads[2] += np.outer(dh1, acts["f_ev"])    # se.W1
        grads[3] += dh1                            # se.b1
        grads[4] += np.outer(dh2, acts["a1"])      # se.W2
        grads[5] += dh2                            # se.b2
        grads[6] += np.outer(dlogits, acts["f_eva"])  # cls.W
        grads[7] += dlogits                        # cls.b
    return total / n, [g / n for g in grads]


def train_head(dataset: Sequence[Tuple[EyeFeature, CandidateSet, EmotionLabel]],
               head: FusionHead, lr: float = 0.001, epochs: int = 100,
               batch_size: int = 32, seed: int = 0,
               optimizer: str = "adam") -> FusionHead:
    """Minimize mean cross-entropy with plain gradient descent or Adam.

    Deterministic given the seed; raises DivergenceError (reporting the step)
    if the loss goes non-finite.
    """
    if not dataset:
        raise DataError("training dataset must be non-empty")
    prepared = []
    for eye_feature, cands, label in dataset:
        if label.is_neutral:
            raise DataError("training labels must be non-neutral")
        prepared.append((
            np.asarray(eye_feature.vector, dtype=np.float64),
            flatten_candidates(cands, head.d_vis, head.r_max),
            int(label) - 1,
        ))
    if optimizer not in ("sgd", "adam"):
        raise DataError(f"unknown optimizer {optimizer!r}")

    params = [p.copy() for p in head.params()]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    rng = np.random.default_rng(seed)
    step = 0
    for _ in range(epochs):
        order = rng.permutation(len(prepared))
        for start in range(0, len(prepared), batch_size):
            batch = [prepared[i] for i in order[start:start + batch_size]]
            current = head.with_params(params)
            loss, grads = loss_and_gradients(current, batch)
            step += 1
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at step {step}", step=step)
            if optimizer == "sgd":
                for i, g in enumerate(grads):
                    params[i] = params[i] - lr * g
            else:
                for i, g in enumerate(grads):
                    m[i] = beta1 * m[i] + (1 - beta1) * g
                    v[i] = beta2 * v[i] + (1 - beta2) * g * g
                    mhat = m[i] / (1 - beta1 ** step)
                    vhat = v[i] / (1 - beta2 ** step)
                    params[i] = params[i] - lr * mhat / (np.sqrt(vhat) + eps)
    return head.with_params(params)
