"""Counter-addressed Gaussian noise.

Every draw is a pure function of ``(seed, stream, shot, slot)``: the Philox
key carries ``(seed, stream)`` and the counter is advanced to the block that
belongs to a shot. Each shot consumes a fixed number of raw words (uniforms
through Box-Muller, no rejection), so any split of the shot range into
chunks, in any order, yields the same numbers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
# Philox4x64 emits four 64-bit words per counter increment.
_WORDS_PER_BLOCK = 4

# Named streams so that independent ensembles never share noise.
STREAM_MAIN = 0
STREAM_REFERENCE = 1
STREAM_BOOTSTRAP = 2
STREAM_CONTROL = 3


def _words_per_shot(n_normals: int) -> int:
    n_uniform = n_normals + (n_normals % 2)
    return -(-n_uniform // _WORDS_PER_BLOCK) * _WORDS_PER_BLOCK


def _philox(seed: int, stream: int, block: int) -> np.random.Philox:
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    counter = np.array([block & _MASK64, block >> 64, 0, 0], dtype=np.uint64)
    return np.random.Philox(key=key, counter=counter)


def _uniform_open(raw: np.ndarray) -> np.ndarray:
    # 53-bit mantissa, shifted by half an ulp so 0 is never produced.
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def counter_normals(
    seed: int,
    shot_start: int,
    n_shots: int,
    n_normals: int,
    stream: int = STREAM_MAIN,
    scale: float = 1.0,
) -> np.ndarray:
    """Normals of shape ``(n_shots, n_normals)`` for shots
    ``shot_start .. shot_start + n_shots - 1``.

    Row ``i`` depends only on ``(seed, stream, shot_start + i)``.
    """
    if n_shots < 0 or n_normals < 1:
        raise ValueError("need n_shots >= 0 and n_normals >= 1")
    words = _words_per_shot(n_normals)
    bg = _philox(seed, stream, shot_start * (words // _WORDS_PER_BLOCK))
    raw = bg.random_raw(n_shots * words).reshape(n_shots, words)
    u = _uniform_open(raw)
    half = words // 2
    r = np.sqrt(-2.0 * np.log(u[:, :half]))
    theta = 2.0 * np.pi * u[:, half:]
    z = np.empty((n_shots, words))
    z[:, 0::2] = r * np.cos(theta)
    z[:, 1::2] = r * np.sin(theta)
    return scale * z[:, :n_normals]


def keyed_generator(seed: int, stream: int, index: int) -> np.random.Generator:
    """A fresh generator keyed by ``(seed, stream, index)``.

    Used for per-resample draws where consumption is not fixed: each index
    owns a disjoint counter range by construction of the key.
    """
    key = np.array([seed & _MASK64, ((stream & 0xFFFF) << 48) | (index & ((1 << 48) - 1))], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
