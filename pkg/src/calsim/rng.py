"""Counter-based random streams keyed by (seed, purpose, position).

Every random quantity in a simulation is addressed by the round it belongs to,
so the x-draw of round ``t`` is the same no matter which learner consumes the
stream or how many query coins were flipped before it.
"""
import numpy as np

PURPOSES = {
    "x": 1,
    "y": 2,
    "query": 3,
}

_WORDS_PER_BLOCK = 4  # Philox4x64 emits four 64-bit words per counter step


class CounterRNG:
    """Addressable uniform streams built on the Philox counter generator.

    ``uniforms(purpose, start, count)`` returns positions ``start .. start+count-1``
    of the stream for ``purpose``. Blocks are consistent with single draws:
    ``uniforms(p, a, k)[i] == uniform_at(p, a + i)``.
    """

    def __init__(self, seed):
        seed = int(seed)
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be in [0, 2**64), got {seed}")
        self.seed = seed

    def _generator(self, purpose, start):
        try:
            code = PURPOSES[purpose]
        except KeyError:
            raise ValueError(f"unknown stream purpose {purpose!r}") from None
        bitgen = np.random.Philox(key=[self.seed, code])
        block, offset = divmod(int(start), _WORDS_PER_BLOCK)
        if block:
            bitgen.advance(block)
        gen = np.random.Generator(bitgen)
        if offset:
            gen.random(offset)
        return gen

    def uniforms(self, purpose, start, count):
        if start < 0 or count < 0:
            raise ValueError("start and count must be non-negative")
        if count == 0:
            return np.empty(0)
        return self._generator(purpose, start).random(int(count))

    def uniform_at(self, purpose, position):
        return float(self.uniforms(purpose, position, 1)[0])

    def __repr__(self):
        return f"CounterRNG(seed={self.seed})"
