"""xorshift64 generator shared by pattern generation and RANSAC sampling."""

MASK64 = (1 << 64) - 1
DEFAULT_SEED = 88172645463325252


class Xorshift64:
    """Marsaglia xorshift64 with shifts (13, 7, 17).

    ``next()`` advances the state and returns the new state.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int = DEFAULT_SEED):
        seed = int(seed) & MASK64
        if seed == 0:
            raise ValueError("xorshift64 seed must be non-zero")
        self.state = seed

    def next(self) -> int:
        x = self.state
        x ^= (x << 13) & MASK64
        x ^= x >> 7
        x ^= (x << 17) & MASK64
        self.state = x
        return x

    def below(self, n: int) -> int:
        """Next value reduced modulo ``n``."""
        return self.next() % n
