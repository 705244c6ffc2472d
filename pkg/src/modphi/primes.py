"""Prime enumeration shared by the Euler-product and sieve code."""
from functools import lru_cache

import numpy as np

__all__ = ["primes_up_to", "is_prime_table"]


@lru_cache(maxsize=8)
def is_prime_table(n):
    """Boolean primality table for ``0..n`` (sieve of Eratosthenes)."""
    n = int(n)
    table = np.ones(n + 1, dtype=bool)
    table[:2] = False
    for i in range(2, int(n ** 0.5) + 1):
        if table[i]:
            table[i * i::i] = False
    table.flags.writeable = False
    return table


@lru_cache(maxsize=8)
def primes_up_to(n):
    """Sorted array of the primes ``p <= n`` (read-only, cached)."""
    if n < 2:
        out = np.zeros(0, dtype=np.int64)
    else:
        out = np.nonzero(is_prime_table(int(n)))[0].astype(np.int64)
    out.flags.writeable = False
    return out
