"""Independent reference implementations used only by the tests."""

from functools import lru_cache


def recursive_levenshtein(a, b):
    """Textbook recursive definition, memoised on suffix positions."""

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        if a[i] == b[j]:
            return d(i + 1, j + 1)
        return 1 + min(d(i + 1, j), d(i, j + 1), d(i + 1, j + 1))

    return d(0, 0)
