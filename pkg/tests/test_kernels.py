"""Kernel correctness and compiled/pure parity."""

import random

import pytest

from opsai._kernels import KERNEL_IMPL, fnv1a64, levenshtein, pure, splitmix64_next

from independent import fnv1a64_ref, lev_ref, splitmix64_ref


def test_fnv1a64_offset_basis():
    assert fnv1a64(b"") == 0xCBF29CE484222325


def test_fnv1a64_known_vectors():
    # Values derived from the algorithm definition via the reference fold.
    for data in (b"a", b"ab", b"hello world", bytes(range(256))):
        assert fnv1a64(data) == fnv1a64_ref(data)


def test_levenshtein_against_recursive_oracle():
    rng = random.Random(7)
    alphabet = "PRGXLUTSB"
    for _ in range(300):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 9)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 9)))
        assert levenshtein(a.encode(), b.encode()) == lev_ref(a, b)


def test_levenshtein_edges():
    assert levenshtein(b"", b"") == 0
    assert levenshtein(b"", b"PT") == 2
    assert levenshtein(b"AB", b"AC") == 1
    assert levenshtein(b"ABCD", b"ABCD") == 0


def test_splitmix64_reference_stream():
    stream = []
    state = 0
    for _ in range(4):
        state, out = splitmix64_next(state)
        stream.append(out)
    assert stream == splitmix64_ref(0, 4)
    # Published first outputs for seed 0.
    assert stream[0] == 0xE220A8397B1DCDAF


def test_splitmix64_wraps_at_64_bits():
    state, out = splitmix64_next(2**64 - 1)
    assert 0 <= state < 2**64 and 0 <= out < 2**64
    assert (state, out) == tuple(pure.splitmix64_next(2**64 - 1))


@pytest.mark.skipif(KERNEL_IMPL != "c", reason="compiled kernels unavailable")
def test_compiled_matches_pure():
    rng = random.Random(99)
    for _ in range(200):
        blob = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 64)))
        assert fnv1a64(blob) == pure.fnv1a64(blob)
        a = bytes(rng.randrange(65, 91) for _ in range(rng.randrange(0, 24)))
        b = bytes(rng.randrange(65, 91) for _ in range(rng.randrange(0, 24)))
        assert levenshtein(a, b) == pure.levenshtein(a, b)
        seed = rng.randrange(2**64)
        assert splitmix64_next(seed) == tuple(pure.splitmix64_next(seed))
