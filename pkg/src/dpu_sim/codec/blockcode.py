"""
Static canonical block code for sparse update masks.

The mask is cut into 8-bit blocks (MSB first, last block zero-padded).
Non-zero blocks are coded as one of 255 byte symbols; runs of zero blocks
are coded as one run symbol of length 1..MAX_ZERO_RUN. Symbol weights are
derived from the ones-ratio k = k_count / I alone:

    byte b          k^popcount(b) * (1 - k)^(8 - popcount(b))
    run r < max     (1 - q)^2 * q^r        with q = (1 - k)^8
    run max         (1 - q) * q^max

A Huffman code is built from these weights and made canonical (codes
assigned in (length, symbol) order), so encoder and decoder rebuild the
same table from the frame header and no table is transmitted.

Masks with k_count == 0 or k_count == I are implied by the header and
encode to zero bits.
"""

import heapq
import math
from functools import lru_cache

import numpy as np

from dpu_sim.codec.errors import MaskCountMismatch, TruncatedFrame

BLOCK_BITS = 8
MAX_ZERO_RUN = 128
RUN_BASE = 256


def _run_symbol(length: int) -> int:
    return RUN_BASE + length - 1


def _symbol_weights(k: float) -> dict[int, float]:
    q = (1.0 - k) ** BLOCK_BITS
    weights = {}
    for b in range(1, 256):
        ones = bin(b).count("1")
        weights[b] = k**ones * (1.0 - k) ** (BLOCK_BITS - ones)
    for r in range(1, MAX_ZERO_RUN):
        weights[_run_symbol(r)] = (1.0 - q) ** 2 * q**r
    weights[_run_symbol(MAX_ZERO_RUN)] = (1.0 - q) * q**MAX_ZERO_RUN
    return weights


def _huffman_lengths(weights: dict[int, float]) -> dict[int, int]:
    lengths = {symbol: 0 for symbol in weights}
    heap = [(w, symbol, [symbol]) for symbol, w in sorted(weights.items())]
    heapq.heapify(heap)
    while len(heap) > 1:
        w_a, tie_a, group_a = heapq.heappop(heap)
        w_b, tie_b, group_b = heapq.heappop(heap)
        for symbol in group_a + group_b:
            lengths[symbol] += 1
        heapq.heappush(heap, (w_a + w_b, min(tie_a, tie_b), group_a + group_b))
    return lengths


class BlockCode:
    """Canonical prefix code for one (k_count, I) pair."""

    def __init__(self, k_count: int, n_weights: int):
        if not 0 < k_count < n_weights:
            raise ValueError(
                f"block code needs 0 < k_count < I, got {k_count} of {n_weights}"
            )
        lengths = _huffman_lengths(_symbol_weights(k_count / n_weights))
        self.encode_table: dict[int, tuple[int, int]] = {}
        self.decode_table: dict[tuple[int, int], int] = {}
        code = 0
        previous = 0
        for symbol in sorted(lengths, key=lambda s: (lengths[s], s)):
            length = lengths[symbol]
            code <<= length - previous
            self.encode_table[symbol] = (code, length)
            self.decode_table[(length, code)] = symbol
            code += 1
            previous = length
        self.max_length = previous

    def tokens(self, blocks: np.ndarray) -> list[int]:
        out = []
        run = 0
        for value in blocks.tolist():
            if value == 0:
                run += 1
                if run == MAX_ZERO_RUN:
                    out.append(_run_symbol(run))
                    run = 0
                continue
            if run:
                out.append(_run_symbol(run))
                run = 0
            out.append(value)
        if run:
            out.append(_run_symbol(run))
        return out

    def encoded_bits(self, blocks: np.ndarray) -> int:
        return sum(self.encode_table[t][1] for t in self.tokens(blocks))


@lru_cache(maxsize=64)
def block_code(k_count: int, n_weights: int) -> BlockCode:
    return BlockCode(k_count, n_weights)


def _implied(k_count: int, n_weights: int) -> bool:
    return k_count == 0 or k_count == n_weights


def coded_mask_bits(bits: np.ndarray, k_count: int) -> int:
    """Length in bits of the block-coded mask, before byte alignment."""
    n = bits.shape[0]
    if _implied(k_count, n):
        return 0
    return block_code(k_count, n).encoded_bits(np.packbits(bits))


def encode_mask(bits: np.ndarray, k_count: int) -> bytes:
    """Block-code a mask; the result is zero-padded to whole bytes."""
    n = bits.shape[0]
    if _implied(k_count, n):
        return b""
    code = block_code(k_count, n)
    parts = []
    for token in code.tokens(np.packbits(bits)):
        value, length = code.encode_table[token]
        parts.append(format(value, f"0{length}b"))
    stream = "".join(parts)
    stream += "0" * (-len(stream) % 8)
    return int(stream, 2).to_bytes(len(stream) // 8, "big")


def decode_mask(
    data: bytes, offset: int, n_weights: int, k_count: int
) -> tuple[np.ndarray, int]:
    """
    Decode a block-coded mask starting at data[offset].

    Returns:
        (boolean mask of length n_weights, offset just past the mask section)
    """
    if k_count == 0:
        return np.zeros(n_weights, dtype=bool), offset
    if k_count == n_weights:
        return np.ones(n_weights, dtype=bool), offset

    code = block_code(k_count, n_weights)
    n_blocks = math.ceil(n_weights / BLOCK_BITS)
    blocks = np.zeros(n_blocks, dtype=np.uint8)
    filled = 0
    position = offset * 8
    end = len(data) * 8
    while filled < n_blocks:
        value = 0
        length = 0
        while True:
            if position >= end:
                raise TruncatedFrame("mask section ends inside a code word")
            bit = (data[position >> 3] >> (7 - (position & 7))) & 1
            position += 1
            value = (value << 1) | bit
            length += 1
            symbol = code.decode_table.get((length, value))
            if symbol is not None:
                break
            if length > code.max_length:
                raise MaskCountMismatch("mask section holds no valid code word for its count")
        if symbol >= RUN_BASE:
            filled += symbol - RUN_BASE + 1
        else:
            blocks[filled] = symbol
            filled += 1
    if filled > n_blocks:
        raise MaskCountMismatch("zero run extends past the end of the mask")
    bits = np.unpackbits(blocks)[:n_weights].astype(bool)
    return bits, math.ceil(position / 8)
