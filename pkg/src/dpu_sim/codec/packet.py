"""
Update frames sent from the server to the edge device.

Layout (all integers little-endian):

    offset  size  field
    0       1     version
    1       1     flags: bits 0-1 frame type, bit 2 mask encoding,
                  bits 3-4 value width (0=16, 1=32, 2=64 bits), rest zero
    2       4     round index
    6       4     I, number of weights
    -- full frames --
    10      I*w   all weight values
    -- sparse and reinit_sparse frames --
    10      4     k_count
    14      8     reinit seed (reinit_sparse only)
    ..      ..    mask section, byte aligned (raw bitmap or block code)
    ..      k*w   new absolute values of the masked weights, ascending index
    -- every frame --
    end-4   4     CRC-32 of everything before it

A skip frame is header plus checksum, SKIP_FRAME_BYTES long.
"""

import logging
import math
import struct
import zlib
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from dpu_sim.codec import blockcode
from dpu_sim.codec.errors import (
    ChecksumMismatch,
    MaskCountMismatch,
    TruncatedFrame,
    UnsupportedVersion,
)
from dpu_sim.nn.network import Architecture, DimensionError, WeightVector, init_weights
from dpu_sim.update.mask import Mask

log = logging.getLogger(__name__)

VERSION = 1
HEADER = struct.Struct("<BBII")
COUNT = struct.Struct("<I")
SEED = struct.Struct("<Q")
CHECKSUM = struct.Struct("<I")
SKIP_FRAME_BYTES = HEADER.size + CHECKSUM.size

VALUE_BITS = (16, 32, 64)
_VALUE_DTYPES = {16: np.dtype("<f2"), 32: np.dtype("<f4"), 64: np.dtype("<f8")}
_RESERVED_FLAGS = 0b11100000


class FrameType(IntEnum):
    FULL = 0
    SPARSE = 1
    REINIT_SPARSE = 2
    SKIP = 3


class MaskEncoding(IntEnum):
    RAW_BITMAP = 0
    BLOCK_CODED = 1


def quantize(values: np.ndarray, value_bits: int) -> np.ndarray:
    """Round values to the wire width and back to float64."""
    if value_bits not in _VALUE_DTYPES:
        raise ValueError(f"value width must be one of {VALUE_BITS}, got {value_bits}")
    out = np.asarray(values, dtype=np.float64).astype(_VALUE_DTYPES[value_bits])
    if not np.all(np.isfinite(out)):
        raise ValueError(f"values do not fit a {value_bits}-bit float")
    return out.astype(np.float64)


@dataclass(eq=False)
class UpdatePacket:
    """
    Decoded form of one frame.

    mask is None for full and skip frames. values holds I entries for full
    frames, k_count entries for sparse frames and none for skip frames.
    """

    round: int
    frame_type: FrameType
    n_weights: int
    value_bits: int = 32
    k_count: int = 0
    mask_encoding: MaskEncoding = MaskEncoding.RAW_BITMAP
    seed: int | None = None
    mask: np.ndarray | None = None
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    version: int = VERSION

    def __post_init__(self):
        self.frame_type = FrameType(self.frame_type)
        self.mask_encoding = MaskEncoding(self.mask_encoding)
        if not 0 <= self.round < 2**32:
            raise ValueError(f"round index out of range: {self.round}")
        if not 0 < self.n_weights < 2**32:
            raise ValueError(f"weight count out of range: {self.n_weights}")
        if self.value_bits not in _VALUE_DTYPES:
            raise ValueError(f"value width must be one of {VALUE_BITS}")
        if not 0 <= self.k_count <= self.n_weights:
            raise ValueError(
                f"k_count {self.k_count} outside [0, I={self.n_weights}]"
            )
        if self.frame_type is FrameType.REINIT_SPARSE:
            if self.seed is None or not 0 <= self.seed < 2**64:
                raise ValueError("reinit_sparse frames need a 64-bit seed")
        elif self.seed is not None:
            raise ValueError(f"{self.frame_type.name.lower()} frames carry no seed")
        self.values = np.asarray(self.values, dtype=np.float64)
        expected = {
            FrameType.FULL: self.n_weights,
            FrameType.SKIP: 0,
        }.get(self.frame_type, self.k_count)
        if self.values.shape != (expected,):
            raise ValueError(
                f"{self.frame_type.name.lower()} frame needs {expected} values, "
                f"got {self.values.shape}"
            )
        if self.frame_type in (FrameType.SPARSE, FrameType.REINIT_SPARSE):
            if self.mask is None:
                raise ValueError("sparse frames need a mask")
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != (self.n_weights,):
                raise ValueError(
                    f"mask shape {self.mask.shape} does not match I={self.n_weights}"
                )
        elif self.mask is not None:
            raise ValueError(f"{self.frame_type.name.lower()} frames carry no mask")

    def __eq__(self, other) -> bool:
        if not isinstance(other, UpdatePacket):
            return NotImplemented
        masks_equal = (
            self.mask is None and other.mask is None
        ) or (
            self.mask is not None
            and other.mask is not None
            and np.array_equal(self.mask, other.mask)
        )
        return (
            self.version == other.version
            and self.round == other.round
            and self.frame_type == other.frame_type
            and self.n_weights == other.n_weights
            and self.value_bits == other.value_bits
            and self.k_count == other.k_count
            and self.mask_encoding == other.mask_encoding
            and self.seed == other.seed
            and masks_equal
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def choose_mask_encoding(bits: np.ndarray, k_count: int) -> MaskEncoding:
    """Block coding when its byte-aligned size beats the raw bitmap."""
    coded = math.ceil(blockcode.coded_mask_bits(bits, k_count) / 8)
    raw = math.ceil(bits.shape[0] / 8)
    return MaskEncoding.BLOCK_CODED if coded < raw else MaskEncoding.RAW_BITMAP


def skip_packet(round_index: int, n_weights: int) -> UpdatePacket:
    return UpdatePacket(round=round_index, frame_type=FrameType.SKIP, n_weights=n_weights)


def full_packet(w: WeightVector, round_index: int, value_bits: int = 32) -> UpdatePacket:
    return UpdatePacket(
        round=round_index,
        frame_type=FrameType.FULL,
        n_weights=len(w),
        value_bits=value_bits,
        k_count=len(w),
        values=quantize(w.values, value_bits),
    )


def sparse_packet(
    w_new: WeightVector,
    mask: Mask,
    round_index: int,
    value_bits: int = 32,
    seed: int | None = None,
) -> UpdatePacket:
    """
    Frame carrying the masked coordinates of w_new.

    With a seed the frame is reinit_sparse: the edge regenerates the
    initial weights from the seed before overwriting the masked ones.
    """
    if len(mask) != len(w_new):
        raise DimensionError(f"mask length {len(mask)} does not match I={len(w_new)}")
    support = mask.ones()
    return UpdatePacket(
        round=round_index,
        frame_type=FrameType.SPARSE if seed is None else FrameType.REINIT_SPARSE,
        n_weights=len(w_new),
        value_bits=value_bits,
        k_count=support.shape[0],
        mask_encoding=choose_mask_encoding(mask.bits, support.shape[0]),
        seed=seed,
        mask=mask.bits.copy(),
        values=quantize(w_new.values[support], value_bits),
    )


def _flags(packet: UpdatePacket) -> int:
    width = VALUE_BITS.index(packet.value_bits)
    return int(packet.frame_type) | int(packet.mask_encoding) << 2 | width << 3


def encode_packet(packet: UpdatePacket) -> bytes:
    """Serialize a frame and append its CRC-32."""
    dtype = _VALUE_DTYPES[packet.value_bits]
    parts = [HEADER.pack(packet.version, _flags(packet), packet.round, packet.n_weights)]
    if packet.frame_type is FrameType.FULL:
        parts.append(packet.values.astype(dtype).tobytes())
    elif packet.frame_type in (FrameType.SPARSE, FrameType.REINIT_SPARSE):
        parts.append(COUNT.pack(packet.k_count))
        if packet.frame_type is FrameType.REINIT_SPARSE:
            parts.append(SEED.pack(packet.seed))
        if packet.mask_encoding is MaskEncoding.BLOCK_CODED:
            parts.append(blockcode.encode_mask(packet.mask, packet.k_count))
        else:
            parts.append(np.packbits(packet.mask).tobytes())
        parts.append(packet.values.astype(dtype).tobytes())
    body = b"".join(parts)
    return body + CHECKSUM.pack(zlib.crc32(body))


def _take(body: bytes, offset: int, size: int) -> bytes:
    if offset + size > len(body):
        raise TruncatedFrame(
            f"frame ends at byte {len(body)}, need {offset + size}"
        )
    return body[offset : offset + size]


def decode_packet(data: bytes) -> UpdatePacket:
    """
    Parse and verify a frame.

    Raises:
        TruncatedFrame: frame shorter than its declared content
        ChecksumMismatch: CRC-32 does not match
        UnsupportedVersion: unknown version, value width or flag bits
        MaskCountMismatch: mask popcount differs from k_count
    """
    data = bytes(data)
    if len(data) < SKIP_FRAME_BYTES:
        raise TruncatedFrame(f"frame of {len(data)} bytes is shorter than a header")
    body = data[: -CHECKSUM.size]
    (checksum,) = CHECKSUM.unpack(data[-CHECKSUM.size :])
    if zlib.crc32(body) != checksum:
        raise ChecksumMismatch(f"CRC-32 {zlib.crc32(body):#010x} != {checksum:#010x}")

    version, flags, round_index, n_weights = HEADER.unpack_from(body)
    if version != VERSION:
        raise UnsupportedVersion(f"frame version {version}, expected {VERSION}")
    width = (flags >> 3) & 0b11
    if flags & _RESERVED_FLAGS or width >= len(VALUE_BITS):
        raise UnsupportedVersion(f"unknown flag bits {flags:#04x}")
    frame_type = FrameType(flags & 0b11)
    encoding = MaskEncoding((flags >> 2) & 1)
    value_bits = VALUE_BITS[width]
    dtype = _VALUE_DTYPES[value_bits]
    offset = HEADER.size

    mask = None
    seed = None
    k_count = 0
    values = np.zeros(0)
    if frame_type is FrameType.FULL:
        k_count = n_weights
        raw = _take(body, offset, n_weights * dtype.itemsize)
        values = np.frombuffer(raw, dtype=dtype).astype(np.float64)
        offset += len(raw)
    elif frame_type in (FrameType.SPARSE, FrameType.REINIT_SPARSE):
        (k_count,) = COUNT.unpack(_take(body, offset, COUNT.size))
        offset += COUNT.size
        if k_count > n_weights:
            raise MaskCountMismatch(f"k_count {k_count} exceeds I={n_weights}")
        if frame_type is FrameType.REINIT_SPARSE:
            (seed,) = SEED.unpack(_take(body, offset, SEED.size))
            offset += SEED.size
        if encoding is MaskEncoding.BLOCK_CODED:
            mask, offset = blockcode.decode_mask(body, offset, n_weights, k_count)
        else:
            raw = _take(body, offset, math.ceil(n_weights / 8))
            mask = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:n_weights]
            mask = mask.astype(bool)
            offset += len(raw)
        ones = int(np.count_nonzero(mask))
        if ones != k_count:
            raise MaskCountMismatch(f"mask has {ones} ones, header says {k_count}")
        raw = _take(body, offset, k_count * dtype.itemsize)
        values = np.frombuffer(raw, dtype=dtype).astype(np.float64)
        offset += len(raw)
    if offset != len(body):
        raise TruncatedFrame(
            f"frame length {len(body)} does not match its content ({offset} bytes)"
        )

    return UpdatePacket(
        round=round_index,
        frame_type=frame_type,
        n_weights=n_weights,
        value_bits=value_bits,
        k_count=k_count,
        mask_encoding=encoding,
        seed=seed,
        mask=mask,
        values=values,
        version=version,
    )


def apply_packet(
    deployed: WeightVector, packet: UpdatePacket, arch: Architecture
) -> WeightVector:
    """Edge-side reconstruction of the new deployed weights."""
    if packet.n_weights != arch.n_weights or len(deployed) != arch.n_weights:
        raise DimensionError(
            f"frame for I={packet.n_weights} applied to {arch} (I={arch.n_weights})"
        )
    if packet.frame_type is FrameType.SKIP:
        return deployed.copy()
    if packet.frame_type is FrameType.FULL:
        return WeightVector(packet.values, arch)
    if packet.frame_type is FrameType.REINIT_SPARSE:
        values = init_weights(arch, packet.seed).values.copy()
        log.debug(f"round {packet.round}: reinitialized from seed {packet.seed}")
    else:
        values = deployed.values.copy()
    values[packet.mask] = packet.values
    return WeightVector(values, arch)
