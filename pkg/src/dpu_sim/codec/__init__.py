"""
Binary update frames: header, mask section, values and CRC-32.
"""

from dpu_sim.codec.blockcode import coded_mask_bits, decode_mask, encode_mask
from dpu_sim.codec.errors import (
    ChecksumMismatch,
    MaskCountMismatch,
    PacketError,
    TruncatedFrame,
    UnsupportedVersion,
)
from dpu_sim.codec.packet import (
    SKIP_FRAME_BYTES,
    VERSION,
    FrameType,
    MaskEncoding,
    UpdatePacket,
    apply_packet,
    choose_mask_encoding,
    decode_packet,
    encode_packet,
    full_packet,
    quantize,
    skip_packet,
    sparse_packet,
)

__all__ = [
    "ChecksumMismatch",
    "FrameType",
    "MaskCountMismatch",
    "MaskEncoding",
    "PacketError",
    "SKIP_FRAME_BYTES",
    "TruncatedFrame",
    "UnsupportedVersion",
    "UpdatePacket",
    "VERSION",
    "apply_packet",
    "choose_mask_encoding",
    "coded_mask_bits",
    "decode_mask",
    "decode_packet",
    "encode_mask",
    "encode_packet",
    "full_packet",
    "quantize",
    "skip_packet",
    "sparse_packet",
]
