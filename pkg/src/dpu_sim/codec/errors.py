"""
Decode failures, each with a stable machine-readable code.
"""


class PacketError(ValueError):
    """Base class for frames that cannot be decoded."""

    code = "packet_error"


class ChecksumMismatch(PacketError):
    code = "checksum_mismatch"


class UnsupportedVersion(PacketError):
    code = "unsupported_version"


class TruncatedFrame(PacketError):
    code = "truncated_frame"


class MaskCountMismatch(PacketError):
    code = "mask_count_mismatch"
