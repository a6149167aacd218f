"""
Per-round metric records.
"""

from dataclasses import dataclass, field

CSV_FIELDS = (
    "round",
    "train_loss",
    "val_acc",
    "test_acc",
    "bytes_sent",
    "reinit",
    "skipped",
    "mask_count",
    "new_samples",
)


@dataclass(frozen=True)
class RoundLog:
    """
    Metrics of one round.

    bytes_sent is the size of the frame actually emitted (a skip frame on
    rejected rounds). val_acc and test_acc belong to the weights the edge
    serves after the round.
    """

    round: int
    method: str
    seed: int
    train_loss: float
    val_acc: float
    test_acc: float
    bytes_sent: int
    reinit: bool
    skipped: bool
    mask_count: int
    new_samples: int
    train_size: int
    wall_time: float = field(default=0.0, compare=False)

    def csv_row(self) -> list[str]:
        row = []
        for name in CSV_FIELDS:
            value = getattr(self, name)
            if isinstance(value, (bool, int)):
                row.append(str(int(value)))
            else:
                row.append(repr(float(value)))
        return row
