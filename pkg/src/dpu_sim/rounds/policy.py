"""
Re-initialization and update acceptance rules.
"""

import logging
from dataclasses import dataclass

log = logging.getLogger(__name__)


def reinit_due(current_size: int, last_reinit_size: int) -> bool:
    """True iff the training set has more than doubled since the last re-init."""
    if current_size < 1 or last_reinit_size < 1:
        raise ValueError(
            f"dataset sizes must be positive, got {current_size} and {last_reinit_size}"
        )
    return current_size > 2 * last_reinit_size


def accept_update(val_acc_candidate: float, val_acc_deployed: float) -> bool:
    """A candidate replaces the deployed model only if it is strictly better."""
    return val_acc_candidate > val_acc_deployed


@dataclass(frozen=True)
class ReinitPolicy:
    """
    When to restart training from the seed-regenerable initial network.

    kind is "doubling" (restart once |D^r| > 2 |D^last|), "never", or
    "every" (restart every `interval` rounds).
    """

    kind: str = "doubling"
    interval: int | None = None

    def __post_init__(self):
        if self.kind not in ("doubling", "never", "every"):
            raise ValueError(f"unknown re-initialization policy {self.kind!r}")
        if self.kind == "every" and (self.interval is None or self.interval < 1):
            raise ValueError("every:n re-initialization needs n >= 1")
        if self.kind != "every" and self.interval is not None:
            raise ValueError(f"{self.kind} re-initialization takes no interval")

    @classmethod
    def parse(cls, text: str) -> "ReinitPolicy":
        """Parse "doubling", "never" or "every:n"."""
        text = str(text).strip().lower()
        if text.startswith("every:"):
            try:
                interval = int(text.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"invalid re-initialization interval in {text!r}") from None
            return cls("every", interval)
        return cls(text)

    def __str__(self) -> str:
        return f"every:{self.interval}" if self.kind == "every" else self.kind

    def due(
        self,
        round_index: int,
        current_size: int,
        last_reinit_size: int,
        last_reinit_round: int,
    ) -> bool:
        if self.kind == "never":
            return False
        if self.kind == "every":
            return round_index - last_reinit_round >= self.interval
        return reinit_due(current_size, last_reinit_size)
