"""
All-or-nothing output files for a command.

Writers get a temporary sibling path for every artifact. commit()
renames them into place; discard() removes them, so a failed command
leaves no partial outputs behind.
"""

import logging
import os
from pathlib import Path

logger = logging.getLogger(__name__)


class OutputSet:

    def __init__(self):
        self._pending: dict[Path, Path] = {}

    def path(self, target: str | Path) -> Path:
        """Temporary path to write instead of target."""
        target = Path(target)
        if target.parent and not target.parent.is_dir():
            raise OSError(f"output directory does not exist: {target.parent}")
        temp = target.with_name(f".{target.name}.{os.getpid()}.tmp")
        self._pending[target] = temp
        return temp

    def sidecar(self, target: str | Path, suffix: str) -> Path:
        """Register the file a writer puts next to target + suffix."""
        target = Path(target)
        return self.path(target.with_name(target.name + suffix))

    @property
    def targets(self) -> list[Path]:
        return list(self._pending)

    def commit(self) -> list[Path]:
        written = []
        for target, temp in self._pending.items():
            if temp.exists():
                os.replace(temp, target)
                written.append(target)
        self._pending.clear()
        for target in written:
            logger.debug("Wrote %s", target)
        return written

    def discard(self) -> None:
        for temp in self._pending.values():
            try:
                temp.unlink()
            except FileNotFoundError:
                pass
        self._pending.clear()

    def __enter__(self) -> "OutputSet":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.commit()
        else:
            self.discard()
