"""Terminal progress for batch runs.

:func:`bar_text` draws a gradient bar for a fraction and keeps no state.
:class:`SweepProgress` feeds it from ``(done, total)`` callbacks and shows it
on stderr through ``rich.live.Live``. It draws nothing when stderr is not a
terminal, so CSV on stdout and redirected logs stay clean.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Optional

from rich.color import Color, blend_rgb
from rich.console import Console
from rich.live import Live
from rich.text import Text

MIN_BAR = 10


def clamp01(value: float) -> float:
    return max(0.0, min(1.0, float(value)))


@dataclass(frozen=True)
class BarStyle:
    start_color: str = "#3366ff"
    end_color: str = "#66ffcc"
    empty_color: str = "#3a3a3a"
    label_style: str = "bold"
    max_width: int = 60


def bar_text(fraction: float, width: int, style: BarStyle = BarStyle()) -> Text:
    """``[████░░░]`` with the filled part blended from start to end colour."""
    width = max(MIN_BAR, int(width))
    filled = int(round(clamp01(fraction) * width))
    start = Color.parse(style.start_color).get_truecolor()
    end = Color.parse(style.end_color).get_truecolor()
    out = Text("[")
    for i in range(filled):
        out.append("█", style=blend_rgb(start, end, i / max(1, width - 1)).hex)
    out.append("░" * (width - filled), style=style.empty_color)
    out.append("]")
    return out


def format_eta(seconds: Optional[float]) -> str:
    if seconds is None:
        return "--:--"
    minutes, secs = divmod(int(round(seconds)), 60)
    hours, minutes = divmod(minutes, 60)
    return f"{hours}:{minutes:02d}:{secs:02d}" if hours else f"{minutes:02d}:{secs:02d}"


class SweepProgress:
    """Context manager reporting ``done/total`` of a batch.

    ``update`` is thread-safe and has the signature of the ``on_progress``
    callback taken by :func:`mprlab.simulator.sweep`.
    """

    def __init__(self, label: str, total: int, console: Optional[Console] = None, style: BarStyle = BarStyle()):
        self.label = label
        self.total = max(1, int(total))
        self.done = 0
        self.console = console or Console(stderr=True)
        self.style = style
        self._lock = threading.Lock()
        self._live: Optional[Live] = None
        self._started = time.monotonic()

    @property
    def enabled(self) -> bool:
        return self.console.is_terminal

    @property
    def fraction(self) -> float:
        return clamp01(self.done / self.total)

    def eta(self) -> Optional[float]:
        """Seconds left at the average rate so far; None before the first run ends."""
        if self.done == 0:
            return None
        elapsed = time.monotonic() - self._started
        return elapsed * (self.total - self.done) / self.done

    def render(self) -> Text:
        counts = f" {self.done}/{self.total} {int(round(self.fraction * 100)):3d}%  eta {format_eta(self.eta())}"
        width = min(self.console.width, self.style.max_width) - len(self.label) - len(counts) - 3
        text = Text(f"{self.label} ", style=self.style.label_style)
        text.append_text(bar_text(self.fraction, width, self.style))
        text.append(counts, style="dim")
        return text

    def __enter__(self) -> "SweepProgress":
        self._started = time.monotonic()
        if self.enabled:
            self._live = Live(self.render(), console=self.console, transient=True, refresh_per_second=8)
            self._live.start()
        return self

    def __exit__(self, *exc) -> None:
        if self._live is not None:
            self._live.stop()
            self._live = None

    def _set(self, done: int, total: Optional[int]) -> None:
        if total is not None:
            self.total = max(1, int(total))
        self.done = max(0, min(int(done), self.total))
        if self._live is not None:
            self._live.update(self.render())

    def update(self, done: int, total: Optional[int] = None) -> None:
        with self._lock:
            self._set(done, total)

    def advance(self, step: int = 1) -> None:
        with self._lock:
            self._set(self.done + step, None)


__all__ = ["BarStyle", "SweepProgress", "bar_text", "clamp01", "format_eta"]
