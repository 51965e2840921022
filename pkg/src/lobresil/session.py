"""Trading-session clock: wall-clock segments concatenated into one minute axis."""

from __future__ import annotations

from dataclasses import dataclass

MINUTE_MS = 60_000


def _parse_hhmm(s):
    h, m = s.strip().split(":")
    return int(h) * 60 + int(m)


@dataclass(frozen=True)
class Session:
    """Continuous-trading segments, e.g. ``(("09:30", "11:30"), ("13:00", "15:00"))``.

    Event timestamps are milliseconds on the concatenated axis, so the lunch
    break collapses to a single instant (``breaks_ms``).
    """

    segments: tuple = (("09:30", "11:30"), ("13:00", "15:00"))

    def __post_init__(self):
        prev_end = None
        for start, end in self.segments:
            a, b = _parse_hhmm(start), _parse_hhmm(end)
            if b <= a:
                raise ValueError(f"empty session segment {start}-{end}")
            if prev_end is not None and a < prev_end:
                raise ValueError("session segments overlap or are out of order")
            prev_end = b

    @classmethod
    def parse(cls, text: str) -> "Session":
        """``"09:30-11:30,13:00-15:00"`` -> Session."""
        segs = []
        for part in text.split(","):
            start, end = part.split("-")
            segs.append((start.strip(), end.strip()))
        return cls(tuple(segs))

    def __str__(self):
        return ",".join(f"{a}-{b}" for a, b in self.segments)

    @property
    def minutes(self) -> int:
        return sum(_parse_hhmm(b) - _parse_hhmm(a) for a, b in self.segments)

    @property
    def length_ms(self) -> int:
        return self.minutes * MINUTE_MS

    @property
    def breaks_ms(self) -> tuple:
        out, acc = [], 0
        for a, b in self.segments[:-1]:
            acc += _parse_hhmm(b) - _parse_hhmm(a)
            out.append(acc * MINUTE_MS)
        return tuple(out)

    def minute_index(self, ts_ms):
        """1-based minute index of a session timestamp (works on arrays)."""
        return ts_ms // MINUTE_MS + 1

    def wall_clock(self, ts_ms: int) -> str:
        """HH:MM:SS.mmm for a session timestamp."""
        minute, ms = divmod(int(ts_ms), MINUTE_MS)
        for a, b in self.segments:
            a, b = _parse_hhmm(a), _parse_hhmm(b)
            if minute < b - a:
                total = (a + minute) * MINUTE_MS + ms
                break
            minute -= b - a
        else:
            raise ValueError(f"timestamp {ts_ms} is outside the session")
        h, rem = divmod(total, 3_600_000)
        m, rem = divmod(rem, MINUTE_MS)
        return f"{h:02d}:{m:02d}:{rem / 1000:06.3f}"
