"""Sources of driving randomness for the samplers.

A stream hands out one finite real number per call to ``next()``.  Nothing
is assumed about the marginal distribution or about dependencies between
successive values; the samplers in this package are built to stay correct
regardless.  The one hard rule is that a stream never sees the chain state:
its evolution is a function of its own internal state only.

All streams are deterministic given their construction arguments, so any
experiment is reproducible from (parameters, seed).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError, StreamExhaustedError, StreamFormatError

# Salt mixed into the sticky stream's coin generator so the stick/fresh
# decisions are independent of the emitted values.
_COIN_SALT = 0x5E1F


class Stream:
    """Base class: a stateful source of finite reals."""

    def next(self) -> float:
        raise NotImplementedError

    def take(self, n: int) -> np.ndarray:
        """Draw ``n`` values as an array.  Equivalent to ``n`` calls to next()."""
        return np.array([self.next() for _ in range(n)], dtype=float)


class IidUniformStream(Stream):
    """Independent Uniform[0,1) draws from a seeded PCG64 generator.

    The seed-to-sequence mapping is fixed by numpy's ``default_rng``, which
    keeps experiment outputs stable across runs.
    """

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(seed)

    def next(self) -> float:
        return float(self._rng.random())

    def take(self, n: int) -> np.ndarray:
        return self._rng.random(n)


class ConstantStream(Stream):
    """Emits the same value forever."""

    def __init__(self, value: float):
        if not math.isfinite(value):
            raise ParameterError(f"constant stream value must be finite, got {value}")
        self.value = float(value)

    def next(self) -> float:
        return self.value

    def take(self, n: int) -> np.ndarray:
        return np.full(n, self.value)


class StickyStream(Stream):
    """Repeats its previous output with probability ``p``, else draws fresh.

    Fresh values are Uniform[0,1) from a generator seeded with ``base_seed``;
    with p=0 the output equals that generator's sequence exactly.  The
    stick/fresh coin comes from a separate internal generator so the emitted
    marginal stays Uniform[0,1) for every p.
    """

    def __init__(self, p: float, base_seed: int):
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"sticking probability must be in [0, 1], got {p}")
        self.p = float(p)
        self._values = np.random.default_rng(base_seed)
        self._coins = np.random.default_rng([base_seed, _COIN_SALT])
        self._last: float | None = None

    def next(self) -> float:
        coin = self._coins.random()
        if self._last is not None and coin < self.p:
            return self._last
        self._last = float(self._values.random())
        return self._last

    def take(self, n: int) -> np.ndarray:
        # Consumes the underlying generators exactly as n next() calls would:
        # one coin per draw, one value per non-stick.
        if n == 0:
            return np.empty(0)
        stick = self._coins.random(n) < self.p
        if self._last is None:
            stick[0] = False
        fresh = self._values.random(int(n - stick.sum()))
        counts = np.cumsum(~stick)  # number of fresh draws emitted so far
        if self._last is None:
            out = fresh[counts - 1]
        else:
            out = np.concatenate(([self._last], fresh))[counts]
        self._last = float(out[-1])
        return out


class ReplayStream(Stream):
    """Plays back a fixed sequence of values, then errors or cycles."""

    def __init__(self, values, on_exhaust: str = "error"):
        if on_exhaust not in ("error", "cycle"):
            raise ParameterError(f"on_exhaust must be 'error' or 'cycle', got {on_exhaust!r}")
        values = [float(v) for v in values]
        for v in values:
            if not math.isfinite(v):
                raise ParameterError("replay stream values must be finite")
        if not values:
            raise ParameterError("replay stream needs at least one value")
        self._values = values
        self._pos = 0
        self.on_exhaust = on_exhaust

    def next(self) -> float:
        if self._pos >= len(self._values):
            if self.on_exhaust == "error":
                raise StreamExhaustedError(
                    f"stream exhausted after {len(self._values)} draws"
                )
            self._pos = 0
        v = self._values[self._pos]
        self._pos += 1
        return v

    def reset(self) -> None:
        """Rewind to the start of the sequence."""
        self._pos = 0


class FileStream(ReplayStream):
    """Values read from a text file, one decimal real per line.

    Blank lines and lines starting with ``#`` are ignored.  The file is
    parsed eagerly so malformed content fails at construction with the
    offending line number.
    """

    def __init__(self, path, on_exhaust: str = "error"):
        values = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                text = raw.strip()
                if not text or text.startswith("#"):
                    continue
                try:
                    value = float(text)
                except ValueError:
                    raise StreamFormatError(
                        f"{path}: unparseable value {text!r} on line {lineno}",
                        line=lineno,
                    ) from None
                if not math.isfinite(value):
                    raise StreamFormatError(
                        f"{path}: non-finite value on line {lineno}", line=lineno
                    )
                values.append(value)
        if not values:
            raise StreamFormatError(f"{path}: no values found")
        super().__init__(values, on_exhaust=on_exhaust)
        self.path = path


class StreamRecorder(Stream):
    """Pass-through wrapper that logs every emitted value.

    The log supports replay in time-reverse order, which the reversibility
    tests use to unwind a sampler step.
    """

    def __init__(self, inner: Stream):
        self.inner = inner
        self.log: list[float] = []

    def next(self) -> float:
        value = self.inner.next()
        self.log.append(value)
        return value

    def mark(self) -> int:
        """Current log length; use with draws_since to slice one step's draws."""
        return len(self.log)

    def draws_since(self, mark: int) -> list[float]:
        return self.log[mark:]

    def replay_reversed(self) -> list[float]:
        return list(reversed(self.log))


def next_value(stream: Stream) -> float:
    """Draw the next value from a stream (function-style alias)."""
    return stream.next()


def make_sticky(p: float, base_seed: int) -> StickyStream:
    return StickyStream(p, base_seed)


def make_file_stream(path, on_exhaust: str = "error") -> FileStream:
    return FileStream(path, on_exhaust=on_exhaust)
