"""Time-tagged pixel events: parsing, cross-region coincidences and images.

The sensor carries two copies of the down-converted light in regions A and
B.  A photon pair shows up as one event in each region within a few ns; B
pixels map onto A pixels by a fixed translation.
"""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass

import numpy as np

from ._matching import BACKEND, greedy_match
from .errors import EventParseError
from .fields import GridSpec
from .spdc import CoincidenceImage

__all__ = [
    "EventTable", "RegionLayout", "PairTable", "StreamTruth", "SpatialCorrelation",
    "parse_events", "write_events", "write_pairs", "read_pairs", "find_coincidences",
    "estimate_accidentals", "spatial_correlation", "background_filter",
    "coincidence_image_from_pairs", "synthesize_event_stream", "matching_scores",
    "DEFAULT_WINDOW_NS", "ACCIDENTAL_OFFSET_NS", "BACKEND",
]

DEFAULT_WINDOW_NS = 5.0
ACCIDENTAL_OFFSET_NS = 100.0
EVENT_HEADER = "x,y,toa_ns"
PAIR_HEADER = "xa,ya,xb,yb,dt_ns"
MAX_REJECT_FRACTION = 0.01


@dataclass
class EventTable:
    """Columnar events; ``rejected`` counts malformed input lines."""

    x: np.ndarray
    y: np.ndarray
    toa: np.ndarray
    rejected: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.int64)
        self.y = np.asarray(self.y, dtype=np.int64)
        self.toa = np.asarray(self.toa, dtype=np.float64)
        if not (self.x.shape == self.y.shape == self.toa.shape) or self.x.ndim != 1:
            raise ValueError("x, y and toa must be 1-D arrays of equal length")

    def __len__(self):
        return self.x.size

    def take(self, idx) -> EventTable:
        return EventTable(self.x[idx], self.y[idx], self.toa[idx])

    @staticmethod
    def concat(tables) -> EventTable:
        tables = list(tables)
        return EventTable(np.concatenate([t.x for t in tables]),
                          np.concatenate([t.y for t in tables]),
                          np.concatenate([t.toa for t in tables]))


def _parse_rect(spec) -> tuple[int, int, int, int]:
    if isinstance(spec, str):
        parts = spec.split(",")
        if len(parts) != 4:
            raise ValueError(f"region must be x0,y0,w,h (got {spec!r})")
        spec = [int(p) for p in parts]
    x0, y0, w, h = (int(v) for v in spec)
    if x0 < 0 or y0 < 0 or w <= 0 or h <= 0:
        raise ValueError(f"invalid region {spec}")
    return x0, y0, w, h


@dataclass(frozen=True)
class RegionLayout:
    """Two equal, disjoint rectangles (x0, y0, w, h); B maps onto A by translation."""

    a: tuple[int, int, int, int]
    b: tuple[int, int, int, int]

    def __post_init__(self):
        a, b = _parse_rect(self.a), _parse_rect(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a[2:] != b[2:]:
            raise ValueError(f"regions differ in size: {a[2:]} vs {b[2:]}")
        overlap_x = a[0] < b[0] + b[2] and b[0] < a[0] + a[2]
        overlap_y = a[1] < b[1] + b[3] and b[1] < a[1] + a[3]
        if overlap_x and overlap_y:
            raise ValueError("regions A and B overlap")

    @classmethod
    def from_strings(cls, a: str, b: str) -> RegionLayout:
        return cls(_parse_rect(a), _parse_rect(b))

    @property
    def size(self) -> tuple[int, int]:
        return self.a[2], self.a[3]

    def _inside(self, rect, x, y):
        x0, y0, w, h = rect
        return (x >= x0) & (x < x0 + w) & (y >= y0) & (y < y0 + h)

    def region_of(self, x, y) -> np.ndarray:
        """0 for A, 1 for B, -1 outside both."""
        x, y = np.asarray(x), np.asarray(y)
        out = np.full(x.shape, -1, dtype=np.int8)
        out[self._inside(self.a, x, y)] = 0
        out[self._inside(self.b, x, y)] = 1
        return out

    def local_a(self, x, y):
        return np.asarray(x) - self.a[0], np.asarray(y) - self.a[1]

    def local_b(self, x, y):
        """B coordinates mapped into A-local coordinates."""
        return np.asarray(x) - self.b[0], np.asarray(y) - self.b[1]


@dataclass
class PairTable:
    """Matched pairs; ``ia``/``ib`` index the events they came from (or -1)."""

    xa: np.ndarray
    ya: np.ndarray
    xb: np.ndarray
    yb: np.ndarray
    dt: np.ndarray
    ia: np.ndarray | None = None
    ib: np.ndarray | None = None

    def __post_init__(self):
        for name in ("xa", "ya", "xb", "yb"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        self.dt = np.asarray(self.dt, dtype=np.float64)
        n = self.dt.size
        if self.ia is None:
            self.ia = np.full(n, -1, dtype=np.int64)
        if self.ib is None:
            self.ib = np.full(n, -1, dtype=np.int64)

    def __len__(self):
        return self.dt.size

    def take(self, sel) -> PairTable:
        return PairTable(self.xa[sel], self.ya[sel], self.xb[sel], self.yb[sel],
                         self.dt[sel], self.ia[sel], self.ib[sel])


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------

def _open_text(src):
    if isinstance(src, (str, os.PathLike)):
        return open(src, newline=""), True
    if isinstance(src, io.TextIOBase) or hasattr(src, "readline"):
        return src, False
    raise TypeError("expected a path or a text stream")


def parse_events(src, sensor: tuple[int, int] | None = None) -> EventTable:
    """Read ``x,y,toa_ns`` CSV in file order.

    Lines that are malformed (wrong field count, non-integer or negative
    pixel, non-finite or negative time, outside ``sensor``) are skipped and
    counted in ``rejected``; more than 1% of them aborts.
    """
    fh, close = _open_text(src)
    try:
        header = fh.readline()
        if header.strip().replace(" ", "") != EVENT_HEADER:
            raise EventParseError(f"expected header {EVENT_HEADER!r}, got {header.strip()!r}")
        xs, ys, ts = [], [], []
        rejected = total = 0
        for line in fh:
            line = line.strip()
            if not line:
                continue
            total += 1
            parts = line.split(",")
            try:
                if len(parts) != 3:
                    raise ValueError
                x, y, t = int(parts[0]), int(parts[1]), float(parts[2])
                if x < 0 or y < 0 or not math.isfinite(t) or t < 0:
                    raise ValueError
                if sensor is not None and (x >= sensor[0] or y >= sensor[1]):
                    raise ValueError
            except ValueError:
                rejected += 1
                continue
            xs.append(x)
            ys.append(y)
            ts.append(t)
    finally:
        if close:
            fh.close()
    if total and rejected > MAX_REJECT_FRACTION * total:
        raise EventParseError(f"{rejected} of {total} event lines are malformed")
    return EventTable(np.array(xs, dtype=np.int64), np.array(ys, dtype=np.int64),
                      np.array(ts, dtype=np.float64), rejected)


def write_events(events: EventTable, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(EVENT_HEADER + "\n")
        # repr round-trips float64 exactly
        fh.writelines(f"{x},{y},{t!r}\n" for x, y, t in
                      zip(events.x.tolist(), events.y.tolist(), events.toa.tolist()))


def write_pairs(pairs: PairTable, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(PAIR_HEADER + "\n")
        fh.writelines(f"{a},{b},{c},{d},{t!r}\n" for a, b, c, d, t in zip(
            pairs.xa.tolist(), pairs.ya.tolist(), pairs.xb.tolist(), pairs.yb.tolist(),
            pairs.dt.tolist()))


def read_pairs(path) -> PairTable:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != PAIR_HEADER:
            raise EventParseError(f"expected header {PAIR_HEADER!r}, got {header!r}")
        arr = np.loadtxt(fh, delimiter=",", ndmin=2)
    if arr.size == 0:
        arr = np.zeros((0, 5))
    return PairTable(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4])


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def _sorted_region(events: EventTable, sel: np.ndarray) -> np.ndarray:
    """Indices of selected events ordered by (toa, x, y): input order is irrelevant."""
    idx = np.flatnonzero(sel)
    order = np.lexsort((events.y[idx], events.x[idx], events.toa[idx]))
    return idx[order]


def find_coincidences(events: EventTable, layout: RegionLayout,
                      window_ns: float = DEFAULT_WINDOW_NS,
                      offset_ns: float = 0.0) -> PairTable:
    """One-to-one greedy matching of region-A to region-B events.

    A events are visited in time order and take the nearest-in-time unused B
    event with |t_B - offset - t_A| <= window; ties go to the earlier B.
    ``offset_ns`` shifts the window for accidental-rate controls.
    """
    if not window_ns > 0:
        raise ValueError("window_ns must be positive")
    region = layout.region_of(events.x, events.y)
    ia = _sorted_region(events, region == 0)
    ib = _sorted_region(events, region == 1)
    ta = np.ascontiguousarray(events.toa[ia])
    tb = np.ascontiguousarray(events.toa[ib] - offset_ns)
    ka, kb = greedy_match(ta, tb, float(window_ns))
    ea, eb = ia[ka], ib[kb]
    return PairTable(events.x[ea], events.y[ea], events.x[eb], events.y[eb],
                     events.toa[eb] - events.toa[ea], ea, eb)


def estimate_accidentals(events: EventTable, layout: RegionLayout,
                         window_ns: float = DEFAULT_WINDOW_NS,
                         offset_ns: float = ACCIDENTAL_OFFSET_NS) -> int:
    """Pair count with the window displaced by ``offset_ns`` (no true pairs left)."""
    return len(find_coincidences(events, layout, window_ns, offset_ns))


def _offsets(pairs: PairTable, layout: RegionLayout):
    xa, ya = layout.local_a(pairs.xa, pairs.ya)
    xb, yb = layout.local_b(pairs.xb, pairs.yb)
    return xa, ya, xb, yb


@dataclass
class SpatialCorrelation:
    axis: str
    histogram: np.ndarray
    diagonal_fraction: float


def spatial_correlation(pairs: PairTable, layout: RegionLayout, axis: str = "x",
                        band: int = 1) -> SpatialCorrelation:
    """2-D histogram of (A coordinate, mapped B coordinate) along one axis.

    ``diagonal_fraction`` is the share of pairs within ``band`` pixels of
    the diagonal.
    """
    if len(pairs) == 0:
        raise ValueError("no pairs to correlate")
    xa, ya, xb, yb = _offsets(pairs, layout)
    if axis == "x":
        u, v, size = xa, xb, layout.size[0]
    elif axis == "y":
        u, v, size = ya, yb, layout.size[1]
    else:
        raise ValueError("axis must be 'x' or 'y'")
    hist = np.zeros((size, size), dtype=np.int64)
    np.add.at(hist, (u, v), 1)
    frac = float(np.mean(np.abs(u - v) <= band))
    return SpatialCorrelation(axis, hist, frac)


def background_filter(pairs: PairTable, layout: RegionLayout, max_offset_px: int = 1) -> PairTable:
    """Keep pairs whose mapped positions agree within ``max_offset_px`` on both axes."""
    if max_offset_px < 0:
        raise ValueError("max_offset_px must be >= 0")
    xa, ya, xb, yb = _offsets(pairs, layout)
    keep = (np.abs(xa - xb) <= max_offset_px) & (np.abs(ya - yb) <= max_offset_px)
    return pairs.take(keep)


def coincidence_image_from_pairs(pairs: PairTable, layout: RegionLayout, side: str = "A",
                                 pitch: float = 0.055) -> CoincidenceImage:
    """Per-pixel pair counts in region-local coordinates of ``side`` ("A" or "B")."""
    w, h = layout.size
    if w != h:
        raise ValueError("coincidence images need square regions")
    if side == "A":
        u, v = layout.local_a(pairs.xa, pairs.ya)
    elif side == "B":
        u, v = layout.local_b(pairs.xb, pairs.yb)
    else:
        raise ValueError("side must be 'A' or 'B'")
    img = np.zeros((w, h), dtype=np.int64)
    np.add.at(img, (u, v), 1)
    return CoincidenceImage(GridSpec(w, pitch), img, plane="image")


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------

@dataclass
class StreamTruth:
    """Event indices of the planted pairs in the synthesized table."""

    a: np.ndarray
    b: np.ndarray


def synthesize_event_stream(expected: CoincidenceImage, layout: RegionLayout,
                            pair_rate: float, duration: float, jitter_ns: float = 0.0,
                            background_rate: float = 0.0, seed: int = 0):
    """Poisson-timed pairs drawn from ``expected`` plus uniform background.

    Pair positions follow the normalized image (A-local pixel = image
    index); the B event sits at the mapped pixel with Gaussian time jitter.
    Background events land uniformly in time and over both regions.
    Returns ``(events, truth)`` with events in time order.
    """
    if pair_rate < 0 or background_rate < 0 or duration < 0 or jitter_ns < 0:
        raise ValueError("rates, duration and jitter must be nonnegative")
    w, h = layout.size
    counts = np.asarray(expected.counts, dtype=float)
    if counts.shape != (w, h):
        raise ValueError(f"expected image {counts.shape} does not match region size {(w, h)}")
    if np.any(counts < 0) or not counts.sum() > 0:
        raise ValueError("expected image must be nonnegative with positive total")
    rng = np.random.default_rng(seed)
    span = duration * 1e9
    n_pairs = rng.poisson(pair_rate * duration)
    pix = rng.choice(counts.size, size=n_pairs, p=(counts / counts.sum()).ravel())
    u, v = np.unravel_index(pix, (w, h))
    t = rng.uniform(0, span, n_pairs)
    tb = np.clip(t + rng.normal(0, jitter_ns, n_pairs) if jitter_ns > 0 else t, 0, None)

    n_bg = rng.poisson(background_rate * duration)
    side = rng.integers(0, 2, n_bg)
    bu, bv = rng.integers(0, w, n_bg), rng.integers(0, h, n_bg)
    bx = np.where(side == 0, layout.a[0], layout.b[0]) + bu
    by = np.where(side == 0, layout.a[1], layout.b[1]) + bv
    bt = rng.uniform(0, span, n_bg)

    x = np.concatenate([layout.a[0] + u, layout.b[0] + u, bx])
    y = np.concatenate([layout.a[1] + v, layout.b[1] + v, by])
    toa = np.concatenate([t, tb, bt])
    order = np.argsort(toa, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    truth = StreamTruth(rank[:n_pairs], rank[n_pairs:2 * n_pairs])
    return EventTable(x[order], y[order], toa[order]), truth


def matching_scores(pairs: PairTable, truth: StreamTruth) -> dict:
    """Recall over planted pairs and precision over reported pairs."""
    planted = set(zip(truth.a.tolist(), truth.b.tolist()))
    found = set(zip(pairs.ia.tolist(), pairs.ib.tolist()))
    hits = len(planted & found)
    return {
        "planted": len(planted),
        "reported": len(pairs),
        "true_positives": hits,
        "recall": hits / len(planted) if planted else 1.0,
        "precision": hits / len(pairs) if len(pairs) else 1.0,
    }
