"""Per-link slice occupancy with First-fit probing, commits and owner rollback.

Slices are numbered 1..S as in the optical-grid convention; internally each
link's occupancy is an integer bitmask with bit ``s - 1`` for slice ``s``.
"""

from __future__ import annotations

import string
from typing import Hashable, Iterable

from .errors import OverlapError
from .topology import SPath

Owner = Hashable


def _window(sb: int, n: int) -> int:
    return ((1 << n) - 1) << (sb - 1)


class SpectrumState:
    def __init__(self, link_count: int, slice_count: int):
        self.link_count = link_count
        self.slice_count = slice_count
        self._masks = [0] * link_count
        # owner -> list of (links, s_b, s_t) in commit order
        self._owned: dict[Owner, list[tuple[tuple[int, ...], int, int]]] = {}

    @classmethod
    def for_topology(cls, topo) -> "SpectrumState":
        return cls(len(topo.links), topo.slice_count)

    def copy(self) -> "SpectrumState":
        other = SpectrumState(self.link_count, self.slice_count)
        other._masks = list(self._masks)
        other._owned = {k: list(v) for k, v in self._owned.items()}
        return other

    def snapshot(self) -> tuple:
        owned = tuple(sorted((repr(k), tuple(v)) for k, v in self._owned.items()))
        return (self.slice_count, tuple(self._masks), owned)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SpectrumState) and self.snapshot() == other.snapshot()

    def mask(self, link_id: int) -> int:
        return self._masks[link_id]

    def is_free(self, link_id: int, s: int) -> bool:
        return not (self._masks[link_id] >> (s - 1)) & 1

    def occupied_count(self) -> int:
        return sum(bin(m).count("1") for m in self._masks)

    def owners(self) -> list[Owner]:
        return list(self._owned)

    def ranges_of(self, owner: Owner) -> list[tuple[tuple[int, ...], int, int]]:
        return list(self._owned.get(owner, ()))

    def owner_at(self, link_id: int, s: int) -> Owner | None:
        for owner, records in self._owned.items():
            for links, sb, st in records:
                if link_id in links and sb <= s <= st:
                    return owner
        return None

    def union_mask(self, links: Iterable[int]) -> int:
        combined = 0
        for lid in links:
            combined |= self._masks[lid]
        return combined

    def first_fit(self, path: SPath | Iterable[int], n: int) -> tuple[int, int] | None:
        return first_fit(self, path, n)

    def commit(self, path: SPath | Iterable[int], rng: tuple[int, int], owner: Owner) -> "SpectrumState":
        return commit(self, path, rng, owner)

    def rollback(self, owner: Owner) -> "SpectrumState":
        return rollback(self, owner)

    def dump(self, topo=None) -> str:
        return dump(self, topo)


def _links_of(path: SPath | Iterable[int]) -> tuple[int, ...]:
    return path.links if isinstance(path, SPath) else tuple(path)


def first_fit(state: SpectrumState, path: SPath | Iterable[int], n: int) -> tuple[int, int] | None:
    """Lowest window of ``n`` slices free on every link of ``path``; the state is not modified."""
    if n < 1:
        raise ValueError("slice count must be >= 1")
    if n > state.slice_count:
        return None
    busy = state.union_mask(_links_of(path))
    win = (1 << n) - 1
    sb = 1
    last = state.slice_count - n + 1
    while sb <= last:
        clash = busy & (win << (sb - 1))
        if not clash:
            return sb, sb + n - 1
        # jump past the highest occupied slice inside the window
        sb = clash.bit_length() + 1
    return None


def commit(state: SpectrumState, path: SPath | Iterable[int], rng: tuple[int, int], owner: Owner) -> SpectrumState:
    links = _links_of(path)
    sb, st = rng
    if not (1 <= sb <= st <= state.slice_count):
        raise OverlapError(f"slice range {rng} outside 1..{state.slice_count}")
    win = _window(sb, st - sb + 1)
    for lid in links:
        if state._masks[lid] & win:
            raise OverlapError(f"slices {sb}..{st} already in use on link {lid}")
    for lid in links:
        state._masks[lid] |= win
    state._owned.setdefault(owner, []).append((links, sb, st))
    return state


def rollback(state: SpectrumState, owner: Owner) -> SpectrumState:
    for links, sb, st in state._owned.pop(owner, ()):
        win = _window(sb, st - sb + 1)
        for lid in links:
            state._masks[lid] &= ~win
    return state


_LETTERS = string.ascii_uppercase + string.ascii_lowercase


def dump(state: SpectrumState, topo=None) -> str:
    """One fixed-width row per link: '.' for free, a letter per owner (in first-commit order)."""
    letters = {owner: _LETTERS[i % len(_LETTERS)] for i, owner in enumerate(state._owned)}
    rows = [["."] * state.slice_count for _ in range(state.link_count)]
    for owner, records in state._owned.items():
        for links, sb, st in records:
            for lid in links:
                for s in range(sb, st + 1):
                    rows[lid][s - 1] = letters[owner]
    width = len(str(state.link_count - 1))
    lines = []
    for lid, row in enumerate(rows):
        label = f"{lid:>{width}}"
        if topo is not None:
            link = topo.links[lid]
            label += f" {link.a}-{link.b}"
        lines.append(f"{label} |{''.join(row)}|")
    if topo is not None:
        pad = max(len(l.split("|")[0]) for l in lines)
        lines = [l.split("|", 1)[0].ljust(pad) + "|" + l.split("|", 1)[1] for l in lines]
    return "\n".join(lines) + "\n"
