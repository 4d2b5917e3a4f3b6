import random

import pytest

from eonvne.errors import OverlapError
from eonvne.spectrum import SpectrumState, commit, dump, first_fit, rollback


def scan(state, links, n):
    """Oracle: try every start 1..S-n+1 and check each slice individually."""
    for sb in range(1, state.slice_count - n + 2):
        if all(state.is_free(l, s) for l in links for s in range(sb, sb + n)):
            return sb, sb + n - 1
    return None


def test_empty_state_starts_at_one():
    assert first_fit(SpectrumState(3, 16), [0, 2], 4) == (1, 4)


def test_first_gap():
    st = SpectrumState(1, 8)
    commit(st, [0], (1, 3), "x")
    assert first_fit(st, [0], 2) == (4, 5)


def test_too_wide_and_bad_width():
    st = SpectrumState(1, 8)
    assert first_fit(st, [0], 9) is None
    with pytest.raises(ValueError):
        first_fit(st, [0], 0)


def test_first_fit_is_a_pure_probe():
    st = SpectrumState(2, 8)
    before = st.snapshot()
    first_fit(st, [0, 1], 3)
    assert st.snapshot() == before


def test_commit_blocks_reuse_and_disjoint_paths_ignore_each_other():
    st = SpectrumState(3, 10)
    commit(st, [0, 1], (1, 4), "a")
    assert first_fit(st, [1], 4) == (5, 8)
    assert first_fit(st, [2], 4) == (1, 4)
    with pytest.raises(OverlapError):
        commit(st, [1], (4, 5), "b")
    with pytest.raises(OverlapError):
        commit(st, [2], (9, 11), "b")


def test_rollback_absent_owner_is_noop():
    st = SpectrumState(2, 8)
    commit(st, [0], (2, 3), "a")
    before = st.snapshot()
    rollback(st, "nobody")
    assert st.snapshot() == before


@pytest.mark.parametrize("seed", range(40))
def test_first_fit_matches_scan(seed):
    rng = random.Random(seed)
    st = SpectrumState(5, 24)
    for i in range(rng.randint(0, 14)):
        links = rng.sample(range(5), rng.randint(1, 3))
        n = rng.randint(1, 6)
        rng_ = first_fit(st, links, n)
        if rng_:
            commit(st, links, rng_, i)
    for _ in range(20):
        links = rng.sample(range(5), rng.randint(1, 4))
        n = rng.randint(1, 10)
        assert first_fit(st, links, n) == scan(st, links, n)


@pytest.mark.parametrize("seed", range(30))
def test_commit_rollback_fuzz(seed):
    rng = random.Random(seed)
    st = SpectrumState(6, 20)
    history = []
    expected_cells = {}
    for step in range(60):
        if history and rng.random() < 0.35:
            owner = rng.choice(history)
            before = {c for c, o in expected_cells.items() if o != owner}
            rollback(st, owner)
            expected_cells = {c: o for c, o in expected_cells.items() if o != owner}
            history.remove(owner)
            assert {c for c in expected_cells} == before
        else:
            links = rng.sample(range(6), rng.randint(1, 3))
            n = rng.randint(1, 5)
            win = first_fit(st, links, n)
            if win is None:
                continue
            owner = ("o", step)
            commit(st, links, win, owner)
            history.append(owner)
            for l in links:
                for s in range(win[0], win[1] + 1):
                    assert (l, s) not in expected_cells
                    expected_cells[(l, s)] = owner
        # invariants: single owner per slice, contiguous identical range along each commit
        for l in range(6):
            for s in range(1, 21):
                assert st.is_free(l, s) == ((l, s) not in expected_cells)
                assert st.owner_at(l, s) == expected_cells.get((l, s))
        assert st.occupied_count() == len(expected_cells)
        total = sum((hi - lo + 1) * len(ls) for o in st.owners() for ls, lo, hi in st.ranges_of(o))
        assert total == st.occupied_count()


def test_commit_rollback_restores_bit_exact_state():
    rng = random.Random(3)
    st = SpectrumState(4, 16)
    for i in range(5):
        commit(st, [i % 4], (1 + 3 * i, 2 + 3 * i), f"base{i}")
    before = st.copy()
    for j in range(4):
        w = first_fit(st, [1, 2], rng.randint(1, 2))
        commit(st, [1, 2], w, "tmp")
    rollback(st, "tmp")
    assert st == before


def test_first_fit_monotone_under_more_occupancy():
    rng = random.Random(11)
    for _ in range(200):
        st = SpectrumState(3, 16)
        links = [0, 1]
        n = rng.randint(1, 4)
        base = first_fit(st, links, n)
        for i in range(rng.randint(1, 6)):
            l = rng.randrange(3)
            s = rng.randint(1, 16)
            if st.is_free(l, s):
                commit(st, [l], (s, s), i)
            nxt = first_fit(st, links, n)
            if nxt is None:
                break
            assert nxt[0] >= base[0]
            base = nxt


def test_dump_golden(diamond_topo):
    st = SpectrumState.for_topology(diamond_topo.with_slice_count(8))
    commit(st, [0, 1], (1, 3), "x")
    commit(st, [1], (4, 5), "y")
    assert dump(st) == "0 |AAA.....|\n1 |AAABB...|\n2 |........|\n3 |........|\n4 |........|\n5 |........|\n"
    text = dump(st, diamond_topo)
    assert text.splitlines()[0] == "0 A-B |AAA.....|"
