from flatmap_count import flatmap_count


def test_counts_every_item():
    assert flatmap_count([[1, 2], [3]]) == 3


def test_ragged_lists():
    assert flatmap_count([[], [1, 2, 3], [4]]) == 4


def test_empty_outer_list():
    assert flatmap_count([]) == 0
