from flatmap import flatmap


def test_flattens_in_order():
    assert flatmap([[1, 2], [3]]) == [1, 2, 3]


def test_skips_empty_inner_lists():
    assert flatmap([[], [4], []]) == [4]


def test_empty_outer_list():
    assert flatmap([]) == []
