from flatmap_distinct_count import flatmap_distinct_count


def test_counts_unique_items():
    assert flatmap_distinct_count([[1, 2], [2, 3]]) == 3


def test_all_duplicates():
    assert flatmap_distinct_count([[5, 5], [5]]) == 1


def test_empty_outer_list():
    assert flatmap_distinct_count([]) == 0
