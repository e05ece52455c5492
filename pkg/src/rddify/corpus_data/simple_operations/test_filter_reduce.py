from filter_reduce import filter_reduce


def test_sums_only_evens():
    assert filter_reduce([1, 2, 3, 4]) == 6


def test_all_even():
    assert filter_reduce([2, 4, 6]) == 12


def test_negative_values():
    assert filter_reduce([-2, -1, 5, 8]) == 6
