from multiple_loop import multiple_loop


def test_both_loops():
    assert multiple_loop([1, 2, 3, 4], ["hi", "you"]) == ([2, 4], [2, 3])


def test_empty_inputs():
    assert multiple_loop([], []) == ([], [])


def test_order_preserved():
    assert multiple_loop([4, 2], ["abc"]) == ([4, 2], [3])
