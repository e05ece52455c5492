def flatmap_filter_sort(matrix):
    flat = []
    for row in matrix:
        for value in row:
            flat.append(value)
    evens = []
    for value in flat:
        if value % 2 == 0:
            evens.append(value)
            evens.sort()
    return evens
