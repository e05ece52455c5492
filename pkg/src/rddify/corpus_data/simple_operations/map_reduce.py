def map_reduce(strings):
    result = ""
    for s in strings:
        lower = s.lower()
        result += lower
    return result
