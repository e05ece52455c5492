def map_distinct_sort(words):
    lowered = []
    for word in words:
        lowered.append(word.lower())
    unique = []
    for item in lowered:
        if item not in unique:
            unique.append(item)
    result = []
    for item in unique:
        result.append(item)
        result.sort()
    return result
