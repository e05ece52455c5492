def flatmap_distinct_count(list_of_lists):
    flat = []
    for sublist in list_of_lists:
        for item in sublist:
            flat.append(item)
    unique = []
    for item in flat:
        if item not in unique:
            unique.append(item)
    return len(unique)
