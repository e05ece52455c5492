def flatmap_count(list_of_lists):
    count = 0
    for sublist in list_of_lists:
        for item in sublist:
            count += 1
    return count
