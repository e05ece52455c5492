def map_sum(words):
    total = 0
    for word in words:
        total += len(word)
    return total
