def multiple_loop(numbers, words):
    evens = []
    for num in numbers:
        if num % 2 == 0:
            evens.append(num)
    lengths = []
    for word in words:
        lengths.append(len(word))
    return evens, lengths
