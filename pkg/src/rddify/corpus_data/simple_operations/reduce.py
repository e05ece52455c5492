def reduce(numbers):
    total = 0
    for num in numbers:
        total += num
    return total
