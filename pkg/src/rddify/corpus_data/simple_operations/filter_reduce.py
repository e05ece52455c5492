def filter_reduce(numbers):
    total = 0
    for num in numbers:
        if num % 2 == 0:
            total += num
    return total
