"""Independent reference computations, deliberately written as plain loops."""
import itertools
import math


def kmedoid_objective_direct(delta, z, k, alpha, beta, gamma):
    """Term-by-term value of the K-medoid QUBO objective for one binary state."""
    n = len(z)
    ones_quad = sum(z[i] * z[j] for i in range(n) for j in range(n))
    delta_quad = sum(z[i] * delta[i][j] * z[j] for i in range(n) for j in range(n))
    centrality = sum(z[i] * sum(delta[i][j] for j in range(n)) for i in range(n))
    size = sum(z)
    return gamma * ones_quad - alpha * 0.5 * delta_quad + beta * centrality - 2 * gamma * k * size


def generic_energy_direct(Q, c, offset, z):
    n = len(z)
    return sum(Q[i][j] * z[i] * z[j] for i in range(n) for j in range(n)) + sum(c[i] * z[i] for i in range(n)) + offset


def all_states(n):
    return [list(bits) for bits in itertools.product((0, 1), repeat=n)]


def sample_std(xs):
    m = math.fsum(xs) / len(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def ols(x, y):
    """Textbook closed-form simple regression: (alpha, beta, se_beta)."""
    n = len(x)
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    sxx = math.fsum((a - mx) ** 2 for a in x)
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    beta = sxy / sxx
    alpha = my - beta * mx
    rss = math.fsum((b - alpha - beta * a) ** 2 for a, b in zip(x, y))
    return alpha, beta, math.sqrt(rss / (n - 2) / sxx)
