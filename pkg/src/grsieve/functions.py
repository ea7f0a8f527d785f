"""Test-function formulas.

Every function takes ``x`` of shape ``(..., n)`` and returns shape ``(...)``,
so it works on a single point and on a batch of points alike.
"""

import numpy as np

PI = np.pi


def _cols(x):
    x = np.asarray(x, dtype=float)
    return [x[..., i] for i in range(x.shape[-1])]


# -- scalable -----------------------------------------------------------------

def sphere(x):
    return np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)


def rastrigin(x):
    x = np.asarray(x, dtype=float)
    return 10.0 * x.shape[-1] + np.sum(x**2 - 10.0 * np.cos(2 * PI * x), axis=-1)


def ackley(x):
    x = np.asarray(x, dtype=float)
    return (-20.0 * np.exp(-0.2 * np.sqrt(np.mean(x**2, axis=-1)))
            - np.exp(np.mean(np.cos(2 * PI * x), axis=-1)) + 20.0 + np.e)


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    a, b = x[..., :-1], x[..., 1:]
    return np.sum(100.0 * (b - a**2) ** 2 + (1.0 - a) ** 2, axis=-1)


def schwefel(x):
    x = np.asarray(x, dtype=float)
    return 418.98288727243369 * x.shape[-1] - np.sum(x * np.sin(np.sqrt(np.abs(x))), axis=-1)


def levy(x):
    x = np.asarray(x, dtype=float)
    w = 1.0 + (x - 1.0) / 4.0
    first = np.sin(PI * w[..., 0]) ** 2
    mid = np.sum((w[..., :-1] - 1) ** 2 * (1 + 10 * np.sin(PI * w[..., :-1] + 1) ** 2), axis=-1)
    last = (w[..., -1] - 1) ** 2 * (1 + np.sin(2 * PI * w[..., -1]) ** 2)
    return first + mid + last


def styblinski_tang(x):
    x = np.asarray(x, dtype=float)
    return 0.5 * np.sum(x**4 - 16 * x**2 + 5 * x, axis=-1)


def griewank(x):
    x = np.asarray(x, dtype=float)
    i = np.sqrt(np.arange(1, x.shape[-1] + 1, dtype=float))
    return 1.0 + np.sum(x**2, axis=-1) / 4000.0 - np.prod(np.cos(x / i), axis=-1)


def whitley(x):
    x = np.asarray(x, dtype=float)
    xi = x[..., :, None]
    xj = x[..., None, :]
    y = 100.0 * (xi**2 - xj) ** 2 + (1.0 - xj) ** 2
    return np.sum(y**2 / 4000.0 - np.cos(y) + 1.0, axis=(-2, -1))


def xin_she_yang03(x, beta=15.0, m=5):
    x = np.asarray(x, dtype=float)
    u = np.sum((x / beta) ** (2 * m), axis=-1)
    v = np.sum(x**2, axis=-1)
    w = np.prod(np.cos(x) ** 2, axis=-1)
    return np.exp(-u) - 2.0 * np.exp(-v) * w


def sine_envelope(x):
    x = np.asarray(x, dtype=float)
    s = x[..., :-1] ** 2 + x[..., 1:] ** 2
    return np.sum((np.sin(np.sqrt(s)) ** 2 - 0.5) / (1.0 + 0.001 * s) ** 2 + 0.5, axis=-1)


def zakharov(x):
    x = np.asarray(x, dtype=float)
    s = np.sum(0.5 * np.arange(1, x.shape[-1] + 1) * x, axis=-1)
    return np.sum(x**2, axis=-1) + s**2 + s**4


# -- fixed dimension ----------------------------------------------------------

def devilliers_glasser02(x):
    x1, x2, x3, x4, x5 = _cols(x)
    total = 0.0
    for i in range(1, 25):
        t = 0.1 * (i - 1)
        y = 53.81 * 1.27**t * np.tanh(3.012 * t + np.sin(2.13 * t)) * np.cos(np.exp(0.507) * t)
        g = x1 * x2**t * np.tanh(x3 * t + np.sin(x4 * t)) * np.cos(t * np.exp(x5))
        total = total + (g - y) ** 2
    return total


def cross_leg_table(x):
    x1, x2 = _cols(x)
    r = np.sqrt(x1**2 + x2**2)
    g = np.abs(np.sin(x1) * np.sin(x2) * np.exp(np.abs(100.0 - r / PI)))
    return -1.0 / (g + 1.0) ** 0.1


def zimmerman(x):
    x1, x2 = _cols(x)

    def zp(t):
        return 100.0 * (1.0 + t)

    zh1 = 9.0 - x1 - x2
    zh2 = (x1 - 3.0) ** 2 + (x2 - 2.0) ** 2 - 16.0
    zh3 = x1 * x2 - 14.0
    terms = np.stack([zh1, zp(zh2) * np.sign(zh2), zp(zh3) * np.sign(zh3),
                      zp(-x1) * np.sign(x1), zp(-x2) * np.sign(x2)])
    return np.max(terms, axis=0)


def trefethen(x):
    x1, x2 = _cols(x)
    return (np.exp(np.sin(50 * x1)) + np.sin(60 * np.exp(x2)) + np.sin(70 * np.sin(x1))
            + np.sin(np.sin(80 * x2)) - np.sin(10 * (x1 + x2)) + 0.25 * (x1**2 + x2**2))


def bukin06(x):
    x1, x2 = _cols(x)
    return 100.0 * np.sqrt(np.abs(x2 - 0.01 * x1**2)) + 0.01 * np.abs(x1 + 10.0)


def branin(x):
    x1, x2 = _cols(x)
    b, c = 5.1 / (4 * PI**2), 5 / PI
    return (x2 - b * x1**2 + c * x1 - 6) ** 2 + 10 * (1 - 1 / (8 * PI)) * np.cos(x1) + 10


def goldstein_price(x):
    x1, x2 = _cols(x)
    a = 1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1**2 - 14 * x2 + 6 * x1 * x2 + 3 * x2**2)
    b = 30 + (2 * x1 - 3 * x2) ** 2 * (18 - 32 * x1 + 12 * x1**2 + 48 * x2 - 36 * x1 * x2
                                       + 27 * x2**2)
    return a * b


def six_hump_camel(x):
    x1, x2 = _cols(x)
    return (4 - 2.1 * x1**2 + x1**4 / 3) * x1**2 + x1 * x2 + (-4 + 4 * x2**2) * x2**2


def three_hump_camel(x):
    x1, x2 = _cols(x)
    return 2 * x1**2 - 1.05 * x1**4 + x1**6 / 6 + x1 * x2 + x2**2


def easom(x):
    x1, x2 = _cols(x)
    return -np.cos(x1) * np.cos(x2) * np.exp(-((x1 - PI) ** 2) - (x2 - PI) ** 2)


def shubert(x):
    x1, x2 = _cols(x)
    j = np.arange(1, 6, dtype=float)
    s1 = np.sum(j * np.cos((j + 1) * x1[..., None] + j), axis=-1)
    s2 = np.sum(j * np.cos((j + 1) * x2[..., None] + j), axis=-1)
    return s1 * s2


def matyas(x):
    x1, x2 = _cols(x)
    return 0.26 * (x1**2 + x2**2) - 0.48 * x1 * x2


def booth(x):
    x1, x2 = _cols(x)
    return (x1 + 2 * x2 - 7) ** 2 + (2 * x1 + x2 - 5) ** 2


def beale(x):
    x1, x2 = _cols(x)
    return ((1.5 - x1 + x1 * x2) ** 2 + (2.25 - x1 + x1 * x2**2) ** 2
            + (2.625 - x1 + x1 * x2**3) ** 2)


def drop_wave(x):
    x1, x2 = _cols(x)
    s = x1**2 + x2**2
    return -(1 + np.cos(12 * np.sqrt(s))) / (0.5 * s + 2)


def himmelblau(x):
    x1, x2 = _cols(x)
    return (x1**2 + x2 - 11) ** 2 + (x1 + x2**2 - 7) ** 2


def bohachevsky1(x):
    x1, x2 = _cols(x)
    return (x1**2 + 2 * x2**2 - 0.3 * np.cos(3 * PI * x1) - 0.4 * np.cos(4 * PI * x2) + 0.7)


def mccormick(x):
    x1, x2 = _cols(x)
    return np.sin(x1 + x2) + (x1 - x2) ** 2 - 1.5 * x1 + 2.5 * x2 + 1


def eggholder(x):
    x1, x2 = _cols(x)
    return (-(x2 + 47) * np.sin(np.sqrt(np.abs(x1 / 2 + x2 + 47)))
            - x1 * np.sin(np.sqrt(np.abs(x1 - (x2 + 47)))))


def holder_table(x):
    x1, x2 = _cols(x)
    r = np.sqrt(x1**2 + x2**2)
    return -np.abs(np.sin(x1) * np.cos(x2) * np.exp(np.abs(1 - r / PI)))


def cross_in_tray(x):
    x1, x2 = _cols(x)
    r = np.sqrt(x1**2 + x2**2)
    return -0.0001 * (np.abs(np.sin(x1) * np.sin(x2) * np.exp(np.abs(100 - r / PI))) + 1) ** 0.1


def schaffer2(x):
    x1, x2 = _cols(x)
    s = x1**2 + x2**2
    return 0.5 + (np.sin(x1**2 - x2**2) ** 2 - 0.5) / (1 + 0.001 * s) ** 2


def bartels_conn(x):
    x1, x2 = _cols(x)
    return np.abs(x1**2 + x2**2 + x1 * x2) + np.abs(np.sin(x1)) + np.abs(np.cos(x2))


def leon(x):
    x1, x2 = _cols(x)
    return 100 * (x2 - x1**3) ** 2 + (1 - x1) ** 2


def forrester(x):
    (x1,) = _cols(x)
    return (6 * x1 - 2) ** 2 * np.sin(12 * x1 - 4)


def gramacy_lee(x):
    (x1,) = _cols(x)
    return np.sin(10 * PI * x1) / (2 * x1) + (x1 - 1) ** 4


def double_well(x):
    (x1,) = _cols(x)
    return (x1**2 - 1) ** 2
