from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def fr(s):
    return Fraction(s)


@st.composite
def directions(draw, n=None):
    """Diagonal directions a with sum 1/a_j = 1."""
    n = n or draw(st.integers(1, 4))
    w = [draw(st.integers(1, 6)) for _ in range(n)]
    total = sum(w)
    return tuple(Fraction(total, x) for x in w)


@st.composite
def exponents(draw, n, hi=5):
    return tuple(draw(st.integers(0, hi)) for _ in range(n))


@st.composite
def toric_pieces(draw, n, hi=4, max_pieces=3, positive=False):
    lo = 1 if positive else 0
    k = draw(st.integers(1, max_pieces))
    pcs = []
    for _ in range(k):
        p = tuple(draw(st.integers(lo, hi)) for _ in range(n))
        if not any(p):
            p = tuple(1 if j == 0 else c for j, c in enumerate(p))
        pcs.append(p)
    return tuple(pcs)


scales = st.builds(Fraction, st.integers(1, 4), st.integers(1, 3))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
