import itertools
import string

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record one pass/fail summary line for the acceptance table."""

    def record(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append((number, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


def loop_eval(array, slot_vectors):
    """Reference evaluation by explicit summation over every multi-index."""
    dims = array.shape[:-1]
    out = np.zeros(array.shape[-1])
    for idx in itertools.product(*(range(d) for d in dims)):
        w = 1.0
        for s, j in enumerate(idx):
            w *= slot_vectors[s][j]
        out += w * array[idx]
    return out


def brute_symmetrize(array, degrees):
    """Average over every within-block permutation of slot axes."""
    offsets = np.cumsum((0,) + tuple(degrees))
    total = np.zeros_like(array)
    count = 0
    blocks = [itertools.permutations(range(n)) for n in degrees]
    for perms in itertools.product(*blocks):
        axes = []
        for o, perm in zip(offsets, perms):
            axes += [o + p for p in perm]
        axes.append(array.ndim - 1)
        total += np.transpose(array, axes)
        count += 1
    return total / count


def explicit_composition(t, Pc, u):
    """Apply ``u`` slot by slot and ``t`` on the codomain with one einsum."""
    shape = Pc.shape
    letters = iter(string.ascii_letters)
    src = [next(letters) for _ in range(shape.n_slots)]
    dst = [next(letters) for _ in range(shape.n_slots)]
    k_in, k_out = next(letters), next(letters)
    terms = ["".join(src) + k_in]
    operands = [Pc.array]
    for s, b in enumerate(shape.slot_blocks):
        terms.append(src[s] + dst[s])
        operands.append(u[b])
    terms.append(k_out + k_in)
    operands.append(t)
    return np.einsum(",".join(terms) + "->" + "".join(dst) + k_out, *operands)
