"""Deterministic transformation chains over the seed fixtures (shared by tests)."""
from qsys import fixtures
from qsys.transforms import direct_sum, envelope_tensor, fold, shift, symmetrize, tensor

UNARY = {
    "shift": shift,
    "fold": fold,
    "sym": symmetrize,
    "env1": lambda q: envelope_tensor(q, 1),
}


def _partner(q):
    # a same-base companion for binary operations
    if q.m == 1:
        return fixtures.euler_half()
    return symmetrize(fixtures.moving_branch()) if q.m == 2 and q.form.names[1] == "l" else None


CHAINS = [
    ("euler_half", ["shift"]), ("euler_half", ["fold"]), ("euler_half", ["sym"]),
    ("euler_half", ["env1"]), ("euler_half", ["sum"]), ("euler_half", ["tensor"]),
    ("euler_half", ["fold", "fold"]), ("euler_half", ["shift", "fold"]),
    ("euler_half", ["fold", "shift"]), ("euler_half", ["sym", "fold"]),
    ("euler_half", ["tensor", "fold"]), ("euler_half", ["fold", "tensor"]),
    ("euler_half", ["shift", "fold", "shift"]), ("euler_half", ["fold", "fold", "fold"]),
    ("euler_half", ["sum", "fold", "sym"]), ("euler_half", ["env1", "fold", "sum"]),
    ("log_system", ["shift"]), ("log_system", ["fold"]), ("log_system", ["sym"]),
    ("log_system", ["env1"]), ("log_system", ["tensor"]), ("log_system", ["sum"]),
    ("log_system", ["fold", "shift"]), ("log_system", ["shift", "fold"]),
    ("log_system", ["fold", "fold"]), ("log_system", ["sum", "fold"]),
    ("log_system", ["shift", "fold", "sym"]),
    ("envelope_2", ["shift"]), ("envelope_2", ["fold"]), ("envelope_2", ["sym"]),
    ("envelope_2", ["tensor"]), ("envelope_2", ["fold", "shift"]),
    ("envelope_2", ["sum", "fold"]), ("envelope_2", ["shift", "fold", "sym"]),
    ("sqrt_quadratic", ["shift"]), ("sqrt_quadratic", ["fold"]), ("sqrt_quadratic", ["sym"]),
    ("sqrt_quadratic", ["tensor"]), ("sqrt_quadratic", ["env1"]),
    ("sqrt_quadratic", ["shift", "fold"]), ("sqrt_quadratic", ["fold", "fold"]),
    ("sqrt_quadratic", ["tensor", "fold"]), ("sqrt_quadratic", ["shift", "fold", "shift"]),
    ("moving_branch", ["shift"]), ("moving_branch", ["fold"]), ("moving_branch", ["sym"]),
    ("moving_branch", ["sum"]), ("moving_branch", ["tensor"]),
    ("moving_branch", ["fold", "sym"]), ("moving_branch", ["shift", "fold"]),
    ("elliptic", ["shift"]), ("elliptic", ["fold"]), ("elliptic", ["sym"]),
    ("elliptic", ["shift", "sym"]),
]


def apply(q, op):
    if op in UNARY:
        return UNARY[op](q)
    other = _partner(q)
    if other is None:
        raise ValueError(f"no partner for {op} on {q.name}")
    return direct_sum(q, other) if op == "sum" else tensor(q, other)


def generate():
    """Yield ``(label, system, [intermediate systems])`` for every chain."""
    seeds = fixtures.seeds()
    for name, ops in CHAINS:
        q = seeds[name]
        steps = []
        for op in ops:
            q = apply(q, op)
            steps.append(q)
        yield f"{name}:{'/'.join(ops)}", q, steps
