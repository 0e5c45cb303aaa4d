"""Seed Q-systems used by the tests, demos and the CLI.

Every system here has a closed-form (or quadrature) solution that the
test-suite uses as an oracle.
"""
from __future__ import annotations

from .qsystem import QSystem, form_from_sympy


def euler_half() -> QSystem:
    """``dX = (1/2) X dt/t``, solved by ``t^(1/2)``."""
    return QSystem(form_from_sympy([[["1/(2*t)"]]], ["t"]), name="euler_half")


def log_system() -> QSystem:
    """Unipotent 2x2 system with fundamental solution ``[[1, 0], [log t, 1]]``."""
    return QSystem(form_from_sympy([[["0", "0"], ["1/t", "0"]]], ["t"]), name="log_system")


def t_log_t() -> QSystem:
    """Columns ``(t, t log t)`` and ``(0, t)``: the pair used for order estimates."""
    return QSystem(form_from_sympy([[["1/t", "0"], ["1/t", "1/t"]]], ["t"]), name="t_log_t")


def nilpotent_envelope(k: int = 2) -> QSystem:
    from .transforms import envelope_system

    return envelope_system(k)


def sqrt_quadratic() -> QSystem:
    """``dX = t/(t^2+1) X dt``, solved by ``(t^2+1)^(1/2)``; fiber ``{±i, ∞}``."""
    return QSystem(form_from_sympy([[["t/(t**2+1)"]]], ["t"]), name="sqrt_quadratic")


def moving_branch() -> QSystem:
    """``(dt - dl)/(2(t - l))`` over a one-parameter base, solved by ``(t - l)^(1/2)``."""
    return QSystem(form_from_sympy([[["1/(2*t-2*l)"]], [["-1/(2*t-2*l)"]]], ["t", "l"]),
                   name="moving_branch")


ELLIPTIC_NAMES = ["t", "a", "b"]


def elliptic() -> QSystem:
    """Gauss–Manin system of ``H = x2^2 + x1^3 + a x1 + b`` over ``(t, a, b)``.

    The solution vector is ``(∮ x1 dx2, ∮ x1^2 dx2)`` over a counterclockwise
    cycle of ``{H = t}``.  With ``u = t - b`` and ``D = 54u^2 + 8a^3``::

        Ω_t = [[45u, 21a], [-20a^2, 63u]] / D
        Ω_a = [[20a^2, -63u], [60au, 28a^2]] / (2D)
        Ω_b = -Ω_t
    """
    u = "(t-b)"
    D = f"(54*{u}**2+8*a**3)"
    om_t = [[f"45*{u}/{D}", f"21*a/{D}"], [f"-20*a**2/{D}", f"63*{u}/{D}"]]
    om_a = [[f"20*a**2/(2*{D})", f"-63*{u}/(2*{D})"], [f"60*a*{u}/(2*{D})", f"28*a**2/(2*{D})"]]
    om_b = [[f"-({x})" for x in row] for row in om_t]
    return QSystem(form_from_sympy([om_t, om_a, om_b], ELLIPTIC_NAMES), name="elliptic")


def seeds() -> dict[str, QSystem]:
    return {
        "euler_half": euler_half(),
        "log_system": log_system(),
        "envelope_2": nilpotent_envelope(2),
        "elliptic": elliptic(),
        "sqrt_quadratic": sqrt_quadratic(),
        "moving_branch": moving_branch(),
    }
